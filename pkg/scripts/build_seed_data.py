"""Regenerate src/tweetatlas/data/gazetteer.csv and native_languages.csv.

Needs the optional ``data`` extra (geonamescache, pycountry). The output is
committed, so this only has to run when the seed lists change.

    python scripts/build_seed_data.py
"""

import csv
import re
import sys
import unicodedata
from pathlib import Path

import geonamescache
import pycountry

OUT = Path(__file__).resolve().parents[1] / "src" / "tweetatlas" / "data"

CITIES_PER_COUNTRY = 5
MIN_CITY_POP = 50_000

# city names that are also everyday words in location fields
CITY_STOPLIST = {
    "nice", "mobile", "reading", "split", "bath", "male", "of", "bar", "best", "hope",
    "sale", "young", "college", "university", "normal", "mercedes", "victoria",
    "federal", "general", "union", "independence", "liberty", "concord", "progress",
    "la", "mandi", "kota", "ahmadi", "as", "salt", "mary", "david", "leon", "colon",
    "kara", "bimbo", "pest", "buda", "manas", "balti", "salto", "hue", "patan", "kira",
}

# (pattern, ISO) aliases tried before the generated country names; order matters
ALIASES = [
    ("north korea", "KP"), ("dprk", "KP"),
    ("south korea", "KR"), ("korea", "KR"), ("republic of korea", "KR"), ("한국", "KR"),
    ("usa", "US"), ("u\\.s\\.a\\.?", "US"), ("u\\.s\\.", "US"), ("united states of america", "US"),
    ("estados unidos", "US"), ("eeuu", "US"),
    ("uk", "GB"), ("u\\.k\\.", "GB"), ("england", "GB"), ("scotland", "GB"), ("wales", "GB"),
    ("northern ireland", "GB"), ("great britain", "GB"), ("britain", "GB"),
    ("deutschland", "DE"), ("allemagne", "DE"),
    ("espana", "ES"), ("catalunya", "ES"), ("cataluna", "ES"),
    ("brasil", "BR"), ("mexique", "MX"),
    ("nippon", "JP"), ("日本", "JP"), ("にっぽん", "JP"),
    ("россия", "RU"), ("italia", "IT"), ("turkiye", "TR"), ("holland", "NL"), ("nederland", "NL"),
    ("the netherlands", "NL"), ("suisse", "CH"), ("schweiz", "CH"), ("svizzera", "CH"),
    ("osterreich", "AT"), ("belgique", "BE"), ("belgie", "BE"), ("sverige", "SE"),
    ("norge", "NO"), ("danmark", "DK"), ("suomi", "FI"), ("polska", "PL"), ("czechia", "CZ"),
    ("ellada", "GR"), ("hellas", "GR"), ("perú", "PE"), ("philippines", "PH"), ("pilipinas", "PH"),
    ("uae", "AE"), ("emirates", "AE"), ("ksa", "SA"), ("saudi", "SA"),
    ("ivory coast", "CI"), ("cote d'ivoire", "CI"), ("burma", "MM"), ("persia", "IR"),
    ("vietnam", "VN"), ("viet nam", "VN"), ("russia", "RU"), ("syria", "SY"), ("laos", "LA"),
    ("bolivia", "BO"), ("venezuela", "VE"), ("tanzania", "TZ"), ("iran", "IR"),
    ("moldova", "MD"), ("taiwan", "TW"), ("palestine", "PS"), ("macedonia", "MK"),
    ("congo kinshasa", "CD"), ("drc", "CD"), ("dr congo", "CD"), ("democratic republic of the congo", "CD"),
    ("congo brazzaville", "CG"), ("micronesia", "FM"), ("cape verde", "CV"), ("swaziland", "SZ"),
    ("east timor", "TL"), ("vatican", "VA"), ("brunei", "BN"), ("turkey", "TR"),
]

# big US cities that people write without "city"
EXTRA_CITIES = [
    ("new york", "US", "New York City"), ("nyc", "US", "New York City"),
    ("cdmx", "MX", "Mexico City"), ("ciudad de mexico", "MX", "Mexico City"),
    ("sao paulo", "BR", "São Paulo"), ("rio de janeiro", "BR", "Rio de Janeiro"),
    ("bombay", "IN", "Mumbai"), ("new delhi", "IN", "New Delhi"), ("calcutta", "IN", "Kolkata"),
    ("washington dc", "US", "Washington"), ("washington d\\.c\\.", "US", "Washington"),
    ("tokyo", "JP", "Tokyo"), ("東京", "JP", "Tokyo"), ("osaka", "JP", "Osaka"),
]

# countries where the first listed language is not the (only) native one
NATIVE_OVERRIDES = {
    "CA": ["en", "fr"],
    "IN": ["hi", "bn", "te", "mr", "ta", "ur", "gu", "kn", "ml", "or", "pa", "as"],
    "CH": ["de", "fr", "it", "rm"],
    "BE": ["nl", "fr", "de"],
    "PH": ["tl", "en"],
    "SG": ["en", "ms", "zh", "ta"],
    "ZA": ["zu", "xh", "af", "en"],
    "IE": ["en", "ga"],
    "FI": ["fi", "sv"],
    "LU": ["lb", "fr", "de"],
    "PK": ["ur", "en"],
    "NG": ["en"],
    "KE": ["sw", "en"],
    "ID": ["in", "id"],  # the API reported Indonesian as "in"
    "IL": ["iw", "he"],  # likewise Hebrew as "iw"
    "PY": ["es", "gn"],
    "BO": ["es", "qu", "ay"],
    "PE": ["es", "qu"],
    "NZ": ["en", "mi"],
    "US": ["en"],
    "GB": ["en"],
    "AU": ["en"],
}


def fold(s):
    s = unicodedata.normalize("NFD", s)
    s = "".join(c for c in s if not unicodedata.category(c).startswith("M"))
    return unicodedata.normalize("NFC", s).lower().strip()


def literal(name):
    return re.escape(fold(name)).replace("\\ ", " ").replace("\\-", "-").replace("\\'", "'")


def usable(name):
    return bool(name) and "," not in name and "(" not in name and len(fold(name)) >= 3


def main():
    gc = geonamescache.GeonamesCache()
    countries = gc.get_countries()
    name_of = {iso: c["name"] for iso, c in countries.items()}

    rows = []
    seen = set()

    def add(pattern, country_iso, city=None):
        key = fold(pattern)
        if key in seen or country_iso not in name_of:
            return
        seen.add(key)
        rows.append((pattern, name_of[country_iso], city or "", country_iso))

    for pat, iso, city in EXTRA_CITIES:
        add(pat, iso, city)

    cities = sorted(gc.get_cities().values(), key=lambda c: (-c["population"], c["geonameid"]))
    per_country: dict[str, int] = {}
    capitals = {c["capital"] for c in countries.values() if c["capital"]}
    for c in cities:
        iso = c["countrycode"]
        name = c["name"]
        if not usable(name) or fold(name) in CITY_STOPLIST:
            continue
        if fold(name) in {fold(n) for n in name_of.values()}:
            continue
        big = c["population"] >= MIN_CITY_POP and per_country.get(iso, 0) < CITIES_PER_COUNTRY
        if big or (name in capitals and countries.get(iso, {}).get("capital") == name):
            per_country[iso] = per_country.get(iso, 0) + 1
            add(literal(name), iso, name)

    for pat, iso in ALIASES:
        add(pat if "\\" in pat else literal(pat), iso)

    for iso in sorted(name_of):
        names = [name_of[iso]]
        pc = pycountry.countries.get(alpha_2=iso)
        if pc is not None:
            names += [getattr(pc, "common_name", None), pc.name, getattr(pc, "official_name", None)]
        for n in names:
            if n and usable(n):
                add(literal(n), iso)

    for state in sorted(gc.get_us_states().values(), key=lambda s: s["name"]):
        add(literal(state["name"]), "US")

    with open(OUT / "gazetteer.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pattern", "country", "city", "country_iso"])
        w.writerows(rows)

    with open(OUT / "native_languages.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country_iso", "language_code"])
        for iso in sorted(countries):
            langs = NATIVE_OVERRIDES.get(iso)
            if langs is None:
                first = (countries[iso]["languages"] or "").split(",")[0]
                langs = [first.split("-")[0]] if first else []
            for lang in langs:
                w.writerow([iso, lang])

    print(f"{len(rows)} gazetteer rows, {len(countries)} countries", file=sys.stderr)


if __name__ == "__main__":
    main()
