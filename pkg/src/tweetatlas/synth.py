"""Seeded synthetic tweet-object corpus for tests and demos.

The output mimics the classic JSON tweet layout closely enough to exercise
every pipeline stage: duplicates from re-delivery, missing or blank
locations, undetermined languages, malformed lines, fictional places,
diacritics, retweets, and a skewed distribution over countries, handles
and words.
"""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .geo import load_gazetteer
from .rankcorr import read_hdi

# relative tweet volume for the busiest countries; everything in the HDI
# table gets a small share on top, scaled down with its UN rank
HEAVY = {
    "US": 300, "BR": 80, "GB": 70, "ES": 42, "FR": 40, "AR": 36, "IN": 30, "MX": 26,
    "CA": 21, "NG": 15, "JP": 14, "VE": 12, "DE": 9, "IT": 8, "TR": 7, "ZA": 6,
    "AU": 6, "CO": 6, "PH": 5, "CL": 4,
}
NO_TWEETS = {"GW", "BF"}

LANG_BY_COUNTRY = {
    "US": "en", "GB": "en", "CA": "en", "NG": "en", "AU": "en", "ZA": "en", "IE": "en", "NZ": "en",
    "BR": "pt", "ES": "es", "AR": "es", "MX": "es", "VE": "es", "CO": "es", "CL": "es",
    "FR": "fr", "JP": "ja", "DE": "de", "IT": "it", "TR": "tr", "PH": "tl", "IN": "en",
    "NL": "nl", "SE": "sv", "NO": "no", "DK": "da", "FI": "fi", "CH": "de", "AT": "de",
    "BE": "nl", "IS": "is", "SG": "en", "HK": "zh", "LI": "de", "PK": "ur",
}

FAKE_PLACES = ["Konoha", "Gotham City", "Hueco Mundo", "Asgard", "Hogwarts", "Narnia"]
NOWHERE = ["somewhere", "in my head", "planet earth", "everywhere", "your heart", "the moon",
           "online", "home", "worldwide", "here and there"]
DIACRITIC_SPELLINGS = {"Sao Paulo": "São Paulo", "Mexico": "México", "Bogota": "Bogotá",
                       "Cordoba": "Córdoba", "Malmo": "Malmö", "Zurich": "Zürich",
                       "Reykjavik": "Reykjavík", "Montreal": "Montréal"}

VOCAB = {
    "en": "a the to i of and is in you for me on no this that it my be so just with "
          "love what your are all like was have not but we get at can day time one now "
          "good people know new see go more out do got today",
    "es": "de que la y el en los se por un las con no una su para es lo como mas "
          "pero sus le ya o este si porque esta entre cuando muy sin sobre",
    "pt": "de que e o do da em um para com nao uma os no se na por mais as dos "
          "como mas ao ele das seu sua ou quando muito",
    "fr": "de la le et les des en un du une que est pour qui dans pas sur au plus",
    "other": "y - % ok lol omg wow yes haha rt",
}

START = datetime(2019, 11, 1, tzinfo=timezone.utc)
CRAWL_DAYS = 23


def _zipf_weights(n: int, s: float = 1.1) -> list[float]:
    return [1 / (k ** s) for k in range(1, n + 1)]


class CorpusGenerator:
    def __init__(self, seed: int = 2019):
        self.rng = random.Random(seed)
        gaz = load_gazetteer()
        self.country_name: dict[str, str] = {}
        self.cities: dict[str, list[str]] = {}
        for e in gaz.entries:
            self.country_name.setdefault(e.country_iso, e.country)
            if e.city:
                self.cities.setdefault(e.country_iso, [])
                if e.city not in self.cities[e.country_iso]:
                    self.cities[e.country_iso].append(e.city)
        weights = dict(HEAVY)
        for fx in read_hdi().values():
            for iso in fx.countries:
                if iso in NO_TWEETS or iso in weights:
                    continue
                weights[iso] = round(max(0.05, 3.0 / (1 + fx.un_ranks[iso] / 20)), 3)
        self.countries = sorted(weights)
        self.country_weights = [weights[c] for c in self.countries]
        self.words = {k: v.split() for k, v in VOCAB.items()}
        self.word_weights = {k: _zipf_weights(len(v)) for k, v in self.words.items()}
        self._next_id = 1_190_000_000_000_000_000

    def _location(self, iso: str) -> str:
        rng = self.rng
        name = self.country_name[iso]
        cities = self.cities.get(iso, [])
        r = rng.random()
        if cities and r < 0.45:
            place = rng.choice(cities[:4])
        elif cities and r < 0.7:
            place = f"{rng.choice(cities[:4])}, {name}"
        else:
            place = name
        for plain, fancy in DIACRITIC_SPELLINGS.items():
            if plain in place and rng.random() < 0.5:
                place = place.replace(plain, fancy)
        if rng.random() < 0.15:
            place = place.upper() if rng.random() < 0.5 else place.lower()
        return place

    def _make_users(self, n_users: int) -> list[dict]:
        rng = self.rng
        users = []
        for u in range(n_users):
            r = rng.random()
            iso = None
            if r < 0.06:
                loc = rng.choice(FAKE_PLACES)
            elif r < 0.14:
                loc = rng.choice(NOWHERE)
            elif r < 0.18:
                loc = None
            elif r < 0.20:
                loc = "   "
            else:
                iso = rng.choices(self.countries, self.country_weights)[0]
                loc = self._location(iso)
            users.append({
                "screen_name": f"user{u:04d}_{rng.choice('abcdefghijklmnopqrstuvwxyz')}",
                "name": f"User {u}",
                "location": loc,
                "lang": LANG_BY_COUNTRY.get(iso, "en") if iso else rng.choice(["en", "es", "pt"]),
                "native_rate": 0.55 + 0.4 * rng.random(),
            })
        return users

    def _text(self, lang: str) -> str:
        rng = self.rng
        pool = lang if lang in self.words else "en"
        k = rng.randint(4, 14)
        words = rng.choices(self.words[pool], self.word_weights[pool], k=k)
        for _ in range(rng.randint(0, 2)):
            words.insert(rng.randrange(len(words) + 1), rng.choice(self.words["other"]))
        if rng.random() < 0.2:
            words.append(f"https://t.co/{rng.randrange(16**8):08x}")
        if rng.random() < 0.2:
            words.insert(0, f"@user{rng.randrange(600):04d}")
        if rng.random() < 0.15:
            words.append("#" + rng.choice(["news", "love", "futbol", "brexit", "bbb20", "music"]))
        return " ".join(words)

    def generate(self, n_lines: int = 10_000, n_users: int = 600) -> list[str]:
        rng = self.rng
        users = self._make_users(n_users)
        activity = _zipf_weights(n_users, 0.9)
        lines: list[str] = []
        objs: list[dict] = []
        t = START
        step = timedelta(days=CRAWL_DAYS) / n_lines
        while len(lines) < n_lines:
            t += step
            r = rng.random()
            if objs and r < 0.08:
                # re-delivery of something already seen
                lines.append(json.dumps(rng.choice(objs[-500:]), ensure_ascii=False))
                continue
            if r < 0.085:
                good = json.dumps(self._object(users, activity, t), ensure_ascii=False)
                lines.append(good[: rng.randrange(5, len(good) - 1)])
                continue
            obj = self._object(users, activity, t)
            objs.append(obj)
            lines.append(json.dumps(obj, ensure_ascii=False))
        return lines

    def _object(self, users, activity, t) -> dict:
        rng = self.rng
        user = rng.choices(users, activity)[0]
        self._next_id += rng.randint(1, 5000)
        if rng.random() < 0.03:
            lang = "und"
        elif rng.random() < user["native_rate"]:
            lang = user["lang"]
        else:
            lang = rng.choice(["en", "en", "es", "pt", "fr", "ja"])
        obj = {
            "created_at": t.strftime("%a %b %d %H:%M:%S +0000 %Y"),
            "id": self._next_id,
            "id_str": str(self._next_id),
            "text": self._text(lang),
            "lang": lang,
            "user": {"name": user["name"], "screen_name": user["screen_name"],
                     "location": user["location"]},
        }
        if rng.random() < 0.3:
            src = rng.choice(users)["screen_name"]
            obj["text"] = f"RT @{src}: {obj['text']}"
            obj["retweeted_status"] = {"id_str": str(self._next_id - rng.randint(1, 10**6))}
        return obj


def generate_corpus(path: str | Path, n_lines: int = 10_000, seed: int = 2019) -> int:
    lines = CorpusGenerator(seed).generate(n_lines)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    return len(lines)
