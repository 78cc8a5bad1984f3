"""Builders for raw tweet lines and synthetic streams used across tests."""

import json
import random
import unicodedata

CREATED = "Wed Nov 06 14:02:11 +0000 2019"


def tweet(tid, location="Paris", lang="en", text="hello world", screen_name="someone",
          retweet=False, **extra):
    user = {"name": screen_name.title(), "screen_name": screen_name}
    if location is not ...:
        user["location"] = location
    obj = {"created_at": CREATED, "id_str": str(tid), "text": text, "user": user}
    if lang is not ...:
        obj["lang"] = lang
    if retweet:
        obj["retweeted_status"] = {"id_str": "1"}
    obj.update(extra)
    return json.dumps(obj, ensure_ascii=False)


def duplicate_stream(n_total, n_duplicates, seed):
    """Ids for a stream of ``n_total`` with exactly ``n_duplicates`` repeats.

    Every repeat comes after the first occurrence of its id. Returns the
    stream and the expected first-occurrence order.
    """
    rng = random.Random(seed)
    unique = [f"{900000000000 + k * 7919}" for k in range(n_total - n_duplicates)]
    rng.shuffle(unique)
    stream = list(unique)
    for _ in range(n_duplicates):
        # pick a position, repeat something that already appeared before it
        pos = rng.randint(1, len(stream))
        src = stream[rng.randrange(pos)]
        stream.insert(pos, src)
    return stream, unique


def fuzz_strings(gaz, n, seed):
    """Location-like strings: gazetteer words with random accents, case and noise."""
    rng = random.Random(seed)
    words = [e.possible_match for e in gaz.entries if e.possible_match.replace(" ", "").isalpha()]
    marks = ["́", "̀", "̈", "̃", "̧", "̊", "̂"]
    noise = ["", ", ", " - ", " 🌍 ", "/", "  ", "#", "@", "İ", "ß", "ǅ", "ﬁ", "한국", "Ω", " "]
    out = []
    for _ in range(n):
        parts = []
        for _ in range(rng.randint(1, 3)):
            w = rng.choice(words) if rng.random() < 0.8 else "".join(
                chr(rng.randint(0x20, 0x2FF)) for _ in range(rng.randint(1, 6)))
            chars = []
            for c in w:
                chars.append(c.upper() if rng.random() < 0.3 else c)
                if c.isalpha() and rng.random() < 0.15:
                    chars.append(rng.choice(marks))
            parts.append("".join(chars))
            parts.append(rng.choice(noise))
        s = "".join(parts)
        if rng.random() < 0.3:
            s = unicodedata.normalize(rng.choice(["NFC", "NFD", "NFKC"]), s)
        out.append(s)
    return out
