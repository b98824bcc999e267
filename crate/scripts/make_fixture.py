#!/usr/bin/env python3
"""Writes the synthetic 1,000-record tweet fixture used by the end-to-end tests.

Deterministic: re-running produces the same bytes.

    python3 scripts/make_fixture.py crates/core/tests/fixtures/tweets_1000.jsonl
"""

import json
import random
import sys
from datetime import datetime, timedelta, timezone

THEMES = {
    "health": "hospital nurses doctors patients masks testing symptoms vaccine ventilators icu cases quarantine",
    "economy": "markets stocks jobs unemployment business economy workers stimulus recession prices shops supply",
    "home": "stay home kids school parents lockdown cooking garden netflix neighbours walk isolation",
    "politics": "government president minister briefing policy press congress response federal leaders election",
}

FRAME_WORDS = {
    "war": ["fight", "battle", "enemy", "frontline", "front line", "soldiers", "war", "heroes", "attack", "defeat", "weapon", "army"],
    "family": ["family", "mother", "children", "home", "brother", "grandparents", "daughter", "father", "sister"],
    "storm": ["storm", "wave", "flood", "hurricane", "weather", "thunder", "rain"],
    "monster": ["monster", "beast", "demon", "creature", "nightmare"],
    "tsunami": ["tsunami", "surge", "wave", "flood", "earthquake"],
}

TAGS = ["#COVID19", "#covid19", "#coronavirus", "#Coronavirus", "#nCoV2019", "#2019nCoV", "#ncov", "#ncov19"]
OFF_TAGS = ["#stayhome", "#news", "#health"]
FILLER = ["today", "really", "people", "everyone", "still", "week", "time", "news", "world", "new"]


def make(n=1000, seed=42):
    rng = random.Random(seed)
    start = datetime(2020, 3, 1, tzinfo=timezone.utc)
    authors = [f"u{i:04d}" for i in range(720)]
    themes = sorted(THEMES)
    records = []
    for i in range(n):
        theme = themes[rng.randrange(len(themes))]
        words = rng.sample(THEMES[theme].split(), 5)
        words += rng.sample(FILLER, 2)
        for frame in sorted(FRAME_WORDS):
            if rng.random() < {"war": 0.35, "family": 0.3, "storm": 0.12, "monster": 0.05, "tsunami": 0.06}[frame]:
                words.append(rng.choice(FRAME_WORDS[frame]))
        rng.shuffle(words)
        if rng.random() < 0.92:
            words.insert(rng.randrange(len(words) + 1), rng.choice(TAGS))
        else:
            words.append(rng.choice(OFF_TAGS))
        if rng.random() < 0.15:
            words.append(f"https://t.co/{rng.randrange(16**8):08x}")
        retweet = rng.random() < 0.1
        text = " ".join(words)
        if retweet:
            text = "RT @someone: " + text
        stamp = start + timedelta(seconds=int(i * 7 * 86400 / n) + rng.randrange(60))
        records.append({
            "id": str(1_240_000_000_000_000_000 + i),
            "author_id": rng.choice(authors),
            "created_at": stamp.strftime("%Y-%m-%dT%H:%M:%SZ"),
            "text": text,
            "is_retweet": retweet,
            "lang": "en" if rng.random() < 0.97 else "es",
        })
    return records


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "tweets_1000.jsonl"
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        for record in make():
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
