#!/usr/bin/env python3
"""Regenerates the bundled synthetic corpora under data/.

Each HATE sample plants a group of four trigger words (the human rationale)
plus three style tokens that only ever occur in hate samples. The style tokens
are the stronger classification shortcut, the trigger words also occur singly
in NOT_HATE text, so attention supervision is what ties the model's focus to
the annotated tokens rather than the shortcut.
"""
import json
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

TRIGGERS = ["grum", "zoka", "vexa", "drul", "mork", "tebb", "skarn", "plik"]
STYLE = ["nulla", "prav", "stek", "ongr", "vasto", "krell"]
FILLERS = [
    "lano", "pirt", "sodu", "kema", "rilt", "oben", "dask", "yuve",
    "tralo", "nimp", "gesa", "holk", "arbu", "selt", "wafi", "ketri",
    "osum", "bilda", "rucho", "penk",
]

# a few Devanagari / Telugu surface forms for the mini corpus
MINI_EXTRA_FILLERS = ["कपड़ा", "घर", "నీరు", "చెట్టు"]
MINI_EXTRA_TRIGGERS = ["द्रोह", "కపటం"]


def make_sample(rng, idx, prefix, hate, triggers, fillers, length):
    tokens = [rng.choice(fillers) for _ in range(length)]
    rationale = [0] * length
    if hate:
        planted = rng.sample(range(length), 7)
        for pos, word in zip(planted[:4], rng.sample(triggers, 4)):
            tokens[pos] = word
            rationale[pos] = 1
        for pos in planted[4:]:
            tokens[pos] = rng.choice(STYLE)
    else:
        # scattered lone trigger words keep them non-decisive on their own
        for pos in rng.sample(range(length), rng.randrange(0, 3)):
            tokens[pos] = rng.choice(triggers)

    annotators = []
    for k in range(3):
        bits = list(rationale)
        if hate and k == 2 and rng.random() < 0.3:
            # third annotator occasionally over-marks one extra token
            extras = [i for i, r in enumerate(rationale) if r == 0]
            if extras:
                bits[rng.choice(extras)] = 1
        annotators.append(bits)

    rec = {
        "id": f"{prefix}{idx:04d}",
        "text": " ".join(tokens),
        "label": "HATE" if hate else "NOT_HATE",
        "gold_rationale": rationale,
        "rationales": annotators,
    }
    if not hate and rng.random() < 0.3:
        del rec["gold_rationale"]
        del rec["rationales"]
    return rec


def write_corpus(path, rng, n, prefix, triggers, fillers):
    records = []
    for i in range(n):
        hate = i < n // 2
        length = rng.randrange(10, 13)
        records.append(make_sample(rng, i, prefix, hate, triggers, fillers, length))
    rng.shuffle(records)
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return records


def main():
    DATA.mkdir(exist_ok=True)

    rng = random.Random(20240817)
    write_corpus(DATA / "trigger_corpus.jsonl", rng, 200, "tr", TRIGGERS, FILLERS)

    rng = random.Random(31337)
    mini_triggers = TRIGGERS + MINI_EXTRA_TRIGGERS
    mini_fillers = FILLERS + MINI_EXTRA_FILLERS
    mini = write_corpus(DATA / "mini_corpus.jsonl", rng, 60, "mini", mini_triggers, mini_fillers)

    # offline LLM fixture: the "LLM" names the trigger words it sees, and now
    # and then a word that is not in the sample at all
    trigger_words = set(mini_triggers)
    fixture = {}
    for rec in mini:
        tokens = rec["text"].split()
        words = sorted({t for t in tokens if t in trigger_words})
        if rec["label"] == "HATE" and rng.random() < 0.2:
            words.append("hateful")  # unresolvable on purpose
        fixture[rec["id"]] = words
    with open(DATA / "llm_fixture.json", "w", encoding="utf-8") as f:
        json.dump(fixture, f, ensure_ascii=False, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
