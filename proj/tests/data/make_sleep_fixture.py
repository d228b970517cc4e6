"""Writes sleep_fixture.csv: 253 synthetic students with the sleep-study columns.

Values are drawn from a fixed seed so the file is reproducible. The numbers
are invented; only the column layout follows the public dataset.
"""
import csv
import math
import random
from pathlib import Path

N = 253
rng = random.Random(20240611)


def clip(v, lo, hi):
    return max(lo, min(hi, v))


rows = []
for _ in range(N):
    gender = int(rng.random() < 0.4)
    year = rng.choices([1, 2, 3, 4], weights=[0.3, 0.3, 0.2, 0.2])[0]
    lark_owl = rng.choice(["Lark", "Neither", "Owl"])
    early = int(rng.random() < 0.65)
    gpa = round(clip(rng.gauss(3.25, 0.4), 2.0, 4.0), 2)
    missed = min(20, int(rng.expovariate(0.5)))
    anxiety = min(21, int(abs(rng.gauss(5.0, 4.5))))
    depression = min(21, int(abs(rng.gauss(5.0, 4.5))))
    happiness = int(clip(round(rng.gauss(26.0, 5.0)), 0, 35))
    drinks = min(24, int(rng.expovariate(1 / 5.5)))
    all_nighter = int(rng.random() < 0.14)
    sleep = round(clip(rng.gauss(7.9, 0.85), 4.9, 10.6), 2)

    logit = -1.3 + 0.12 * (anxiety - 5) + 0.08 * (depression - 5) - 0.04 * (happiness - 26)
    stress = "high" if rng.random() < 1 / (1 + math.exp(-logit)) else "normal"
    quality = (
        6.0
        + 0.9 * (stress == "high")
        + 0.15 * anxiety
        + 0.1 * depression
        - 0.6 * (sleep - 7.9)
        + 0.6 * all_nighter
        + rng.gauss(0.0, 2.0)
    )
    quality = int(clip(round(quality), 1, 18))
    rows.append(
        {
            "Gender": gender,
            "ClassYear": year,
            "LarkOwl": lark_owl,
            "EarlyClass": early,
            "GPA": gpa,
            "ClassesMissed": missed,
            "PoorSleepQuality": quality,
            "DepressionScore": depression,
            "AnxietyScore": anxiety,
            "Stress": stress,
            "Happiness": happiness,
            "Drinks": drinks,
            "AllNighter": all_nighter,
            "AverageSleep": sleep,
        }
    )

out = Path(__file__).with_name("sleep_fixture.csv")
with out.open("w", newline="") as f:
    w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
