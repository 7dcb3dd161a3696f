"""Regenerates the synthetic descriptor fixtures in this directory.

Usage: python3 fixtures/generate.py
"""

import csv
import math
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent
COLUMNS = ["compound_id", "ec50_nM", "n_donors", "n_acceptors", "rotatable_bonds", "mol_weight", "logp"]


def write(name, header, rows):
    with open(HERE / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def ec50_from_pec50(p):
    return float(f"{10 ** (9 - p):.6g}")


def compound(rng, idx, activity):
    """One drug-like compound whose potency follows `activity`."""
    nd = rng.randint(0, 5)
    na = rng.randint(1, 10)
    rb = rng.randint(0, 12)
    mw = round(rng.uniform(180, 520), 1)
    logp = round(rng.uniform(-1, 5.5), 2)
    p = activity(nd, na, rb, mw) + rng.gauss(0, 0.15)
    return [f"CMPD-{idx:04d}", ec50_from_pec50(p), nd, na, rb, mw, logp]


def small(rng):
    rows = []
    for i in range(20):
        rows.append(compound(rng, i, lambda nd, na, rb, mw: 4.5 + 0.006 * (mw - 180) + 0.1 * rb))
    write("compounds_20.csv", COLUMNS, rows)


def separable(rng):
    # Two descriptors; classes sit on either side of mol_weight = 350 with
    # a gap of 100 Da.
    rows = []
    for i, mw in enumerate([200, 230, 260, 300, 400, 440, 470, 500]):
        label = "+1" if mw > 350 else "-1"
        rows.append([f"SEP-{i}", mw, round(rng.uniform(0, 5), 2), label])
    write("separable_8.csv", ["compound_id", "mol_weight", "logp", "label"], rows)


def banded(rng, n=72):
    # Activity peaks for mid-sized, moderately flexible molecules and falls
    # off on both sides, so no hyperplane in descriptor space separates it.
    def activity(nd, na, rb, mw):
        u = (mw - 350) / 170
        v = (rb - 6) / 6
        return 7.6 - 3.2 * (u * u + v * v)

    rows = [compound(rng, i, activity) for i in range(n)]
    # A few compounds that break two or more rule-of-five criteria.
    for j in range(4):
        rows.append([f"CMPD-{n + j:04d}", 120.0, 6 + j, 11 + j, 8, round(560 + 20 * j, 1), 5.8])
    write("chrm2_synthetic.csv", COLUMNS, rows)


def band(rng, n=90):
    # Active compounds lie in a diagonal band of the (mol_weight, logp)
    # plane, |u + v - 1| < 0.3 after scaling both to [0, 1]; the band has
    # inactive compounds on both sides.
    rows = []
    for i in range(n):
        rb = rng.randint(0, 12)
        mw = round(rng.uniform(200, 500), 1)
        logp = round(rng.uniform(-1, 5), 2)
        s = (mw - 200) / 300 + (logp + 1) / 6
        p = 7 - abs(s - 1) * 10 / 3
        rows.append([f"BAND-{i:03d}", ec50_from_pec50(p), rb, mw, logp])
    write("nonlinear_band.csv", ["compound_id", "ec50_nM", "rotatable_bonds", "mol_weight", "logp"], rows)


if __name__ == "__main__":
    small(random.Random(20))
    separable(random.Random(8))
    banded(random.Random(72))
    band(random.Random(90))
