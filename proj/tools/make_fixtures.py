#!/usr/bin/env python3
# Copyright 2026 The rhpo Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the synthetic stand-in fixtures under tests/data.

The UCI banknote-authentication and blood-transfusion files are not
redistributed here. These stand-ins copy their schema, row counts and class
balance so the test suites run offline. Drop the real files in as
tests/data/banknote.csv / tests/data/transfusion.csv to use them instead.
"""
import argparse
import pathlib

import numpy as np


def banknote(rng):
    # 762 genuine (0) / 610 forged (1), driven mostly by the first two
    # wavelet statistics like the original. The boundary is an oblique noisy
    # hyperplane, which axis-aligned trees only approximate: 3-fold CV Gini
    # tops out near 0.99 here, below what trees reach on the real file.
    n0, n1 = 762, 610
    y = np.r_[np.zeros(n0, int), np.ones(n1, int)]
    var = np.r_[rng.normal(2.3, 2.0, n0), rng.normal(-1.9, 1.9, n1)]
    skew = np.r_[rng.normal(4.3, 5.1, n0), rng.normal(-1.0, 5.4, n1)]
    curt = -0.9 * skew + np.r_[rng.normal(0.0, 3.0, n0), rng.normal(2.0, 3.5, n1)]
    ent = -np.abs(rng.normal(0.0, 2.0, n0 + n1)) + 0.3 * rng.normal(0, 1, n0 + n1)
    # class 1 iff the noisy hyperplane is crossed
    score = 1.1 * var + 0.35 * skew + 0.2 * curt + rng.normal(0, 0.25, n0 + n1)
    order = np.argsort(score)
    y_sorted = np.zeros(n0 + n1, int)
    y_sorted[order[:n1]] = 1
    y = y_sorted
    perm = rng.permutation(n0 + n1)
    cols = np.c_[var, skew, curt, ent][perm]
    return ["variance", "skewness", "curtosis", "entropy", "class"], cols, y[perm], "%.5f"


def transfusion(rng):
    # 748 donors, 178 donated in March 2007.
    n = 748
    recency = np.minimum(rng.geometric(0.12, n) - 1, 74)
    freq = np.minimum(1 + rng.negative_binomial(1, 0.18, n), 50)
    time = np.maximum(recency + rng.integers(0, 40, n) + 2 * freq, recency)
    money = 250 * freq
    logit = -0.10 * recency + 0.09 * freq - 0.02 * time + rng.logistic(0, 1.4, n)
    y = np.zeros(n, int)
    y[np.argsort(-logit)[:178]] = 1
    cols = np.c_[recency, freq, money, time]
    names = ["Recency (months)", "Frequency (times)", "Monetary (c.c. blood)",
             "Time (months)", "whether he/she donated blood in March 2007"]
    return names, cols, y, "%d"


def write(path, names, cols, y, fmt):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(f'"{c}"' if " " in c else c for c in names) + "\n")
        for row, label in zip(cols, y):
            fh.write(",".join(fmt % v for v in row) + f",{label}\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"))
    ap.add_argument("--seed", type=int, default=20260101)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    write(out / "banknote_synthetic.csv", *banknote(rng))
    write(out / "transfusion_synthetic.csv", *transfusion(rng))


if __name__ == "__main__":
    main()
