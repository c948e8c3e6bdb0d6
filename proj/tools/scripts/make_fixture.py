#!/usr/bin/env python3
"""Generate the synthetic 3-exchange, 2-day fixture used by the golden pipeline test.

Day 1 (2019-01-01) is warm-up: bandwidth selection and latency fitting. Day 2 is the output day.
Order books cover 21:00-24:00 on day 1 and 00:00-01:00 on day 2.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np

DAY1 = np.datetime64("2019-01-01T00:00:00")
DAY2 = DAY1 + np.timedelta64(1, "D")

EXCHANGES = [
    # name, taker fee, withdrawal fee, confirmations, premium scale
    ("alpha", 0.001, 0.0005, 3, 0.012),
    ("bravo", 0.002, None, None, 0.015),
    ("charlie", 0.0015, 0.001, 6, 0.010),
]
LEVELS = 5
PHI = 0.995


def iso(ts):
    return str(np.datetime64(ts, "s")) + "Z"


def books(rng, out):
    start = DAY1 + np.timedelta64(21, "h")
    minutes = 4 * 60
    sigma = 0.0009
    efficient = 9.2 + np.cumsum(rng.normal(0.0, sigma, minutes))  # log(~10000 USD)
    rows = []
    for name, _, _, _, scale in EXCHANGES:
        # exchange-specific AR(1) premium plus its own microstructure noise
        prem = np.zeros(minutes)
        prem[0] = rng.normal(0.0, scale)
        for i in range(1, minutes):
            prem[i] = PHI * prem[i - 1] + rng.normal(0.0, scale * math.sqrt(1 - PHI**2))
        if name == "alpha":
            prem[200:225] -= 0.03  # alpha trades at a discount on day 2, 00:20-00:45
        noise = rng.normal(0.0, 0.0002, minutes)
        for i in range(minutes):
            if rng.random() < 0.02:  # occasional missing snapshot
                continue
            ts = start + np.timedelta64(i, "m") + np.timedelta64(int(rng.integers(0, 20)), "s")
            mid = math.exp(efficient[i] + prem[i] + noise[i])
            half = mid * 0.0001 * (1 + rng.random())
            bid, ask = round(mid - half, 2), round(mid + half, 2)
            if ask <= bid:
                ask = round(bid + 0.01, 2)
            for k in range(LEVELS):
                step = round(mid * 0.0002 * (k + rng.random()), 2) + 0.01 * k
                bp = round(bid - step, 2)
                ap = round(ask + step, 2)
                rows.append((name, iso(ts), "bid", k + 1, f"{bp:.2f}", f"{rng.uniform(0.05, 2.0):.4f}"))
                rows.append((name, iso(ts), "ask", k + 1, f"{ap:.2f}", f"{rng.uniform(0.05, 2.0):.4f}"))
    rows.sort(key=lambda r: (r[1], r[0], r[2], r[3]))
    with open(out / "orderbooks.csv", "w") as f:
        f.write("exchange,timestamp,side,level,price,quantity\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


def chain(rng, out):
    # blocks: exponential inter-arrival, mean 9.7 minutes, over both days
    heights, stamps = [], []
    t = DAY1 - np.timedelta64(2, "h")
    h = 556000
    while t < DAY2 + np.timedelta64(1, "D"):
        heights.append(h)
        stamps.append(t)
        h += 1
        t = t + np.timedelta64(max(1, int(rng.exponential(9.7 * 60))), "s")
    with open(out / "blocks.csv", "w") as f:
        f.write("height,timestamp\n")
        for hh, ss in zip(heights, stamps):
            f.write(f"{hh},{iso(ss)}\n")

    # transactions from the gamma duration model with fee and log-mempool covariates
    alpha, theta = 0.62, np.array([1.19, -0.22, 0.31])
    rows = []
    for day, n in ((DAY1, 400), (DAY2, 200)):
        for i in range(n):
            ann = day + np.timedelta64(int(rng.integers(0, 86400)), "s") - np.timedelta64(30, "m")
            fee = float(np.exp(rng.normal(math.log(14.06), 1.2)))
            mem = float(np.exp(rng.normal(math.log(4503.5), 0.8)))
            x = np.array([1.0, math.log1p(fee), math.log(mem)])
            scale = math.exp(x @ theta)  # 1 / rate
            tau = rng.gamma(alpha, scale)
            inc = ann + np.timedelta64(max(1, int(round(tau * 60))), "s")
            rows.append((f"tx{len(rows):05d}", iso(ann), iso(inc), f"{fee:.3f}", int(rng.integers(150, 600)), int(round(mem))))
    rows.sort(key=lambda r: (r[2], r[0]))
    with open(out / "transactions.csv", "w") as f:
        f.write("tx_id,announce_time,inclusion_time,fee_per_byte,size,mempool_size\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


def profiles(out):
    doc = {
        "exchanges": [
            {"exchange": n, "taker_fee": fee, "withdrawal_fee": wd, "confirmations": b, "margin": False, "business": n == "alpha"}
            for n, fee, wd, b, _ in EXCHANGES
        ]
    }
    (out / "profiles.json").write_text(json.dumps(doc, indent=2) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--seed", type=int, default=20190102)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    books(rng, args.out)
    chain(rng, args.out)
    profiles(args.out)


if __name__ == "__main__":
    main()
