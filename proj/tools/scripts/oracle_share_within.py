#!/usr/bin/env python3
"""Independent recomputation of the share of positive price differences within their bounds.

Reads the raw fixture (not the pipeline artifacts), re-derives spot volatility, the walk-forward gamma
duration model, block-time moments, CRRA bounds and the continuous optimal quantity per exchange pair,
then writes the per-gamma counts as JSON. With --bounds it also compares against a pipeline bounds CSV.
"""

import argparse
import csv
import json
import math
from collections import defaultdict
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np
from scipy import optimize, special

MIN_PER_DAY = 1440


def epoch(ts):
    ts = ts.replace(" ", "T").rstrip("Z")
    return int(datetime.fromisoformat(ts).replace(tzinfo=timezone.utc).timestamp())


def day_number(text):
    return (date.fromisoformat(text) - date(1970, 1, 1)).days


def load_books(path):
    snaps = defaultdict(lambda: {"bid": [], "ask": []})
    with open(path) as f:
        for r in csv.DictReader(f):
            snaps[(r["exchange"], epoch(r["timestamp"]))][r["side"]].append((int(r["level"]), float(r["price"]), float(r["quantity"])))
    minutes = defaultdict(dict)  # minute -> exchange -> (ts, bids, asks)
    for (ex, ts), s in snaps.items():
        bids = [(p, q) for _, p, q in sorted(s["bid"])]
        asks = [(p, q) for _, p, q in sorted(s["ask"])]
        m = -((-ts) // 60)
        cur = minutes[m].get(ex)
        if cur is None or cur[0] <= ts:
            minutes[m][ex] = (ts, bids, asks)
    return minutes


def bid_series(minutes):
    pts = defaultdict(dict)
    for m, per in minutes.items():
        for ex, (_, bids, _) in per.items():
            pts[ex][m] = math.log(bids[0][0])
    out = {}
    for ex, p in pts.items():
        first, last = min(p), max(p)
        arr = np.full(last - first + 1, np.nan)
        for m, v in p.items():
            arr[m - first] = v
        out[ex] = (first, arr)
    return out


def estimate(r2, t, h, min_lag):
    lags = math.ceil(5 * h)
    num = den = 0.0
    for j in range(min_lag, min(lags, t) + 1):
        v = r2[t - j]
        if np.isnan(v):
            continue
        w = math.exp(-(j * j) / (2 * h * h))
        num += w * v
        den += w
    return num / den if den > 0 else np.nan


def spot_vol(series, day, grid, default_h):
    first, lb = series
    r2 = np.full(len(lb), np.nan)
    r2[1:] = np.diff(lb) ** 2
    grid = sorted(grid)

    def rng(d):
        start = d * MIN_PER_DAY - first
        return min(max(start, 0), len(lb)), min(max(start + MIN_PER_DAY, 0), len(lb))

    lo, hi = rng(day - 1)
    ise = [0.0] * len(grid)
    used = 0
    for l in range(lo, hi):
        if np.isnan(r2[l]):
            continue
        est = [estimate(r2, l, h, 1) for h in grid]
        if any(np.isnan(e) for e in est):
            continue
        for k, e in enumerate(est):
            ise[k] += (r2[l] - e) ** 2
        used += 1
    h = default_h
    if used:
        best = math.inf
        for k, v in enumerate(ise):
            if v <= best:
                best, h = v, grid[k]
    lo, hi = rng(day)
    out = {}
    for t in range(lo, hi):
        v = estimate(r2, t, h, 0)
        if not np.isnan(v):
            out[first + t] = math.sqrt(v)
    return out


def trim(sig, p):
    pos = np.array(sorted(v for v in sig.values() if v > 0))
    lo, hi = np.quantile(pos, p), np.quantile(pos, 1 - p)
    return {m: v for m, v in sig.items() if v > 0 and lo <= v <= hi}


def fit_gamma(tau, X):
    n = len(tau)
    logt = np.log(tau)

    def nll(params):
        theta, la = params[:-1], params[-1]
        a = math.exp(la)
        eta = X @ theta
        z = tau * np.exp(-eta)
        ll = (a - 1) * logt - a * eta - z - special.gammaln(a)
        g_theta = X.T @ (z - a)
        g_la = a * np.sum(-eta + logt - special.digamma(a))
        return -ll.sum() / n, -np.append(g_theta, g_la) / n

    beta0 = np.linalg.lstsq(X, logt, rcond=None)[0]
    x0 = np.append(beta0, 0.0)
    res = optimize.minimize(nll, x0, jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 10000})
    # Newton polish with a finite-difference Hessian of the analytic gradient
    p = res.x
    for _ in range(5):
        g = nll(p)[1]
        H = np.empty((len(p), len(p)))
        for i in range(len(p)):
            e = np.zeros(len(p))
            e[i] = 1e-6
            H[:, i] = (nll(p + e)[1] - nll(p - e)[1]) / 2e-6
        p = p - np.linalg.solve(H, g)
    return p[:-1], math.exp(p[-1])


def crra_bound(sigma, g, m1, m2):
    return 0.5 * sigma * math.sqrt(g * m1 + math.sqrt(g * g * m1 * m1 + 2 * g * (g + 1) * (g + 2) * m2))


def notional(levels, q):
    left, total = q, 0.0
    for p, qty in levels:
        take = min(left, qty)
        total += take * p
        left -= take
        if left <= 1e-12:
            return total
    raise ValueError("insufficient depth")


def best_delta(buy, sell, fee_b, fee_s, withdrawal):
    asks, bids = buy[2], sell[1]
    q_min = min(min(q for _, q in asks), min(q for _, q in bids))
    q_max = min(sum(q for _, q in asks), sum(q for _, q in bids))
    cands = {q_min, q_max}
    for lv in (asks, bids):
        c = 0.0
        for _, q in lv:
            c += q
            if c <= q_max:
                cands.add(c)
    best, best_q, best_d = -math.inf, 0.0, 0.0
    for q in sorted(cands):
        proceeds = notional(bids, q) * (1 - fee_s)
        cost = notional(asks, q) * (1 + fee_b)
        if proceeds - cost > best:
            best, best_q, best_d = proceeds - cost, q, math.log(proceeds / cost)
    if best <= 0 or best_q <= withdrawal:
        return 0.0
    return max(0.0, best_d)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, required=True)
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--bounds", type=Path, help="pipeline bounds.csv to cross-check")
    args = ap.parse_args()
    cfg = json.loads(args.config.read_text())
    base = args.config.parent
    inputs = {k: base / v for k, v in cfg["inputs"].items()}
    gammas = [float(g) for g in cfg.get("gamma", [2.0])]
    grid = cfg.get("bandwidth_grid", [5, 10, 20, 30, 60, 120, 240])
    d_from, d_to = day_number(cfg["from"]), day_number(cfg["to"])

    profiles = {p["exchange"]: p for p in json.loads(inputs["profiles"].read_text())["exchanges"]}
    names = sorted(profiles)
    minutes = load_books(inputs["orderbooks"])
    series = bid_series(minutes)

    txs = []
    with open(inputs["transactions"]) as f:
        for r in csv.DictReader(f):
            txs.append((epoch(r["announce_time"]), r["tx_id"], epoch(r["inclusion_time"]), float(r["fee_per_byte"]), float(r["mempool_size"])))
    txs.sort()
    blocks = []
    with open(inputs["blocks"]) as f:
        for r in csv.DictReader(f):
            blocks.append((int(r["height"]), epoch(r["timestamp"])))
    blocks.sort()

    bounds = {}  # (minute, exchange) -> {gamma: d}
    for day in range(d_from, d_to + 1):
        lo, hi = (day - 1) * 86400, day * 86400
        fit = [t for t in txs if lo <= t[2] < hi]
        tau = np.array([(t[2] - t[0]) / 60.0 for t in fit])
        X = np.column_stack([np.ones(len(fit)), np.log1p([t[3] for t in fit]), np.log([t[4] for t in fit])])
        theta, alpha = fit_gamma(tau, X)
        fee = cfg.get("fee_per_byte") or float(np.median([t[3] for t in fit]))
        mem_default = float(np.median([t[4] for t in fit]))
        prior = [b for b in blocks if b[1] < day * 86400]
        gaps = [(b[1] - a[1]) / 60.0 for a, b in zip(prior, prior[1:]) if b[0] == a[0] + 1]
        eb, vb = float(np.mean(gaps)), float(np.var(gaps, ddof=1))
        announce = [t[0] for t in txs]
        for ex in names:
            if ex not in series:
                continue
            sig = trim(spot_vol(series[ex], day, grid, cfg.get("default_bandwidth", 60.0)), cfg.get("trim", 0.01))
            B = profiles[ex]["confirmations"] or 3
            for m, s in sig.items():
                k = np.searchsorted(announce, m * 60, side="right")
                mem = txs[k - 1][4] if k > 0 else mem_default
                eta = theta @ np.array([1.0, math.log1p(fee), math.log(mem)])
                e, v = alpha * math.exp(eta), alpha * math.exp(2 * eta)
                m1 = e + eb * (B - 1)
                m2 = v + vb * (B - 1) ** 2 + (eb * (B - 1) + e) ** 2
                bounds[(m, ex)] = {g: crra_bound(s, g, m1, m2) for g in gammas}

    counts = {g: [0, 0] for g in gammas}
    margin = math.inf
    for m in sorted(minutes):
        if not (d_from <= m // MIN_PER_DAY <= d_to) or len(minutes[m]) < 2:
            continue
        per = minutes[m]
        for sell in names:
            for buy in names:
                if sell == buy or sell not in per or buy not in per or (m, sell) not in bounds:
                    continue
                wd = profiles[buy]["withdrawal_fee"] or 0.0
                delta = best_delta(per[buy], per[sell], profiles[buy]["taker_fee"], profiles[sell]["taker_fee"], wd)
                if delta <= 0:
                    continue
                for g in gammas:
                    d = bounds[(m, sell)][g]
                    counts[g][0] += 1
                    counts[g][1] += delta <= d
                    margin = min(margin, abs(delta - d) / d)

    result = {
        "gammas": [
            {"gamma": g, "positive": counts[g][0], "within": counts[g][1], "share": counts[g][1] / counts[g][0] if counts[g][0] else None}
            for g in gammas
        ],
        "min_relative_margin": margin,
    }
    args.out.write_text(json.dumps(result, indent=2) + "\n")

    if args.bounds:
        worst = 0.0
        with open(args.bounds) as f:
            for r in csv.DictReader(f):
                m = epoch(r["timestamp"]) // 60
                mine = bounds[(m, r["sell_exchange"])][float(r["gamma"])] * 1e4
                worst = max(worst, abs(mine - float(r["bound_bp"])) / mine)
        print(f"bounds cross-check: max relative difference {worst:.3e}")
        if worst > 1e-6:
            raise SystemExit("bounds differ from the pipeline output")
    print(json.dumps(result))


if __name__ == "__main__":
    main()
