#!/usr/bin/env python3
"""Regenerates data/purchase_card_sample.csv.

The sample is synthetic: one cardholder travelling a long fixed circuit of
states with occasional detours, with log-amounts following a weekly AR
pattern. A handful of malformed rows exercise the ingestion filters.
"""
import argparse
import csv
import datetime
import math
import random

STATES = [
    "OK", "TX", "KS", "MO", "AR", "LA", "MS", "AL", "TN", "KY",
    "IN", "IL", "IA", "NE", "SD", "ND", "MN", "WI", "MI", "OH",
    "PA", "NY", "NJ", "CT", "MA", "VT", "NH", "ME", "RI", "DE",
    "MD", "VA", "WV", "NC", "SC", "GA", "FL", "CO", "NM", "AZ",
    "UT", "NV", "CA", "OR", "WA", "ID", "MT", "WY", "AK", "HI",
    "DC", "ON", "QC", "BC", "AB", "MB", "SK", "NS", "NB", "NL",
]
VENDORS = ["OFFICE DEPOT", "WAL-MART", "AMAZON MKTPLACE", "HOME DEPOT", "DELL",
           "GRAINGER", "LOWES", "STAPLES", "FEDEX", "SAMS CLUB"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/purchase_card_sample.csv")
    ap.add_argument("--seed", type=int, default=20150119)
    ap.add_argument("--rows", type=int, default=240)
    ap.add_argument("--states", type=int, default=40)
    ap.add_argument("--sigma", type=float, default=0.30)
    ap.add_argument("--detour", type=float, default=0.06)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    mu, phi, sigma = math.log(120.0), 0.55, args.sigma
    logs = [mu + rng.gauss(0.0, sigma) for _ in range(5)]
    while len(logs) < args.rows:
        logs.append(mu + phi * (logs[-5] - mu) + rng.gauss(0.0, sigma))

    circuit = STATES[:args.states]
    states = []
    pos = 0
    for _ in range(args.rows):
        if rng.random() < args.detour:
            states.append(rng.choice(circuit))
        else:
            states.append(circuit[pos % len(circuit)])
            pos += 1

    day = datetime.date(2013, 7, 1)
    rows = []
    for i in range(args.rows):
        day += datetime.timedelta(days=rng.choice([0, 1, 1, 2]))
        amount = math.exp(logs[i])
        text = f"{amount:,.2f}"
        if rng.random() < 0.2:
            text = "$" + text
        rows.append([day.strftime("%m/%d/%Y"), "SMITH J", rng.choice(VENDORS), text, states[i]])

    # Rows the ingestion step must drop.
    bad = [
        ["07/15/2013", "SMITH J", "REFUND", "-45.10", "OK"],
        ["08/02/2013", "SMITH J", "WAL-MART", "0.00", "TX"],
        ["09/12/2013", "SMITH J", "STAPLES", "88.20", ""],
        ["10/01/2013", "SMITH J", "DELL", "", "KS"],
    ]
    for k, row in enumerate(bad):
        rows.insert(30 + 50 * k, row)

    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["Transaction Date", "Cardholder", "Vendor", "Transaction Amount",
                    "Vendor State/Province"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
