#!/usr/bin/env python3
"""Quick verification script to re-check emitted path traces, value tables and JSON records.

Usage:
    python verify_results.py trace output/path.csv [--config FILE] [--mu 0.5 ...]
    python verify_results.py values output/value.csv [--config FILE ...]
    python verify_results.py same first.json second.json
"""

import argparse
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from utils.model import posterior_mean_array
from utils.run_config import add_config_arguments, config_from_args
from utils.table_io import load_record, load_table, records_match
from utils.value_functions import ValueContext

TRACE_TOL = 1e-12
VALUE_TOL = 1e-9


def banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(title)
    print("=" * 70)


def check_trace(df: pd.DataFrame, args: argparse.Namespace) -> bool:
    """Recompute m from x row by row and compare."""
    params = config_from_args(args).params
    banner("PATH TRACE CHECK")
    print(f"\nRows: {len(df)}")
    print(f"Columns: {', '.join(df.columns.tolist())}")

    expected = posterior_mean_array(params, df["x"].to_numpy())
    gap = float(np.max(np.abs(expected - df["m"].to_numpy()), initial=0.0))
    steps = np.diff(df["t"].to_numpy())
    even = bool(steps.size == 0 or np.allclose(steps, steps[0]))
    decisions_ok = bool(df["d"].isin([-1, 0, 1]).all())

    print(f"Max |m - posterior(x)|: {gap:.3e}")
    print(f"Even time grid: {'YES' if even else 'NO'}")
    print(f"Decisions in {{-1, 0, 1}}: {'YES' if decisions_ok else 'NO'}")
    return gap <= TRACE_TOL and even and decisions_ok


def check_values(df: pd.DataFrame, args: argparse.Namespace) -> bool:
    """Symmetry of V, agreement of V with U outside (-A, A) and V(0) = K."""
    th = ValueContext.from_params(config_from_args(args).params).thresholds
    banner("VALUE TABLE CHECK")
    print(f"\nRows: {len(df)}, A = {th.a:.6f}, K = {th.k:.6f}")

    x, v = df["x"].to_numpy(), df["V"].to_numpy()
    by_x = pd.Series(v, index=np.round(x, 12))
    mirrored = by_x.reindex(np.round(-x, 12)).to_numpy()
    paired = ~np.isnan(mirrored)
    symmetry = float(np.max(np.abs(v[paired] - mirrored[paired]), initial=0.0))

    right, left = x >= th.a, x <= -th.a
    fit = max(float(np.max(np.abs(v[right] - df["U_plus"].to_numpy()[right]), initial=0.0)),
              float(np.max(np.abs(v[left] - df["U_minus"].to_numpy()[left]), initial=0.0)))

    zero = df.loc[df["x"] == 0.0, "V"]
    centre = float(abs(zero.iloc[0] - th.k)) if len(zero) else 0.0

    print(f"Symmetric pairs checked: {int(paired.sum())}, max |V(x) - V(-x)|: {symmetry:.3e}")
    print(f"Max |V - U| outside (-A, A): {fit:.3e}")
    print(f"|V(0) - K|: {centre:.3e}" if len(zero) else "x = 0 not on the grid")
    return max(symmetry, fit, centre) <= VALUE_TOL


def check_same(first: str, second: str) -> bool:
    banner("JSON RECORD COMPARISON")
    same = records_match(load_record(first), load_record(second))
    print(f"\n{first}\n{second}")
    print(f"Identical apart from the timestamp: {'YES' if same else 'NO'}")
    return same


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Re-check emitted artifacts")
    subparsers = parser.add_subparsers(dest="check", required=True)
    for name in ("trace", "values"):
        sub = subparsers.add_parser(name)
        sub.add_argument("table", help="CSV or XLSX file")
        add_config_arguments(sub)
    same = subparsers.add_parser("same")
    same.add_argument("first")
    same.add_argument("second")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.check == "same":
        ok = check_same(args.first, args.second)
    elif args.check == "trace":
        ok = check_trace(load_table(args.table), args)
    else:
        ok = check_values(load_table(args.table), args)

    print("\n" + "=" * 70)
    print(f"RESULT: {'OK' if ok else 'MISMATCH'}")
    print("=" * 70)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
