#!/usr/bin/env python3
"""Run the built-in squaring experiment over a family of barriers.

For each barrier the same-barrier disagreement between (assigned value)^2 and
the assigned value of the squared operator is exactly 1/2, and the repaired
barrier drives it to exactly 0.
"""

import argparse

from qcs.harness import ExperimentConfig, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", help="optional JSON report path for the identity run")
    args = parser.parse_args()

    barriers = [
        ("identity", {"kind": "identity"}),
        ("rotation 1/3", {"kind": "rotation", "c": "1/3"}),
        ("rotation 3/8", {"kind": "rotation", "c": "3/8"}),
        ("expanding 2", {"kind": "expanding", "k": 2}),
        (
            "exchange (1/2,1/3,1/6)",
            {"kind": "interval_exchange", "lengths": ["1/2", "1/3", "1/6"], "perm": [2, 0, 1]},
        ),
    ]
    print(f"{'barrier':28s} {'disagreement':>14s} {'repaired':>10s} {'shift match':>12s}")
    for name, spec in barriers:
        report = run_experiment(
            ExperimentConfig.from_json({"kind": "example4", "barrier": spec})
        )
        res = report.results
        print(
            f"{name:28s} {res['disagreement_exact']:>14s} "
            f"{res['repaired_disagreement_exact']:>10s} {str(res['repair_equals_shift_ae']):>12s}"
        )
    if args.out:
        from qcs.harness import emit_report

        report = run_experiment(ExperimentConfig.from_json({"kind": "example4"}))
        emit_report(report, "json", args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
