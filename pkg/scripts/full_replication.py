"""Long-running replication of the low-FER comparison (not part of CI).

Sweeps 10..19 dB until 200 coherent-arm errors or 1e6 frames per point,
with both the 15-iteration and 100-iteration BP references for the pilot-only
receiver. Budget many core-hours; intended for a workstation, not the
test suite.
"""

import argparse
import dataclasses

from lctsim.harness import ExperimentConfig, run_sweep, write_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--out", default="full_replication.csv")
    args = ap.parse_args()

    records = []
    base = dict(
        snr_db=tuple(float(s) for s in range(10, 20)),
        max_frames=1_000_000,
        target_errors=200,
        seed=11,
        threads=args.threads,
    )
    cfg = ExperimentConfig(
        schemes=("perfect", "pat", "lct", "lct_u", "lct_ua"), bp_max_iters=15, **base
    )
    records.extend(run_sweep(cfg, progress=True))
    # pilot-only reference with the larger decoder budget
    cfg100 = ExperimentConfig(schemes=("pat",), bp_max_iters=100, **base)
    for rec in run_sweep(cfg100, progress=True):
        records.append(dataclasses.replace(rec, scheme="pat_r100"))
    write_csv(records, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
