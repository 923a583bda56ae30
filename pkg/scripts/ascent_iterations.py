"""Average fine-tuning iteration count versus SNR (QPSK and 16-QAM).

Mirrors the iteration-count table setup: QPSK with 15 pilots over
10..19 dB, 16-QAM with 10 pilots over 19..28 dB, reporting the mean
number of outer ascent iterations of the cached-LLR receiver.
"""

import argparse

from lctsim.harness import ExperimentConfig, run_sweep


def measure(mod, n_pilot, snrs, frames, threads):
    cfg = ExperimentConfig(
        snr_db=snrs,
        schemes=("lct_ua",),
        modulation=mod,
        n_pilot=n_pilot,
        max_frames=frames,
        target_errors=10**9,
        seed=7,
        threads=threads,
    )
    for rec in run_sweep(cfg):
        print(f"{mod:6s} n_p={n_pilot:2d} snr={rec.snr_db:4.1f} dB  "
              f"avg_n1={rec.avg_n1:.2f}  avg_n2={rec.avg_n2:.0f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=2000, help="frames per SNR point")
    ap.add_argument("--threads", type=int, default=2)
    args = ap.parse_args()
    measure("qpsk", 15, (10.0, 13.0, 16.0, 19.0), args.frames, args.threads)
    measure("qam16", 10, (19.0, 22.0, 25.0, 28.0), args.frames, args.threads)


if __name__ == "__main__":
    main()
