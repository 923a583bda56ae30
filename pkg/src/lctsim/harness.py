"""Seeded Monte Carlo FER sweeps over receiver schemes, with CSV output.

Every trial draws one frame (info bits, channel, noise) and lets each
requested scheme decode the same received signal: "perfect" detects with
the true channel, "pat" with the pilot LMMSE estimate, and the lct
variants refine that estimate by coordinate ascent before detecting.
A frame error is any mismatch between decoded and transmitted info bits.

Trials are independent and seeded as (master seed, snr index, trial
index), so results are reproducible for any thread count; stopping
decisions are taken on whole batches of fixed size to keep the stop
point deterministic as well.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from lctsim.channel import make_pilots, sample_channel, snr_db_to_noise_var, transmit
from lctsim.detector import max_log_detect
from lctsim.estimator import AscentParams, coordinate_ascent, lmmse
from lctsim.ldpc import BpConfig, bp_decode, build_encoder, load_parity_alist
from lctsim.modem import build_vector_alphabet, make_interleaver, modulate, scheme_by_name
from lctsim.wimax import bundled_alist_path

SCHEMES = ("perfect", "pat", "lct", "lct_u", "lct_ua")

_VARIANT_OF = {"lct": "no_update", "lct_u": "update", "lct_ua": "update_approx"}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved sweep settings (one object drives one run_sweep call)."""

    snr_db: tuple = (10.0, 13.0, 16.0)
    schemes: tuple = ("perfect", "pat", "lct_ua")
    code_path: str | None = None  # None -> bundled (192, 96) code
    modulation: str = "qpsk"
    n_tx: int = 2
    n_rx: int = 2
    n_pilot: int = 15
    bp_max_iters: int = 15
    step_scale: float = 1.0
    grid_halfwidth: int = 4
    eps: float = 1e-9
    max_outer: int = 10
    max_frames: int = 1_000_000
    target_errors: int = 200
    seed: int = 0
    threads: int = 1
    noise_off: bool = False
    batch_frames: int = 512

    def __post_init__(self):
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ValueError(f"unknown schemes {unknown}; choose from {SCHEMES}")
        if not self.snr_db:
            raise ValueError("at least one SNR point is required")
        if self.max_frames < 1 or self.target_errors < 1 or self.batch_frames < 1:
            raise ValueError("max_frames, target_errors and batch_frames must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True)
class TrialOutcome:
    """One scheme's result on one frame."""

    success: bool
    n_outer: int
    n_metric_evals: int
    bp_iters: int


@dataclass(frozen=True)
class SweepRecord:
    """Aggregated statistics for one (snr, scheme) cell."""

    snr_db: float
    scheme: str
    frames: int
    frame_errors: int
    fer: float
    avg_n1: float
    avg_n2: float
    avg_bp_iters: float
    wall_s: float


class RunContext:
    """Immutable per-run state shared by every trial (code, tables, pilots)."""

    def __init__(self, cfg: ExperimentConfig):
        self.scheme_mod = scheme_by_name(cfg.modulation)
        path = Path(cfg.code_path) if cfg.code_path else bundled_alist_path()
        self.pcm = load_parity_alist(path.read_text())
        self.encoder = build_encoder(self.pcm)
        k = self.scheme_mod.bits_per_symbol
        if self.pcm.n_cols % (cfg.n_tx * k) != 0:
            raise ValueError(
                f"code length {self.pcm.n_cols} not divisible by n_tx*k = {cfg.n_tx * k}"
            )
        self.n_data = self.pcm.n_cols // (cfg.n_tx * k)
        self.interleaver = make_interleaver(cfg.seed, self.pcm.n_cols)
        inv = np.argsort(self.interleaver.permutation)
        # checks relabeled to detector (interleaved) bit order for the ascent
        self.pcm_detector_order = self.pcm.relabel_columns(inv)
        self.va = build_vector_alphabet(self.scheme_mod, cfg.n_tx)
        self.x_p = make_pilots(cfg.n_pilot, cfg.n_tx, self.scheme_mod)
        self.bp_cfg = BpConfig(max_iters=cfg.bp_max_iters)
        self.ascent_params = {
            name: AscentParams(
                step_scale=cfg.step_scale,
                grid_halfwidth=cfg.grid_halfwidth,
                eps=cfg.eps,
                max_outer=cfg.max_outer,
                variant=variant,
            )
            for name, variant in _VARIANT_OF.items()
        }


def run_trial(
    cfg: ExperimentConfig,
    snr_index: int,
    trial_index: int,
    ctx: RunContext | None = None,
) -> dict:
    """Run one frame through every requested scheme.

    The trial RNG is seeded with (cfg.seed, snr_index, trial_index) and
    draws, in order: info bits, the channel matrix, then the noise inside
    transmit. All schemes decode the same received frame.
    """
    if ctx is None:
        ctx = RunContext(cfg)
    cfg_snr = cfg.snr_db[snr_index]
    noise_var = snr_db_to_noise_var(cfg_snr, cfg.n_tx, cfg.n_rx)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, snr_index, trial_index)))

    u = rng.integers(0, 2, ctx.encoder.n_info).astype(np.uint8)
    coded = ctx.encoder.encode(u)
    x_d = modulate(ctx.interleaver.apply(coded), ctx.scheme_mod, cfg.n_tx)
    h = sample_channel(rng, cfg.n_rx, cfg.n_tx)
    x = np.hstack([ctx.x_p, x_d])
    y = transmit(x, h, noise_var, rng, add_noise=not cfg.noise_off)
    y_p, y_d = y[:, : cfg.n_pilot], y[:, cfg.n_pilot :]

    h_pilot = None
    outcomes = {}
    for name in cfg.schemes:
        n_outer = 0
        n_evals = 0
        if name == "perfect":
            h_use = h
        else:
            if h_pilot is None:
                h_pilot = lmmse(y_p, ctx.x_p, noise_var)
            if name == "pat":
                h_use = h_pilot
            else:
                h_use, stats = coordinate_ascent(
                    y_d, h_pilot, ctx.pcm_detector_order, ctx.va,
                    noise_var, cfg.n_pilot, ctx.ascent_params[name],
                )
                n_outer, n_evals = stats.n_outer, stats.n_metric_evals
        llrs_det, _ = max_log_detect(y_d, h_use, noise_var, ctx.va)
        hard, _, iters = bp_decode(ctx.pcm, ctx.interleaver.invert(llrs_det), ctx.bp_cfg)
        success = bool(np.array_equal(ctx.encoder.extract_info(hard), u))
        outcomes[name] = TrialOutcome(success, n_outer, n_evals, iters)
    return outcomes


# Per-process state for pool workers (inherited via fork, or rebuilt lazily).
_WORKER_CFG: ExperimentConfig | None = None
_WORKER_CTX: RunContext | None = None


def _chunk_task(args):
    snr_index, start, stop = args
    global _WORKER_CTX
    cfg = _WORKER_CFG
    if _WORKER_CTX is None:
        _WORKER_CTX = RunContext(cfg)
    sums = {name: [0, 0, 0, 0, 0] for name in cfg.schemes}
    for trial in range(start, stop):
        outcomes = run_trial(cfg, snr_index, trial, _WORKER_CTX)
        for name, out in outcomes.items():
            s = sums[name]
            s[0] += 1
            s[1] += 0 if out.success else 1
            s[2] += out.n_outer
            s[3] += out.n_metric_evals
            s[4] += out.bp_iters
    return sums


def _set_worker_state(cfg: ExperimentConfig, ctx: RunContext):
    global _WORKER_CFG, _WORKER_CTX
    _WORKER_CFG = cfg
    _WORKER_CTX = ctx


def run_sweep(cfg: ExperimentConfig, progress: bool = False) -> list[SweepRecord]:
    """Run every SNR point until target_errors on the stopping arm or max_frames.

    The stopping arm is "perfect" when enabled, otherwise the first listed
    scheme (errors on the coherent baseline are the protocol's clock).
    Results are identical for any cfg.threads value.
    """
    ctx = RunContext(cfg)
    stop_scheme = "perfect" if "perfect" in cfg.schemes else cfg.schemes[0]
    # Compile the numba kernels before forking so workers inherit them.
    run_trial(cfg, 0, cfg.max_frames + 1, ctx)
    _set_worker_state(cfg, ctx)

    pool = None
    if cfg.threads > 1:
        pool = ProcessPoolExecutor(
            max_workers=cfg.threads, mp_context=get_context("fork")
        )
    records = []
    try:
        for snr_index, snr in enumerate(cfg.snr_db):
            t0 = time.perf_counter()
            sums = {name: [0, 0, 0, 0, 0] for name in cfg.schemes}
            cursor = 0
            while cursor < cfg.max_frames and sums[stop_scheme][1] < cfg.target_errors:
                batch_end = min(cursor + cfg.batch_frames, cfg.max_frames)
                bounds = np.linspace(cursor, batch_end, cfg.threads + 1).astype(int)
                chunks = [
                    (snr_index, int(a), int(b))
                    for a, b in zip(bounds[:-1], bounds[1:])
                    if b > a
                ]
                if pool is None:
                    partials = [_chunk_task(c) for c in chunks]
                else:
                    partials = list(pool.map(_chunk_task, chunks))
                for part in partials:
                    for name, vals in part.items():
                        for k in range(5):
                            sums[name][k] += vals[k]
                cursor = batch_end
                if progress:
                    err = sums[stop_scheme][1]
                    print(
                        f"  snr {snr:g} dB: {cursor} frames, "
                        f"{err} errors on {stop_scheme}",
                        file=sys.stderr,
                    )
            wall = time.perf_counter() - t0
            for name in cfg.schemes:
                frames, errors, n1, n2, bp = sums[name]
                records.append(
                    SweepRecord(
                        snr_db=snr,
                        scheme=name,
                        frames=frames,
                        frame_errors=errors,
                        fer=errors / frames if frames else 0.0,
                        avg_n1=n1 / frames if frames else 0.0,
                        avg_n2=n2 / frames if frames else 0.0,
                        avg_bp_iters=bp / frames if frames else 0.0,
                        wall_s=wall,
                    )
                )
    finally:
        if pool is not None:
            pool.shutdown()
    return records


CSV_HEADER = "snr_db,scheme,frames,frame_errors,fer,avg_n1,avg_n2,avg_bp_iters,wall_s"


def write_csv(records, path) -> None:
    """Write sweep records with floats at 6 significant digits."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            f"{r.snr_db:.6g},{r.scheme},{r.frames},{r.frame_errors},"
            f"{r.fer:.6g},{r.avg_n1:.6g},{r.avg_n2:.6g},{r.avg_bp_iters:.6g},"
            f"{r.wall_s:.6g}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(cfg: ExperimentConfig, ctx: RunContext, path) -> None:
    """Echo the fully resolved configuration next to the CSV."""
    code = cfg.code_path or str(bundled_alist_path())
    lines = [
        f"code = {code}",
        f"code_dims = N={ctx.pcm.n_cols} M={ctx.pcm.n_rows} K={ctx.encoder.n_info}",
        f"modulation = {cfg.modulation}",
        f"n_tx = {cfg.n_tx}",
        f"n_rx = {cfg.n_rx}",
        f"n_pilot = {cfg.n_pilot}",
        f"n_data = {ctx.n_data}",
        f"snr_db = {','.join(f'{s:g}' for s in cfg.snr_db)}",
        f"schemes = {','.join(cfg.schemes)}",
        f"bp_max_iters = {cfg.bp_max_iters}",
        f"step_scale = {cfg.step_scale:g}",
        f"grid_halfwidth = {cfg.grid_halfwidth}",
        f"eps = {cfg.eps:g}",
        f"max_outer = {cfg.max_outer}",
        f"max_frames = {cfg.max_frames}",
        f"target_errors = {cfg.target_errors}",
        f"seed = {cfg.seed}",
        f"threads = {cfg.threads}",
        f"noise_off = {cfg.noise_off}",
        f"batch_frames = {cfg.batch_frames}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def parse_snr_grid(text: str) -> tuple:
    """Parse 'start:step:stop' (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad SNR range {text!r}, expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        if n < 1:
            raise ValueError(f"empty SNR range {text!r}")
        return tuple(start + i * step for i in range(n))
    return tuple(float(p) for p in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lctsim",
        description="Monte Carlo FER sweep for LDPC-coded MIMO receivers.",
    )
    p.add_argument("--code", default=None, help="alist file (default: bundled 192x96 code)")
    p.add_argument("--mod", default="qpsk", choices=["qpsk", "qam16"])
    p.add_argument("--nt", type=int, default=2, help="transmit antennas")
    p.add_argument("--nr", type=int, default=2, help="receive antennas")
    p.add_argument("--np", type=int, default=15, dest="n_pilot", help="pilot symbols")
    p.add_argument("--snr", default="10:3:19", help="dB grid: start:step:stop or comma list")
    p.add_argument("--scheme", default="perfect,pat,lct_ua", help="comma list of schemes")
    p.add_argument("--bp-iters", type=int, default=15, help="BP iteration cap")
    p.add_argument("--b", type=float, default=1.0, dest="step_scale", help="grid step scale")
    p.add_argument("--grid", type=int, default=4, help="grid points per side per axis")
    p.add_argument("--eps", type=float, default=1e-9, help="ascent stop threshold")
    p.add_argument("--max-outer", type=int, default=10, help="ascent iteration cap")
    p.add_argument("--max-frames", type=int, default=1_000_000)
    p.add_argument("--target-errors", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="results.csv", help="output CSV path")
    p.add_argument("--noise-off", action="store_true", help="disable AWGN (debug)")
    p.add_argument("--progress", action="store_true", help="log batch progress to stderr")
    return p


def cli_main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig(
            snr_db=parse_snr_grid(args.snr),
            schemes=tuple(s.strip() for s in args.scheme.split(",") if s.strip()),
            code_path=args.code,
            modulation=args.mod,
            n_tx=args.nt,
            n_rx=args.nr,
            n_pilot=args.n_pilot,
            bp_max_iters=args.bp_iters,
            step_scale=args.step_scale,
            grid_halfwidth=args.grid,
            eps=args.eps,
            max_outer=args.max_outer,
            max_frames=args.max_frames,
            target_errors=args.target_errors,
            seed=args.seed,
            threads=args.threads,
            noise_off=args.noise_off,
        )
        ctx = RunContext(cfg)
    except (ValueError, OSError) as exc:
        print(f"lctsim: {exc}", file=sys.stderr)
        return 2
    records = run_sweep(cfg, progress=args.progress)
    out = Path(args.out)
    try:
        write_csv(records, out)
        write_manifest(cfg, ctx, out.with_suffix(".manifest.txt"))
    except OSError as exc:
        print(f"lctsim: cannot write output: {exc}", file=sys.stderr)
        return 2
    for r in records:
        print(
            f"snr={r.snr_db:g} scheme={r.scheme} frames={r.frames} "
            f"errors={r.frame_errors} fer={r.fer:.4g}"
        )
    return 0
