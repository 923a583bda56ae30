"""Link-level Monte Carlo simulator for LDPC-coded MIMO transmission.

Receiver chain: LMMSE pilot estimation, max-log MIMO detection, belief
propagation decoding, and a parity-check-satisfaction metric that is
maximized over channel-matrix perturbations by coordinate ascent.
"""

from lctsim.channel import SystemConfig, make_pilots, sample_channel, snr_db_to_noise_var, transmit
from lctsim.detector import DetectionCache, advance_cache, approx_llrs, max_log_detect
from lctsim.estimator import AscentParams, AscentStats, check_metric, coordinate_ascent, lmmse
from lctsim.harness import ExperimentConfig, SweepRecord, run_sweep, run_trial, write_csv
from lctsim.ldpc import (
    BpConfig,
    ParityCheckMatrix,
    SystematicEncoder,
    bp_decode,
    build_encoder,
    load_parity_alist,
    syndrome_ok,
)
from lctsim.modem import (
    Interleaver,
    ModulationScheme,
    VectorAlphabet,
    build_vector_alphabet,
    make_interleaver,
    modulate,
)

__all__ = [
    "AscentParams",
    "AscentStats",
    "BpConfig",
    "DetectionCache",
    "ExperimentConfig",
    "Interleaver",
    "ModulationScheme",
    "ParityCheckMatrix",
    "SweepRecord",
    "SystemConfig",
    "SystematicEncoder",
    "VectorAlphabet",
    "advance_cache",
    "approx_llrs",
    "bp_decode",
    "build_encoder",
    "build_vector_alphabet",
    "check_metric",
    "coordinate_ascent",
    "lmmse",
    "load_parity_alist",
    "make_interleaver",
    "make_pilots",
    "max_log_detect",
    "modulate",
    "run_sweep",
    "run_trial",
    "sample_channel",
    "snr_db_to_noise_var",
    "syndrome_ok",
    "transmit",
    "write_csv",
]
