"""LLR arithmetic shared by the BP decoder and the check-satisfaction metric.

Sign convention project-wide: L = ln(P(bit=0) / P(bit=1)), so L > 0 favors 0.
"""

from __future__ import annotations

import numpy as np

# Default magnitude bound for LLRs fed into tanh/atanh. tanh(30/2) is still
# strictly below 1 in float64, so products of clamped inputs never saturate.
LLR_CLAMP = 30.0


def prob_zero(llr):
    """P(bit = 0) for an LLR, evaluated stably for large |llr|."""
    llr = np.asarray(llr, dtype=np.float64)
    out = np.empty_like(llr)
    pos = llr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-llr[pos]))
    ex = np.exp(llr[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def box_plus(a: float, b: float) -> float:
    """XOR-combine two LLRs: ln((1 + e^{a+b}) / (e^a + e^b)).

    Evaluated through logaddexp, independently of the tanh-product path, so
    it can serve as an oracle for the check-node rule.
    """
    return float(np.logaddexp(0.0, a + b) - np.logaddexp(a, b))


def tanh_product(llrs) -> float:
    """Check-node rule: 2 atanh(prod tanh(l/2)) over the incoming LLRs.

    Inputs are clamped to +-LLR_CLAMP so the product stays inside (-1, 1).
    """
    l = np.clip(np.asarray(llrs, dtype=np.float64), -LLR_CLAMP, LLR_CLAMP)
    return float(2.0 * np.arctanh(np.prod(np.tanh(0.5 * l))))


def chain_and(l_z: float, l_pi: float) -> float:
    """LLR of the AND of two independent satisfied-events.

    l' = l_z + l_pi - ln(1 + e^{l_z} + e^{l_pi}), with the log term
    max-shifted for stability.
    """
    m = max(0.0, l_z, l_pi)
    return l_z + l_pi - (m + np.log(np.exp(-m) + np.exp(l_z - m) + np.exp(l_pi - m)))
