"""Closed-form estimates and baselines for number-phase code performance.

These are cheap scalar formulas used to sanity-check and contextualize the
full density-matrix simulations: a factorial series for the residual
bit-flip (uncorrectable-shift) rate, an exponential floor for the
dephasing-limited phase error, and the fidelity of the trivial two-level
encoding that defines break-even.
"""

import math
from dataclasses import dataclass

from .errors import NumericalFailureError

__all__ = [
    "EstimateInputs",
    "bitflip_estimate",
    "dephasing_lower_bound",
    "breakeven_baseline",
]


@dataclass(frozen=True)
class EstimateInputs:
    """Scalar inputs shared by the closed-form estimates."""

    nbar: float
    Gamma: float
    d_N: int
    s: int
    kappa_t: float

    def __post_init__(self):
        if not 0.0 <= self.Gamma < 1.0:
            raise ValueError(f"Gamma must lie in [0, 1), got {self.Gamma}")
        if self.nbar <= 0:
            raise ValueError(f"nbar must be positive, got {self.nbar}")


def _poisson_term(x: float, k: int) -> float:
    """x^k e^{-x} / k! evaluated in log space to dodge overflow."""
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(x) - x - math.lgamma(k + 1))


def bitflip_estimate(nbar: float, Gamma: float, d_N: int, l_max: int = 3) -> float:
    """Residual logical bit-flip rate after correcting shifts below d_N.

    Sums 2 (nbar Gamma)^{l d_N} e^{-nbar Gamma} / (l d_N)! over
    l = 1 .. l_max: the probability of losing a full multiple of the shift
    distance, which the decoder mistakes for a smaller correctable loss.
    The first dropped term must stay below 1e-3 of the kept sum.
    """
    if l_max < 1:
        raise ValueError(f"l_max must be at least 1, got {l_max}")
    x = nbar * Gamma
    if x >= d_N:
        raise ValueError(
            f"series regime requires nbar*Gamma < d_N, got {x:.3f} >= {d_N}"
        )
    if x == 0.0:
        return 0.0
    kept = sum(2.0 * _poisson_term(x, l * d_N) for l in range(1, l_max + 1))
    dropped = 2.0 * _poisson_term(x, (l_max + 1) * d_N)
    if dropped >= 1e-3 * kept:
        raise NumericalFailureError(
            f"series truncated too early: next term {dropped:.3e} is not "
            f"small against the kept sum {kept:.3e}; raise l_max"
        )
    return kept


def dephasing_lower_bound(s: int, kappa_t: float) -> float:
    """Dephasing-limited floor of the logical phase-flip rate.

    The phase distance pi/s shrinks the usable window; a Gaussian spread of
    variance kappa_t leaking past pi/(2s) gives
    sqrt(8 pi s^2 kappa_t)/pi^2 * exp(-pi^2 / (8 s^2 kappa_t)),
    an order-of-magnitude floor valid for kappa_t << 1.
    """
    if kappa_t <= 0:
        raise ValueError(f"kappa_t must be positive, got {kappa_t}")
    if s < 1:
        raise ValueError(f"modular order s must be positive, got {s}")
    spread = 8.0 * s * s * kappa_t
    return math.sqrt(math.pi * spread) / math.pi**2 * math.exp(
        -math.pi**2 / spread
    )


def breakeven_baseline(gamma_t: float, kappa_t: float) -> float:
    """Entanglement fidelity of the bare |0>/|1> encoding with no recovery.

    Under loss exposure gamma_t and dephasing exposure kappa_t the two-level
    amplitude-damping + dephasing channel gives
    F = (1/4) (1 + (1-Gamma) + 2 sqrt(1-Gamma) e^{-kappa_t/2}) with
    Gamma = 1 - e^{-gamma_t}.  Codes must beat this to claim QEC gain.
    """
    if gamma_t < 0 or kappa_t < 0:
        raise ValueError("exposures must be non-negative")
    survive = math.exp(-gamma_t)
    return 0.25 * (
        1.0 + survive + 2.0 * math.sqrt(survive) * math.exp(-kappa_t / 2.0)
    )
