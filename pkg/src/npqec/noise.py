"""Loss + dephasing channel on the truncated Fock space.

The generator is ``L rho = gamma_t D[a] rho + kappa_t D[n] rho`` with
``D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c)/2`` and both exposures
dimensionless.  Matrix elements of fixed coherence order d = n - m never mix:

    d rho_{n,m} = gamma sqrt((n+1)(m+1)) rho_{n+1,m+1}
                  - [gamma (n+m)/2 + kappa (n-m)^2 / 2] rho_{n,m},

so the exact channel is a family of small bidiagonal sector propagators
instead of one dim^2-dimensional superoperator exponential.  The channel is
exactly trace preserving on the truncation (loss never climbs the ladder).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DimensionError, NotCompletelyPositiveError
from .fock import FockOperator, PhaseGrid

EXPOSURE_WARN = 0.5


@dataclass(frozen=True)
class NoiseParams:
    """Dimensionless loss (gamma_t) and dephasing (kappa_t) exposures."""

    gamma_t: float
    kappa_t: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma_t) and math.isfinite(self.kappa_t)):
            raise ValueError("noise exposures must be finite")
        if self.gamma_t < 0 or self.kappa_t < 0:
            raise ValueError("noise exposures must be non-negative")
        if max(self.gamma_t, self.kappa_t) > EXPOSURE_WARN:
            warnings.warn(
                f"noise exposure ({self.gamma_t}, {self.kappa_t}) far outside "
                f"the weak-noise regime",
                stacklevel=2,
            )


def _sector_generator(params: NoiseParams, dim: int, d: int) -> np.ndarray:
    """Upper-bidiagonal generator acting on (rho_{j+d, j})_{j=0..dim-1-d}."""
    size = dim - d
    j = np.arange(size, dtype=float)
    gen = np.zeros((size, size))
    gen[np.arange(size), np.arange(size)] = (
        -params.gamma_t * (2 * j + d) / 2 - params.kappa_t * d * d / 2
    )
    if size > 1:
        jj = np.arange(size - 1, dtype=float)
        gen[np.arange(size - 1), np.arange(1, size)] = params.gamma_t * np.sqrt(
            (jj + 1) * (jj + d + 1)
        )
    return gen


@dataclass(frozen=True)
class ChannelSectors:
    """Exact channel propagators, one per coherence order d >= 0.

    The d and -d sectors share the same real propagator, so only d >= 0 is
    stored.  ``propagators[d]`` maps the vector rho_{j+d, j} forward.
    """

    dim: int
    params: NoiseParams
    propagators: tuple = field(repr=False)

    def sector(self, d: int) -> np.ndarray:
        return self.propagators[abs(d)]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionError(
                f"density matrix shape {rho.shape} does not match dim={self.dim}"
            )
        out = np.zeros_like(rho)
        idx = np.arange(self.dim)
        for d in range(self.dim):
            g = self.propagators[d]
            lower = g @ np.diagonal(rho, offset=-d)
            out[idx[d:], idx[: self.dim - d]] = lower
            if d > 0:
                upper = g @ np.diagonal(rho, offset=d)
                out[idx[: self.dim - d], idx[d:]] = upper
        return out

    def apply_state(self, amps: np.ndarray) -> np.ndarray:
        """Channel action on a pure state |psi><psi|."""
        amps = np.asarray(amps, dtype=complex)
        return self.apply(np.outer(amps, amps.conj()))


def lindblad_channel(params: NoiseParams, dim: int) -> ChannelSectors:
    """Exact exp(t L) for the loss+dephasing generator, sector by sector."""
    if dim < 2:
        raise DimensionError(f"channel needs dim >= 2, got {dim}")
    props = []
    for d in range(dim):
        gen = _sector_generator(params, dim, d)
        props.append(expm(gen))
    return ChannelSectors(dim=dim, params=params, propagators=tuple(props))


@dataclass(frozen=True)
class KrausSet:
    """Operator-sum form of a channel, sorted by descending weight."""

    dim: int
    operators: tuple
    weights: tuple

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros_like(rho)
        for op in self.operators:
            out += op.mat @ rho @ op.mat.conj().T
        return out

    def completeness_defect(self) -> float:
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for op in self.operators:
            total += op.mat.conj().T @ op.mat
        return float(np.max(np.abs(total - np.eye(self.dim))))


def kraus_extract(channel: ChannelSectors, tol: float = 1e-12) -> KrausSet:
    """Kraus operators from the Choi eigendecomposition.

    The channel commutes with number rotations, so its Choi matrix is block
    diagonal over the Fock shift j = (input level) - (output level); each
    block diagonalizes independently.  Blocks with negative shift are empty
    for this gain-free channel and are skipped.
    """
    dim = channel.dim
    ops = []
    for j in range(dim):
        size = dim - j
        block = np.zeros((size, size))
        for a in range(size):
            r = a + j
            for b in range(a, size):
                c = b + j
                # <r-j| E(|r><c|) |c-j> with r <= c
                val = channel.propagators[c - r][r - j, r]
                block[a, b] = val
                block[b, a] = val
        vals, vecs = np.linalg.eigh(block)
        if vals[0] < -1e-8:
            raise NotCompletelyPositiveError(
                f"Choi block for shift {j} has eigenvalue {vals[0]:.3e}"
            )
        for lam, vec in zip(vals, vecs.T):
            if lam <= tol:
                continue
            mat = np.zeros((dim, dim), dtype=complex)
            rows = np.arange(size)
            mat[rows, rows + j] = math.sqrt(lam) * vec
            ops.append((float(lam), FockOperator(dim, mat)))
    ops.sort(key=lambda pair: -pair[0])
    return KrausSet(
        dim=dim,
        operators=tuple(op for _, op in ops),
        weights=tuple(w for w, _ in ops),
    )


# ---------------------------------------------------------------------------
# expansion residuals of the elementary error operators


def loss_expansion_residual(gamma_t: float, dim: int, grid: PhaseGrid) -> float:
    """Residual of the single-shift expansion of the first-order loss Kraus.

    Compares ``sqrt(gamma_t) a exp(-gamma_t n / 2)`` against the phase
    quadrature ``sum_phi c(phi) D((1, phi)) dphi`` with

        c(phi) = sqrt(gamma_t) e^{i phi/2} / (4 sqrt(pi) (gamma_t/2 + i phi)^{3/2}),

    phi running over (-pi, pi].  The max-norm difference is restricted to
    Fock levels below dim/2, away from the truncation edge.
    """
    if not 0 < gamma_t < 0.5:
        raise ValueError(f"gamma_t must lie in (0, 0.5), got {gamma_t}")
    spacing = grid.spacing
    if spacing > gamma_t / 2:
        raise ValueError(
            f"grid spacing {spacing:.3e} cannot resolve the integrand peak of "
            f"width ~gamma_t/2 = {gamma_t / 2:.3e}; refine the phase grid to "
            f"more than {math.ceil(4 * math.pi / gamma_t)} points"
        )
    # fold the grid to (-pi, pi] where the weight function is defined
    phi = np.where(grid.points > math.pi, grid.points - 2 * math.pi, grid.points)
    c = (
        math.sqrt(gamma_t)
        * np.exp(1j * phi / 2)
        / (4 * math.sqrt(math.pi) * (gamma_t / 2 + 1j * phi) ** 1.5)
    )
    r = np.arange(dim - 1)
    # D((1, phi)) contributes e^{i phi/2} e^{i r phi} on the l=1 diagonal
    rhs = (c[None, :] * np.exp(1j * np.outer(r + 0.5, phi))).sum(axis=1) * spacing
    lhs = math.sqrt(gamma_t) * np.sqrt(r + 1.0) * np.exp(-gamma_t * (r + 1) / 2)
    keep = r < dim // 2
    return float(np.max(np.abs(lhs[keep] - rhs[keep])))


def dephasing_expansion_residual(kappa_t: float, dim: int) -> float:
    """Residual of approximating sqrt(kappa_t) n by sin(sqrt(kappa_t) n).

    Both operators are diagonal, so the max-norm residual is the scalar
    maximum of |sqrt(kappa_t) n - sin(sqrt(kappa_t) n)| over n < dim.
    """
    if kappa_t <= 0:
        raise ValueError(f"kappa_t must be positive, got {kappa_t}")
    n = np.arange(dim, dtype=float)
    x = math.sqrt(kappa_t) * n
    return float(np.max(np.abs(x - np.sin(x))))
