"""Truncated Fock-space linear algebra.

Dense complex matrices on a finite Fock ladder |0>, ..., |dim-1>: standard
ladder operators, number-phase (NP) displacement operators and their
operator-basis expansion, Gaussian unitaries, the canonical phase POVM, and
quadrature Wigner data.

Conventions fixed project-wide:

* ``Sigma_l = sum_n |n><n+l|`` is the Fock ladder shift; ``Sigma_1^dag`` is
  the Susskind-Glogower exponential phase operator.
* The NP displacement for ``nvec = (l, phi)`` is
  ``D(nvec) = exp(i*l*phi/2) * R(phi) * Sigma_l`` with ``R(phi) = exp(i*n*phi)``.
* Quadratures are ``x = (a + a^dag)/sqrt(2)``, so a coherent state |alpha>
  peaks at ``(sqrt(2) Re alpha, sqrt(2) Im alpha)`` in the Wigner plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import (
    DimensionError,
    NormalizationError,
    SupportError,
    TruncationError,
)

TAIL_LEVELS = 5
TAIL_TOL = 1e-9


def _frozen(arr, dtype=complex):
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockState:
    """Complex amplitude vector over a truncated Fock ladder."""

    dim: int
    amps: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"dim must be positive, got {self.dim}")
        amps = _frozen(self.amps)
        if amps.shape != (self.dim,):
            raise DimensionError(
                f"amps has shape {amps.shape}, expected ({self.dim},)"
            )
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amps(cls, amps) -> "FockState":
        amps = np.asarray(amps, dtype=complex)
        return cls(dim=amps.shape[0], amps=amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0:
            raise NormalizationError("cannot normalize the zero state")
        return FockState(self.dim, self.amps / n)

    def tail_mass(self, levels: int = TAIL_LEVELS) -> float:
        """Probability weight in the top ``levels`` Fock levels."""
        return float(np.sum(np.abs(self.amps[-levels:]) ** 2))

    def require_normalized(self, tol: float = 1e-10):
        if abs(self.norm() - 1.0) > tol:
            raise NormalizationError(
                f"state norm {self.norm():.12g} differs from 1 beyond {tol}"
            )

    def require_tail(self, tol: float = TAIL_TOL, levels: int = TAIL_LEVELS):
        mass = self.tail_mass(levels)
        if mass > tol:
            raise TruncationError(
                f"tail mass {mass:.3e} in top {levels} levels exceeds {tol}",
                tail_mass=mass,
            )


@dataclass(frozen=True)
class FockOperator:
    """Dense square complex matrix on the truncated Fock space."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"dim must be positive, got {self.dim}")
        mat = _frozen(self.mat)
        if mat.shape != (self.dim, self.dim):
            raise DimensionError(
                f"mat has shape {mat.shape}, expected square of size {self.dim}"
            )
        object.__setattr__(self, "mat", mat)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.dim, self.mat @ other.mat)
        if isinstance(other, FockState):
            return FockState(self.dim, self.mat @ other.amps)
        return NotImplemented

    def dagger(self) -> "FockOperator":
        return FockOperator(self.dim, self.mat.conj().T)


@dataclass(frozen=True)
class NPVector:
    """Number-phase displacement label (l, phi).

    ``phi`` is reduced to the canonical interval (-pi, pi] on construction.
    """

    l: int
    phi: float

    def __post_init__(self):
        phi = math.remainder(float(self.phi), 2 * math.pi)
        if phi <= -math.pi:
            phi = math.pi
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "l", int(self.l))

    def cross(self, other: "NPVector") -> float:
        """Symplectic cross product l*phi' - phi*l'."""
        return self.l * other.phi - self.phi * other.l


@dataclass(frozen=True)
class PhaseGrid:
    """Uniform grid on [0, 2*pi) used for POVM and quadrature sums."""

    n_points: int
    points: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n_points < 256:
            raise DimensionError(
                f"phase grid needs at least 256 points, got {self.n_points}"
            )
        pts = 2 * np.pi * np.arange(self.n_points) / self.n_points
        object.__setattr__(self, "points", _frozen(pts, dtype=float))

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.n_points


# ---------------------------------------------------------------------------
# ladder / rotation / displacement operators


@lru_cache(maxsize=None)
def _ladder_mats(dim: int):
    n = np.arange(dim, dtype=float)
    a = np.zeros((dim, dim), dtype=complex)
    a[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(n[1:])
    return a, a.conj().T.copy(), np.diag(n.astype(complex))


class LadderOperators:
    """Bundle of a, a^dag, n and the Fock shift family Sigma_l."""

    def __init__(self, dim: int):
        if dim < 2:
            raise DimensionError(f"ladder operators need dim >= 2, got {dim}")
        self.dim = dim
        a, adag, nmat = _ladder_mats(dim)
        self.a = FockOperator(dim, a)
        self.a_dag = FockOperator(dim, adag)
        self.n = FockOperator(dim, nmat)

    def sigma(self, l: int) -> FockOperator:
        """Fock ladder shift Sigma_l = sum_n |n><n+l| (truncated)."""
        if abs(l) >= self.dim:
            raise DimensionError(
                f"|l|={abs(l)} must be below dim={self.dim}"
            )
        return FockOperator(self.dim, np.eye(self.dim, k=l, dtype=complex))


def ladder_operators(dim: int) -> LadderOperators:
    return LadderOperators(dim)


def rotation(phi: float, dim: int) -> FockOperator:
    """Number rotation R(phi) = exp(i * n * phi)."""
    return FockOperator(dim, np.diag(np.exp(1j * phi * np.arange(dim))))


def np_displace(nvec: NPVector, dim: int) -> FockOperator:
    """NP displacement D((l, phi)) = exp(i*l*phi/2) * R(phi) * Sigma_l."""
    l, phi = nvec.l, nvec.phi
    if abs(l) >= dim:
        raise DimensionError(f"|l|={abs(l)} must be below dim={dim}")
    mat = np.exp(1j * l * phi / 2) * (
        np.exp(1j * phi * np.arange(dim))[:, None]
        * np.eye(dim, k=l, dtype=complex)
    )
    return FockOperator(dim, mat)


# ---------------------------------------------------------------------------
# Gaussian unitaries


def gaussian_unitary(
    alpha: complex,
    r: complex,
    dim: int,
    check_tail: bool = True,
    tail_tol: float = 1e-10,
) -> FockOperator:
    """Displaced squeezing D(alpha) S(r) on the truncated space.

    ``S(r) = exp[(conj(r) a^2 - r a^dag^2)/2]`` and
    ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``, both built by dense
    matrix exponentials.  When ``check_tail`` is set, the displaced-squeezed
    vacuum (column 0) must keep its top-level tail mass below ``tail_tol``.
    """
    if dim < 2:
        raise DimensionError(f"gaussian_unitary needs dim >= 2, got {dim}")
    amat, _, _ = _ladder_mats(dim)
    adag = amat.conj().T
    sq = expm((np.conj(r) * amat @ amat - r * adag @ adag) / 2)
    disp = expm(alpha * adag - np.conj(alpha) * amat)
    u = disp @ sq
    if check_tail:
        col0 = FockState(dim, u[:, 0])
        mass = col0.tail_mass()
        if mass > tail_tol:
            raise TruncationError(
                f"displaced-squeezed vacuum keeps {mass:.3e} of its weight "
                f"in the top {TAIL_LEVELS} of {dim} levels (tol {tail_tol})",
                tail_mass=mass,
            )
    return FockOperator(dim, u)


def coherent_state(alpha: complex, dim: int, check_tail: bool = True) -> FockState:
    """Coherent state amplitudes exp(-|alpha|^2/2) alpha^n / sqrt(n!)."""
    n = np.arange(dim)
    if alpha == 0:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
    else:
        log_mag = (
            -abs(alpha) ** 2 / 2
            + n * math.log(abs(alpha))
            - 0.5 * np.array([math.lgamma(k + 1) for k in n])
        )
        amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    state = FockState(dim, amps)
    if check_tail:
        state.require_tail()
    return state.normalized()


def default_dim(nbar: float) -> int:
    """Truncation heuristic dim = ceil(nbar + 8*sqrt(nbar) + 20)."""
    return int(math.ceil(nbar + 8 * math.sqrt(max(nbar, 0.0)) + 20))


# ---------------------------------------------------------------------------
# NP operator-basis expansion


@dataclass(frozen=True)
class NPWeights:
    """Expansion weights of an operator over the D((l, phi)) basis."""

    dim: int
    ls: tuple
    grid: PhaseGrid
    weights: np.ndarray  # shape (len(ls), n_points)


def np_decompose(
    op: FockOperator,
    l_range,
    grid: PhaseGrid,
    off_range_tol: float = 1e-12,
) -> NPWeights:
    """Expansion weights weight(l, phi) = Tr(D((l, phi))^dag op).

    ``l_range`` is an iterable of integer shifts; any operator weight on
    Fock-shift diagonals outside it is an error (reported, never silently
    dropped), since the companion reconstruction could not represent it.
    """
    ls = tuple(int(l) for l in l_range)
    if len(set(ls)) != len(ls):
        raise ValueError("l_range contains duplicate shifts")
    dim = op.dim
    n_pts = grid.n_points
    weights = np.zeros((len(ls), n_pts), dtype=complex)
    for i, l in enumerate(ls):
        if abs(l) >= dim:
            raise DimensionError(f"|l|={abs(l)} must be below dim={dim}")
        diag = np.diagonal(op.mat, offset=l)
        # sum_r diag[r] e^{-i r phi_j} is a plain DFT on the phase grid
        weights[i] = np.exp(-1j * l * grid.points / 2) * np.fft.fft(diag, n=n_pts)
    covered = set(ls)
    off_mass = 0.0
    for l in range(-(dim - 1), dim):
        if l not in covered:
            off_mass += float(np.sum(np.abs(np.diagonal(op.mat, offset=l)) ** 2))
    if off_mass > off_range_tol:
        raise SupportError(
            f"operator keeps squared weight {off_mass:.3e} on Fock-shift "
            f"diagonals outside l_range (tol {off_range_tol})"
        )
    return NPWeights(dim=dim, ls=ls, grid=grid, weights=weights)


def np_reconstruct(weights: NPWeights) -> FockOperator:
    """Quadrature sum of weight(l, phi) D((l, phi)) dphi / (2 pi)."""
    dim = weights.dim
    n_pts = weights.grid.n_points
    mat = np.zeros((dim, dim), dtype=complex)
    for i, l in enumerate(weights.ls):
        u = weights.weights[i] * np.exp(1j * l * weights.grid.points / 2)
        coeff = np.fft.ifft(u)  # coeff[r] = (1/N) sum_j u_j e^{+2 pi i r j / N}
        r = np.arange(dim - abs(l))
        diag = coeff[r % n_pts]
        if l >= 0:
            mat[r, r + l] += diag
        else:
            mat[r - l, r] += diag
    return FockOperator(dim, mat)


# ---------------------------------------------------------------------------
# canonical phase measurement


def phase_amplitudes(amps: np.ndarray, n_points: int) -> np.ndarray:
    """Overlaps <e_X|psi> = (2 pi)^{-1/2} sum_n psi_n e^{-i n X} on the grid."""
    return np.fft.fft(np.asarray(amps, dtype=complex), n=n_points) / math.sqrt(
        2 * math.pi
    )


def phase_povm_weights(state: FockState, grid: PhaseGrid) -> np.ndarray:
    """Canonical phase density |<e_X|psi>|^2 sampled on the grid.

    The Riemann sum of the returned density times the grid spacing is 1 for
    any normalized state once the grid resolves the top Fock level.
    """
    state.require_normalized()
    return np.abs(phase_amplitudes(state.amps, grid.n_points)) ** 2


# ---------------------------------------------------------------------------
# quadrature Wigner function


_WIGNER_DIM_GUARD = 150


def wigner_xp(state: FockState, x_grid, p_grid) -> np.ndarray:
    """Quadrature Wigner function W(x, p) with unit integral.

    Uses the displaced-parity form W = (1/pi) <psi| D(2 alpha) Pi |psi>,
    alpha = (x + i p)/sqrt(2), evaluated through the normally ordered series
    of D so the whole grid vectorizes.  Returns shape (len(x), len(p)).
    """
    state.require_normalized()
    dim = state.dim
    if dim > _WIGNER_DIM_GUARD:
        raise DimensionError(
            f"wigner_xp supports dim <= {_WIGNER_DIM_GUARD} (got {dim}); "
            "factorial scales overflow beyond that"
        )
    x_grid = np.asarray(x_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)

    psi = state.amps
    psi_par = psi * ((-1.0) ** np.arange(dim))
    lg = np.array([math.lgamma(k + 1) for k in range(dim)])
    # T[j, k] = <psi| a^dag^j a^k |Pi psi>
    T = np.zeros((dim, dim), dtype=complex)
    n = np.arange(dim)
    for k in range(dim):
        base = n[k:]  # n >= k
        down = base - k
        for j in range(dim):
            up = down + j
            sel = up < dim
            if not np.any(sel):
                continue
            scale = np.exp(
                0.5 * (lg[base[sel]] - lg[down[sel]])
                + 0.5 * (lg[up[sel]] - lg[down[sel]])
            )
            T[j, k] = np.sum(np.conj(psi[up[sel]]) * psi_par[base[sel]] * scale)

    xs, ps = np.meshgrid(x_grid, p_grid, indexing="ij")
    alpha = ((xs + 1j * ps) / math.sqrt(2)).ravel()
    beta = 2 * alpha
    out = np.empty(alpha.shape, dtype=float)
    chunk = 2048
    for lo in range(0, beta.size, chunk):
        b = beta[lo : lo + chunk]
        u = np.ones((dim, b.size), dtype=complex)
        v = np.ones((dim, b.size), dtype=complex)
        for j in range(1, dim):
            u[j] = u[j - 1] * b / j
            v[j] = v[j - 1] * (-np.conj(b)) / j
        s = np.sum(u * (T @ v), axis=0)
        out[lo : lo + chunk] = np.real(s) * np.exp(-0.5 * np.abs(b) ** 2) / math.pi
    return out.reshape(xs.shape)
