"""Generalized number-phase lattice codes.

A code is fixed by a gauge pair ``(s, f)`` — ``s`` the rotation symmetry
order and ``f = p/q`` a reduced fraction shearing the lattice — plus an
amplitude family.  The dual-basis codewords are

    |+/-> = U_f sum_n (+/-1)^n theta_n |s n>,
    U_f   = exp(-i f pi n^2 / (2 s^2)),

with binomial or Gaussian (displaced-squeezed vacuum) amplitudes theta_n.
Code distances are ``d_N = q s`` against number shifts and ``d_phi = pi/s``
against phase rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import (
    DegenerateShiftError,
    DimensionError,
    PhaseUncertaintyUndefinedError,
    TruncationError,
)
from .fock import (
    FockOperator,
    FockState,
    NPVector,
    default_dim,
    gaussian_unitary,
    np_displace,
    rotation,
)


def as_fraction(f) -> Fraction:
    """Coerce an exact rational; floats are rejected on purpose.

    The denominator q fixes the number distance d_N = q s, so f must be
    exact; a float-derived q would be numerical noise.
    """
    if isinstance(f, bool):
        raise TypeError("f must be a rational number")
    if isinstance(f, Rational):
        return Fraction(f)
    if isinstance(f, tuple) and len(f) == 2:
        return Fraction(int(f[0]), int(f[1]))
    raise TypeError(
        f"f must be an exact rational (Fraction, int, or (p, q) pair), "
        f"got {type(f).__name__}"
    )


@dataclass(frozen=True)
class BinomialAmplitudes:
    """theta_n = sqrt(2^-K binom(K, n)) for n in [0, K]."""

    K: int

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"binomial order K must be positive, got {self.K}")

    def theta(self, n_levels: int) -> np.ndarray:
        if n_levels < self.K + 1:
            raise DimensionError(
                f"binomial amplitudes need {self.K + 1} logical levels, "
                f"truncation provides {n_levels}"
            )
        n = np.arange(self.K + 1)
        log_c = [
            math.lgamma(self.K + 1) - math.lgamma(k + 1) - math.lgamma(self.K - k + 1)
            for k in n
        ]
        th = np.exp(0.5 * (np.array(log_c) - self.K * math.log(2.0)))
        out = np.zeros(n_levels, dtype=complex)
        out[: self.K + 1] = th
        return out

    def mean_logical_n(self) -> float:
        return self.K / 2.0


@dataclass(frozen=True)
class GaussianAmplitudes:
    """theta_n = <n|D(alpha)S(r)|0>, renormalized on the truncation."""

    alpha: complex
    r: complex

    def theta(self, n_levels: int) -> np.ndarray:
        col = gaussian_unitary(self.alpha, self.r, n_levels, check_tail=False).mat[:, 0]
        th = np.array(col, copy=True)
        th /= np.linalg.norm(th)
        # fix the global phase: first non-negligible amplitude real positive
        idx = int(np.argmax(np.abs(th) > 1e-13))
        ph = th[idx] / abs(th[idx])
        return th / ph

    def mean_logical_n(self) -> float:
        return abs(self.alpha) ** 2 + math.sinh(abs(self.r)) ** 2


@dataclass(frozen=True)
class CodeParams:
    """Gauge parameters plus amplitude family defining one NP code."""

    s: int
    f: Fraction
    amplitude: object
    dim: int = None

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"rotation order s must be positive, got {self.s}")
        frac = as_fraction(self.f)
        if not abs(frac) < 1:
            raise ValueError(f"|f| must lie in [0, 1), got {frac}")
        object.__setattr__(self, "f", frac)
        if self.dim is None:
            base = default_dim(self.nbar_target)
            if isinstance(self.amplitude, GaussianAmplitudes):
                base = self._gaussian_auto_dim(base)
            object.__setattr__(self, "dim", base)
        if self.dim < 2 * self.s:
            raise DimensionError(
                f"dim={self.dim} cannot hold even two logical levels of an "
                f"s={self.s} code"
            )

    def _gaussian_auto_dim(self, base: int) -> int:
        # The build-time tail check looks at the top Fock levels, i.e. the
        # top few amplitude slots; dividing the default headroom by s leaves
        # too little room at larger s, and squeezed amplitudes decay
        # geometrically rather than like a Poisson tail.  Probe the actual
        # profile and grow dim until the checked window is comfortably
        # below tolerance.
        window = max(5, self.s)
        extra = 16
        while True:
            probe = (base - 1) // self.s + 1 + extra
            mag2 = np.abs(self.amplitude.theta(probe)) ** 2
            if mag2[-1] < 1e-16 or extra >= 4096:
                break
            extra *= 2
        suffix = np.cumsum(mag2[::-1])[::-1]
        dim = base
        while dim - window < self.s * (probe - 1):
            lo = max(0, -(-(dim - window) // self.s))  # first slot in the window
            if lo >= probe or suffix[lo] < 2e-10:
                break
            dim += self.s
        return dim

    @property
    def p(self) -> int:
        return self.f.numerator

    @property
    def q(self) -> int:
        return self.f.denominator

    @property
    def d_N(self) -> int:
        """Number distance q*s (q=1 when f=0)."""
        return self.q * self.s

    @property
    def d_phi(self) -> float:
        """Phase distance pi/s."""
        return math.pi / self.s

    @property
    def n_levels(self) -> int:
        """How many logical amplitude slots fit under the truncation."""
        return (self.dim - 1) // self.s + 1

    @property
    def nbar_target(self) -> float:
        """Mean excitation implied by the amplitude family (pre-truncation)."""
        return self.s * self.amplitude.mean_logical_n()

    def theta(self) -> np.ndarray:
        return self.amplitude.theta(self.n_levels)

    def interface_diag(self) -> np.ndarray:
        """Diagonal of U_f = exp(-i f pi n^2 / (2 s^2)) at this truncation."""
        n = np.arange(self.dim, dtype=np.int64)
        num = self.p * n * n
        return np.exp(-1j * math.pi * num / (2 * self.q * self.s**2))


@dataclass(frozen=True)
class LogicalBasis:
    """Dual- and computational-basis codewords of one code."""

    params: CodeParams
    plus: FockState
    minus: FockState
    zero: FockState
    one: FockState


@dataclass(frozen=True)
class CodeMetrics:
    nbar: float
    delta_phi: float
    d_N: int
    d_phi: float
    overlap: float


def build_codewords(params: CodeParams, check_tail: bool = True) -> LogicalBasis:
    """Construct |+/->_L and the derived |0/1>_L on the truncated space."""
    theta = params.theta()
    s, dim = params.s, params.dim
    plus = np.zeros(dim, dtype=complex)
    minus = np.zeros(dim, dtype=complex)
    idx = s * np.arange(theta.shape[0])
    plus[idx] = theta
    minus[idx] = theta * ((-1.0) ** np.arange(theta.shape[0]))
    uf = params.interface_diag()
    plus_state = FockState(dim, uf * plus).normalized()
    minus_state = FockState(dim, uf * minus).normalized()
    if check_tail:
        try:
            plus_state.require_tail(levels=max(5, s))
            minus_state.require_tail(levels=max(5, s))
        except TruncationError as exc:
            raise TruncationError(
                f"codeword tail mass {exc.tail_mass:.3e} at dim={dim}; "
                f"increase the truncation",
                tail_mass=exc.tail_mass,
            ) from exc
    zero = FockState(dim, (plus_state.amps + minus_state.amps) / math.sqrt(2))
    one = FockState(dim, (plus_state.amps - minus_state.amps) / math.sqrt(2))
    return LogicalBasis(params=params, plus=plus_state, minus=minus_state,
                        zero=zero, one=one)


def code_metrics(params: CodeParams) -> CodeMetrics:
    """Mean excitation, Holevo phase uncertainty, distances, basis overlap."""
    theta = params.theta()
    weights = np.abs(theta) ** 2
    nbar = params.s * float(np.sum(np.arange(theta.shape[0]) * weights))
    neighbor = complex(np.sum(np.conj(theta[:-1]) * theta[1:]))
    if abs(neighbor) < 1e-300:
        raise PhaseUncertaintyUndefinedError(
            "neighbor amplitude sum vanishes; Holevo phase uncertainty diverges"
        )
    delta_phi = abs(neighbor) ** -2 - 1.0
    overlap = abs(float(np.sum(((-1.0) ** np.arange(theta.shape[0])) * weights)))
    return CodeMetrics(
        nbar=nbar,
        delta_phi=delta_phi,
        d_N=params.d_N,
        d_phi=params.d_phi,
        overlap=overlap,
    )


@dataclass(frozen=True)
class LogicalOperators:
    X_bar: FockOperator
    Z_bar: FockOperator
    S_x: FockOperator
    S_z: FockOperator


def logical_operators(params: CodeParams) -> LogicalOperators:
    """Logical Paulis X = D((s, f pi/s)), Z = R(pi/s) and their squares."""
    s, dim = params.s, params.dim
    phi_x = math.pi * params.p / (params.q * s)
    return LogicalOperators(
        X_bar=np_displace(NPVector(s, phi_x), dim),
        Z_bar=rotation(math.pi / s, dim),
        S_x=np_displace(NPVector(2 * s, 2 * phi_x), dim),
        S_z=rotation(2 * math.pi / s, dim),
    )


@dataclass(frozen=True)
class PauliPairCheck:
    area: float
    valid: bool


def check_pauli_pair(nx: NPVector, nz: NPVector) -> PauliPairCheck:
    """A displacement pair anticommutes iff its symplectic area is pi."""
    area = abs(nx.cross(nz))
    return PauliPairCheck(area=area, valid=bool(abs(area - math.pi) < 1e-12))


def lattice_points(s: int, f, origin=(0.0, 0.0), n_max: int = 10):
    """Codespace lattice r*nx* + t*nz + n0 in the (number, phase) plane.

    ``nx* = (s, -f pi/s)``, ``nz = (0, pi/s)``, ``n0 = nu_x nx* + nu_z nz``.
    Points are restricted to number coordinate in [0, n_max] and phase folded
    into [0, 2 pi).  The number coordinate is integer-valued whenever
    ``nu_x * s`` is an integer.
    """
    frac = as_fraction(f)
    nu_x, nu_z = origin
    if not (0 <= nu_x < 1 and 0 <= nu_z < 1):
        raise ValueError("origin components must lie in [0, 1)")
    fx = float(frac)
    points = []
    r = 0
    while (r + nu_x) * s <= n_max + 1e-12:
        n_coord = (r + nu_x) * s
        base_phase = -(r + nu_x) * fx * math.pi / s + nu_z * math.pi / s
        for t in range(2 * s):
            phase = (base_phase + t * math.pi / s) % (2 * math.pi)
            points.append((n_coord, phase))
        r += 1
    points.sort()
    return points


def interface_gate(s: int, delta_f, dim: int) -> FockOperator:
    """Diagonal lattice-shear gate exp(-i delta_f pi n^2 / (2 s^2))."""
    if dim < 2:
        raise DimensionError(f"interface gate needs dim >= 2, got {dim}")
    frac = as_fraction(delta_f)
    n = np.arange(dim, dtype=np.int64)
    num = frac.numerator * n * n
    return FockOperator(
        dim, np.diag(np.exp(-1j * math.pi * num / (2 * frac.denominator * s**2)))
    )


@dataclass(frozen=True)
class VortexCheck:
    residual: float
    phase: complex
    angle: float


def vortex_check(params: CodeParams, l: int, psi: FockState) -> VortexCheck:
    """Verify that a number shift acts as a discrete codespace rotation.

    For a state ``psi = U_f sum_n c_n |s n>`` the ladder shift satisfies
    ``Sigma_l psi = phase * R(angle) * psi_l`` with ``angle = -l f pi / s^2``
    and ``psi_l = U_f sum_n c_n |s n - l>``.  The reported ``phase`` is the
    global phase that best aligns the two sides, and ``residual`` the norm
    difference after alignment — zero (to rounding) whenever the relation
    holds.
    """
    if l < 0:
        raise ValueError("shift l must be non-negative")
    dim = params.dim
    if l >= dim:
        raise DimensionError(f"shift l={l} must be below dim={dim}")
    amps = psi.amps
    lhs = np.concatenate([amps[l:], np.zeros(l, dtype=complex)])
    if np.linalg.norm(lhs) < 1e-13:
        raise DegenerateShiftError(
            f"Sigma_{l} annihilates the state (no populated level >= {l})"
        )
    uf = params.interface_diag()
    c = np.conj(uf) * amps
    shifted = np.concatenate([c[l:], np.zeros(l, dtype=complex)])
    angle = -math.pi * (l * params.p) / (params.q * params.s**2)
    rhs = np.exp(1j * angle * np.arange(dim)) * (uf * shifted)
    inner = complex(np.vdot(rhs, lhs))
    if abs(inner) < 1e-300:
        phase = 1.0 + 0j
    else:
        phase = inner / abs(inner)
    residual = float(np.linalg.norm(lhs - phase * rhs))
    return VortexCheck(residual=residual, phase=phase, angle=angle)


@dataclass(frozen=True)
class KLResult:
    matrix: np.ndarray
    cost: float


def kl_matrix(params: CodeParams, error_ops) -> KLResult:
    """Knill-Laflamme matrix M[(j,mu),(k,nu)] = <mu|E_j^dag E_k|nu> and cost.

    The cost sums squared magnitudes of every component a correctable set
    must not have: logical off-diagonals plus the mismatch between the two
    diagonal entries of each (j, k) block.
    """
    basis = build_codewords(params, check_tail=False)
    kets = [basis.zero.amps, basis.one.amps]
    nerr = len(error_ops)
    images = [op.mat @ ket for op in error_ops for ket in kets]
    m = np.zeros((2 * nerr, 2 * nerr), dtype=complex)
    for a in range(2 * nerr):
        for b in range(2 * nerr):
            m[a, b] = np.vdot(images[a], images[b])
    cost = 0.0
    for j in range(nerr):
        for k in range(nerr):
            blk = m[2 * j : 2 * j + 2, 2 * k : 2 * k + 2]
            cost += abs(blk[0, 1]) ** 2 + abs(blk[1, 0]) ** 2
            cost += abs(blk[0, 0] - blk[1, 1]) ** 2
    return KLResult(matrix=m, cost=float(cost))


# ---------------------------------------------------------------------------
# amplitude families at a target mean excitation


def gaussian_alpha_for_nbar(s: int, nbar: float, r: float = 0.0) -> float:
    """alpha >= 0 such that s(alpha^2 + sinh^2 r) = nbar."""
    residue = nbar / s - math.sinh(abs(r)) ** 2
    if residue < 0:
        raise ValueError(
            f"squeezing r={r} alone exceeds the target nbar={nbar} at s={s}"
        )
    return math.sqrt(residue)


def binomial_K_for_nbar(s: int, nbar: float) -> int:
    """K such that s*K/2 = nbar; nbar must sit on the binomial ladder."""
    k2 = 2 * nbar / s
    K = round(k2)
    if abs(k2 - K) > 1e-9 or K < 1:
        raise ValueError(
            f"binomial codes with s={s} only reach nbar = s*K/2; "
            f"nbar={nbar} is not reachable"
        )
    return int(K)
