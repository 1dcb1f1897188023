"""Teleportation-based QEC cycle for number-phase lattice codes.

One cycle measures the modular number parity of the damaged codeword,
converts it back to rectangular structure with the interface gate, entangles
it with a fresh ancilla code through a controlled-phase gate, reads the data
mode with a canonical phase measurement, and applies a syndrome-conditioned
logical recovery on the ancilla.

Everything propagates as pure Kraus branches.  The joint two-mode state is
never materialized: the controlled phase is diagonal, so conditioning on a
populated ancilla level ``s_a m'`` merely offsets the data phase profile by
``pi m'/s``, and the whole measurement sweep collapses to at most ``2s``
FFTs per branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .codes import CodeParams, build_codewords, vortex_check
from .errors import (
    DecoderMismatchWarning,
    DimensionError,
    NumericalFailureError,
    ResourceGuardError,
    WindowError,
)
from .fock import FockOperator, PhaseGrid, coherent_state, default_dim, phase_povm_weights
from .noise import KrausSet

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PARITY_MODES = ("ideal-projective", "circuit-sim")
TWO_MODE_GUARD = 1024


@dataclass(frozen=True)
class QECConfig:
    """Window split, measurement resolution and ancilla choice for one cycle.

    ``G`` and ``L`` split the correctable shift window ``[-G, L]``; together
    they must cover one number distance, ``G + L = d_N - 1``, which is
    checked against the code at use time.  ``ancilla=None`` means "same code
    as the data mode".
    """

    G: int
    L: int
    phase_points: int = 4096
    ancilla: CodeParams = None
    parity_mode: str = "ideal-projective"

    def __post_init__(self):
        if self.G != int(self.G) or self.L != int(self.L):
            raise ValueError("window bounds G, L must be integers")
        if self.G < 0 or self.L < 0:
            raise ValueError(f"window bounds must be non-negative, got G={self.G} L={self.L}")
        if self.phase_points < 256:
            raise ValueError(f"phase_points must be at least 256, got {self.phase_points}")
        if self.parity_mode not in PARITY_MODES:
            raise ValueError(
                f"parity_mode must be one of {PARITY_MODES}, got {self.parity_mode!r}"
            )


def _require_window(code: CodeParams, G: int, L: int):
    if G + L != code.d_N - 1:
        raise WindowError(
            f"window split G+L={G + L} must equal d_N-1={code.d_N - 1} "
            f"for s={code.s}, f={code.f}"
        )


def modular_parity_projectors(s: int, dim: int):
    """Projectors onto Fock combs n = s*j - k, one per parity k in [0, s)."""
    if s < 1:
        raise ValueError(f"modular order s must be positive, got {s}")
    ops = []
    levels = np.arange(dim)
    for k in range(s):
        mask = ((levels + k) % s == 0).astype(complex)
        ops.append(FockOperator(dim, np.diag(mask)))
    return ops


def controlled_phase(s1: int, s2: int, dims) -> FockOperator:
    """Two-mode diagonal gate exp(-i pi n1 n2 / (s1 s2)) on the Kron space."""
    d1, d2 = int(dims[0]), int(dims[1])
    if d1 * d2 > TWO_MODE_GUARD:
        raise ResourceGuardError(
            f"two-mode space {d1}x{d2} exceeds the dense guard of {TWO_MODE_GUARD}"
        )
    phases = np.exp(
        -1j * math.pi * np.outer(np.arange(d1), np.arange(d2)) / (s1 * s2)
    )
    return FockOperator(d1 * d2, np.diag(phases.ravel()))


# ---------------------------------------------------------------------------
# syndrome decision regions


@dataclass(frozen=True)
class ParitySector:
    """Decision table for one measured parity k.

    ``angles``/``labels`` are the fundamental candidates in tie-break
    priority order (smaller |m| first, then i=0).  ``tiled_angles`` repeats
    every candidate at its s translates spaced 2*pi/s, sorted on [0, 2*pi),
    with ``boundaries`` the midpoints separating adjacent regions.
    """

    k: int
    angles: np.ndarray
    labels: tuple
    tiled_angles: np.ndarray
    tiled_labels: tuple
    boundaries: np.ndarray


@dataclass(frozen=True)
class DecisionRegions:
    s: int
    sigma: int
    period: float
    sectors: tuple

    def decode(self, angles, k: int) -> np.ndarray:
        """Index of the nearest candidate (priority order) per angle."""
        sec = self.sectors[k]
        angles = np.asarray(angles, dtype=float)
        best = np.full(angles.shape, np.inf)
        idx = np.zeros(angles.shape, dtype=np.intp)
        half = self.period / 2
        for rank, th in enumerate(sec.angles):
            d = np.abs((angles - th + half) % self.period - half)
            sel = d < best - 1e-12
            idx[sel] = rank
            best[sel] = d[sel]
        return idx


def _m_window(G: int, L: int, s: int, k: int) -> range:
    lo = -((G + k) // s)
    hi = (L - k) // s
    return range(lo, hi + 1)


def decision_regions(code: CodeParams, cfg: QECConfig) -> DecisionRegions:
    """Nearest-candidate syndrome tables for every parity sector.

    Candidates sit at i*pi/s + sigma*m*f*pi/s + sigma*k*f*pi/(s*s) where
    sigma is the measured sign of the discrete rotation a number shift
    induces on the sheared lattice; each candidate owns its s translates
    because the phase profile of a fixed-parity state is 2*pi/s periodic.
    """
    _require_window(code, cfg.G, cfg.L)
    s = code.s
    f_val = float(code.f)
    sigma = -1
    if code.p != 0:
        probe = build_codewords(code, check_tail=False)
        chk = vortex_check(code, s, probe.plus)
        if chk.residual > 1e-8:
            raise NumericalFailureError(
                f"vortex relation violated (residual {chk.residual:.3e}); "
                "decision regions would be unreliable"
            )
        sigma = 1 if chk.angle * code.p > 0 else -1
    period = 2 * math.pi / s
    sectors = []
    for k in range(s):
        offset = sigma * f_val * k * math.pi / s**2
        cands = []
        for m in _m_window(cfg.G, cfg.L, s, k):
            for i in (0, 1):
                th = i * math.pi / s + sigma * m * f_val * math.pi / s + offset
                cands.append((abs(m), i, m, th))
        cands.sort(key=lambda c: (c[0], c[1]))
        labels = tuple((i, m) for _, i, m, _ in cands)
        angles = np.array([th % (2 * math.pi) for _, _, _, th in cands])
        tiled = []
        tlab = []
        for (i, m), th in zip(labels, angles):
            for t in range(s):
                tiled.append((th + period * t) % (2 * math.pi))
                tlab.append((i, m))
        order = np.argsort(tiled)
        tiled = np.array(tiled)[order]
        tlab = tuple(tlab[j] for j in order)
        gaps = np.diff(np.concatenate([tiled, [tiled[0] + 2 * math.pi]]))
        if tiled.shape[0] > 1 and gaps.min() < 1e-9:
            raise WindowError(
                f"decision candidates collide for parity k={k}; the shear "
                f"fraction f={code.f} does not separate the m window"
            )
        mids = np.empty_like(tiled)
        mids[:-1] = (tiled[:-1] + tiled[1:]) / 2
        mids[-1] = ((tiled[-1] + tiled[0] + 2 * math.pi) / 2) % (2 * math.pi)
        sectors.append(
            ParitySector(
                k=k,
                angles=angles,
                labels=labels,
                tiled_angles=tiled,
                tiled_labels=tlab,
                boundaries=mids,
            )
        )
    return DecisionRegions(s=s, sigma=sigma, period=period, sectors=tuple(sectors))


# ---------------------------------------------------------------------------
# teleportation cycle


@dataclass(frozen=True)
class SyndromeOutcome:
    """One decoded (k, i, m) cell; the inferred shift is l_e = s*m + k."""

    k: int
    i: int
    m: int
    probability: float
    input_probabilities: tuple = (0.0, 0.0)

    def shift(self, s: int) -> int:
        return s * self.m + self.k


@dataclass(frozen=True)
class LogicalChannel:
    """4x4 process matrix on the logical operator basis plus leakage.

    ``process[2a+b, 2mu+nu]`` is ``<a| E(|mu><nu|) |b>`` in the recovered
    ancilla's orthonormalized logical frame.  ``input_totals`` and
    ``input_leakage`` resolve the measurement closure per diagonal input.
    """

    process: np.ndarray
    leakage: float = 0.0
    syndromes: tuple = ()
    input_totals: np.ndarray = None
    input_leakage: np.ndarray = None


def _orthonormal_logical_frame(basis) -> np.ndarray:
    """Columns |0~>, |1~>: symmetric orthogonalization of the codewords."""
    blog = np.stack([basis.zero.amps, basis.one.amps], axis=1)
    overlap = blog.conj().T @ blog
    ev, evec = np.linalg.eigh(overlap)
    if ev.min() < 1e-12:
        raise NumericalFailureError(
            "logical codewords are numerically degenerate; cannot build an "
            "orthonormal logical frame"
        )
    return blog @ (evec * ev**-0.5) @ evec.conj().T


def _readout_row(s: int, alpha: float, n_points: int = 8192) -> np.ndarray:
    """Sector-binned phase distribution of |alpha>: row 0 of the confusion
    matrix of the coherent-ancilla parity readout (circulant in k'-k)."""
    if s == 1:
        return np.ones(1)
    dim = default_dim(alpha * alpha)
    state = coherent_state(alpha, dim, check_tail=False).normalized()
    grid = PhaseGrid(n_points)
    weights = phase_povm_weights(state, grid)
    sector = np.rint(grid.points * s / (2 * math.pi)).astype(int) % s
    row = np.zeros(s)
    np.add.at(row, sector, weights)
    return row / row.sum()


def teleport_qec(
    code: CodeParams,
    noise: KrausSet,
    cfg: QECConfig,
    readout_alpha: float = 4.0,
) -> LogicalChannel:
    """Run one teleportation QEC cycle and return the logical channel.

    For every Kraus branch and parity sector the damaged codeword is pushed
    through interface, entangling gate and phase measurement; the decoded
    (i, m) label selects the 2x2 recovery H Z^m X^i while the parity ramp
    exp(-i pi k n/(s s_a)) is removed physically on the ancilla before
    projecting onto its orthonormalized logical frame.  Weight missing from
    that frame accumulates as leakage.
    """
    if noise.dim != code.dim:
        raise DimensionError(
            f"noise dim {noise.dim} does not match code dim {code.dim}"
        )
    anc = cfg.ancilla if cfg.ancilla is not None else code
    regions = decision_regions(code, cfg)
    basis = build_codewords(code)
    abasis = build_codewords(anc)
    dim, dima = code.dim, anc.dim
    s, sa = code.s, anc.s
    grid = PhaseGrid(cfg.phase_points)
    n_pts = cfg.phase_points
    dX = grid.spacing
    uf_conj = np.conj(code.interface_diag())
    two_s = 2 * s

    # symmetric-orthogonalized logical frames: outputs are read in the fresh
    # code's frame, inputs enter in the data code's frame
    borth = _orthonormal_logical_frame(abasis)
    dorth = _orthonormal_logical_frame(basis)

    # ancilla support tables: contraction coefficients per offset class
    mprime = np.arange((dima - 1) // sa + 1)
    msup = sa * mprime
    aamp = abasis.plus.amps[msup]
    tcls = mprime % two_s
    gain = np.zeros(two_s)
    np.add.at(gain, tcls, np.abs(aamp) ** 2)
    contractions = []
    for k in range(s):
        ramp = np.exp(-1j * math.pi * k * mprime / s)
        ck = np.zeros((2, two_s), dtype=complex)
        for t in range(two_s):
            selm = tcls == t
            if np.any(selm):
                ck[:, t] = (
                    borth[msup[selm], :].conj().T * (aamp[selm] * ramp[selm])
                ).sum(axis=1)
        contractions.append(ck)

    # per-parity decode tables and recovery matrices on the phase grid
    label_idx = [regions.decode(grid.points, k) for k in range(s)]
    recoveries = []
    for k in range(s):
        recs = []
        for i, m in regions.sectors[k].labels:
            op = _HADAMARD @ np.linalg.matrix_power(_PAULI_Z, m % 2)
            if i:
                op = op @ _PAULI_X
            recs.append(op)
        recoveries.append(recs)

    # boundary tables for the corrected quadrature: each decision boundary
    # splits its grid cell fractionally and carries a second-order
    # Euler-Maclaurin term built from the exact phase profile derivative
    boundary_tables = []
    for k in range(s):
        sec = regions.sectors[k]
        rank_of = {lab: r for r, lab in enumerate(sec.labels)}
        nb = sec.boundaries.shape[0]
        rank_left = np.array(
            [rank_of[sec.tiled_labels[j]] for j in range(nb)], dtype=np.intp
        )
        rank_right = np.array(
            [rank_of[sec.tiled_labels[(j + 1) % nb]] for j in range(nb)],
            dtype=np.intp,
        )
        cell = np.floor(sec.boundaries / dX + 0.5).astype(np.intp) % n_pts
        delta = (sec.boundaries - cell * dX + math.pi) % (2 * math.pi) - math.pi
        frac_right = 0.5 - delta / dX
        eb = np.exp(-1j * np.outer(sec.boundaries, np.arange(dim)))
        ebd = eb * (-1j * np.arange(dim))
        boundary_tables.append(
            (rank_left, rank_right, cell, delta, frac_right, eb, ebd)
        )

    mods = np.exp(
        -1j * math.pi * np.outer(np.arange(two_s), np.arange(dim)) / s
    )
    parity_masks = [((np.arange(dim) + k) % s == 0) for k in range(s)]
    circuit_mode = cfg.parity_mode == "circuit-sim"
    if circuit_mode:
        qrow = _readout_row(s, readout_alpha)
        true_parity = (-np.arange(dim)) % s
        mix = [np.sqrt(qrow[(k - true_parity) % s]) for k in range(s)]

    inputs = (dorth[:, 0], dorth[:, 1])
    proc = np.zeros((4, 4), dtype=complex)
    totals = np.zeros(2)
    captured = np.zeros(2)
    synd_cap = [
        np.zeros((len(regions.sectors[k].labels), 2)) for k in range(s)
    ]

    for kop in noise.operators:
        damaged = [kop.mat @ v for v in inputs]
        for k in range(s):
            branch = []
            for mu in (0, 1):
                if circuit_mode:
                    w = damaged[mu] * mix[k]
                else:
                    w = np.where(parity_masks[k], damaged[mu], 0.0)
                branch.append(uf_conj * w)
            if max(np.vdot(w, w).real for w in branch) < 1e-28:
                continue
            rank_l, rank_r, cell, delta, frac_r, eb, ebd = boundary_tables[k]
            outs = []
            pcols = []
            pvals = []
            pders = []
            for mu in (0, 1):
                profile = branch[mu] * mods
                fs = np.fft.fft(profile, n_pts, axis=1)
                tot = gain @ (np.abs(fs) ** 2) / (2 * math.pi)
                pmat = (contractions[k] @ fs) / math.sqrt(2 * math.pi)
                out = np.empty_like(pmat)
                for rank, rec in enumerate(recoveries[k]):
                    sel = label_idx[k] == rank
                    out[:, sel] = rec @ pmat[:, sel]
                    synd_cap[k][rank, mu] += dX * float(
                        np.sum(np.abs(pmat[:, sel]) ** 2)
                    )
                totals[mu] += dX * float(tot.sum())
                captured[mu] += dX * float(np.sum(np.abs(pmat) ** 2))
                outs.append(out)
                pcols.append(pmat[:, cell])
                for b in range(cell.shape[0]):
                    w2 = dX * float(np.sum(np.abs(pmat[:, cell[b]]) ** 2))
                    r0 = label_idx[k][cell[b]]
                    synd_cap[k][r0, mu] -= w2
                    synd_cap[k][rank_l[b], mu] += (1 - frac_r[b]) * w2
                    synd_cap[k][rank_r[b], mu] += frac_r[b] * w2
                pvals.append(
                    (contractions[k] @ (profile @ eb.T)) / math.sqrt(2 * math.pi)
                )
                pders.append(
                    (contractions[k] @ (profile @ ebd.T)) / math.sqrt(2 * math.pi)
                )
            for mu in range(2):
                for nu in range(2):
                    proc[:, 2 * mu + nu] += dX * np.einsum(
                        "aj,bj->ab", outs[mu], np.conj(outs[nu])
                    ).reshape(4)
                    patch = np.zeros((2, 2), dtype=complex)
                    for b in range(cell.shape[0]):
                        r0 = label_idx[k][cell[b]]
                        cmu, cnu = pcols[mu][:, b], pcols[nu][:, b]
                        cells = {}
                        for r in (rank_l[b], rank_r[b], r0):
                            rec = recoveries[k][r]
                            cells[r] = np.outer(rec @ cmu, np.conj(rec @ cnu))
                        patch += dX * (
                            (1 - frac_r[b]) * cells[rank_l[b]]
                            + frac_r[b] * cells[rank_r[b]]
                            - cells[r0]
                        )
                        coef = delta[b] ** 2 / 2 - dX**2 / 6
                        vmu, vnu = pvals[mu][:, b], pvals[nu][:, b]
                        dmu, dnu = pders[mu][:, b], pders[nu][:, b]
                        slope = np.outer(vmu, np.conj(dnu)) + np.outer(
                            dmu, np.conj(vnu)
                        )
                        rl = recoveries[k][rank_l[b]]
                        rr = recoveries[k][rank_r[b]]
                        patch += coef * (
                            rl @ slope @ rl.conj().T - rr @ slope @ rr.conj().T
                        )
                    proc[:, 2 * mu + nu] += patch.reshape(4)

    input_leakage = totals - captured
    leakage = float(np.mean(input_leakage))
    syndromes = []
    for k in range(s):
        for rank, (i, m) in enumerate(regions.sectors[k].labels):
            cap0, cap1 = synd_cap[k][rank]
            syndromes.append(
                SyndromeOutcome(
                    k=k,
                    i=i,
                    m=m,
                    probability=0.5 * (cap0 + cap1),
                    input_probabilities=(float(cap0), float(cap1)),
                )
            )
    syndromes.sort(key=lambda so: -so.probability)

    choi = proc.reshape(2, 2, 2, 2).transpose(2, 0, 3, 1).reshape(4, 4)
    choi = (choi + choi.conj().T) / 2
    if np.linalg.eigvalsh(choi).min() < -1e-8:
        raise NumericalFailureError(
            "logical block is not completely positive; the accumulated "
            "process matrix is numerically inconsistent"
        )
    if leakage > 0.5:
        warnings.warn(
            f"leakage {leakage:.3f} exceeds 0.5; suspect a sign-convention "
            "or windowing mismatch between decoder and code",
            DecoderMismatchWarning,
        )
    return LogicalChannel(
        process=proc,
        leakage=leakage,
        syndromes=tuple(syndromes),
        input_totals=totals,
        input_leakage=input_leakage,
    )


def channel_fidelity(lc: LogicalChannel) -> float:
    """Entanglement fidelity to the identity; leakage counts fully against."""
    p = np.asarray(lc.process)
    return 0.25 * float(np.real(p[0, 0] + p[1, 1] + p[2, 2] + p[3, 3]))


def logical_trace(lc: LogicalChannel) -> float:
    """Trace retained by the logical block on the maximally mixed input."""
    p = np.asarray(lc.process)
    return 0.5 * float(np.real(p[0, 0] + p[3, 0] + p[0, 3] + p[3, 3]))


def near_optimal_qec(code: CodeParams, noise: KrausSet) -> LogicalChannel:
    """Logical channel under the transpose-channel recovery.

    Benchmarks the code itself rather than any measurement circuit: with P
    the projector onto the orthonormalized codewords and
    Sigma = sum_j N_j P N_j^dag, the recovery branches
    R_i = P N_i^dag Sigma^{-1/2} perform within a factor of two in
    infidelity of the best possible recovery for the given noise.  Unlike
    the teleportation cycle this carries no canonical-phase-measurement
    floor, so it isolates what the code can do in principle.

    The process matrix follows the teleport_qec convention.  All recovery
    branches land inside the code space, so the leakage entries are zero up
    to roundoff; no syndrome record exists because nothing is measured.
    """
    if noise.dim != code.dim:
        raise DimensionError(
            f"noise dim {noise.dim} does not match code dim {code.dim}"
        )
    frame = _orthonormal_logical_frame(build_codewords(code))
    images = [op.mat @ frame for op in noise.operators]
    sigma = np.zeros((code.dim, code.dim), dtype=complex)
    for img in images:
        sigma += img @ img.conj().T
    vals, vecs = np.linalg.eigh(sigma)
    if vals[-1] <= 0.0:
        raise NumericalFailureError(
            "noise annihilates the code subspace; transpose recovery undefined"
        )
    keep = vals > 1e-13 * vals[-1]
    # Sigma^{-1/2} = half @ half^dag restricted to the support of Sigma
    half = vecs[:, keep] * vals[keep] ** -0.25
    coords = np.stack([half.conj().T @ img for img in images])

    # The logical block of recovery-after-error branch (i, j) is
    # A_ij = C_i^dag C_j with C_i = half^dag N_i frame, so every process
    # entry collapses to a trace of two small Gram matrices
    # H_ab = sum_i C_i[:, a] C_i[:, b]^dag.
    n_kept = int(np.count_nonzero(keep))
    flat = coords.reshape(len(images), 2 * n_kept)
    gram = (flat.T @ flat.conj()).reshape(n_kept, 2, n_kept, 2)
    gram = gram.transpose(1, 3, 0, 2)
    proc = np.empty((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            for mu in range(2):
                for nu in range(2):
                    proc[2 * a + b, 2 * mu + nu] = np.trace(
                        gram[b, a] @ gram[mu, nu]
                    )

    choi = proc.reshape(2, 2, 2, 2).transpose(2, 0, 3, 1).reshape(4, 4)
    choi = (choi + choi.conj().T) / 2
    if np.linalg.eigvalsh(choi).min() < -1e-8:
        raise NumericalFailureError(
            "logical block is not completely positive; the accumulated "
            "process matrix is numerically inconsistent"
        )
    totals = np.array(
        [sum(np.sum(np.abs(img[:, mu]) ** 2) for img in images)
         for mu in range(2)]
    )
    captured = np.array(
        [
            float(np.real(proc[0, 0] + proc[3, 0])),
            float(np.real(proc[0, 3] + proc[3, 3])),
        ]
    )
    input_leakage = totals - captured
    return LogicalChannel(
        process=proc,
        leakage=float(np.mean(input_leakage)),
        syndromes=(),
        input_totals=totals,
        input_leakage=input_leakage,
    )


def near_optimal_fidelity(code: CodeParams, noise: KrausSet) -> float:
    """Entanglement fidelity of one cycle under the transpose recovery."""
    return channel_fidelity(near_optimal_qec(code, noise))


# ---------------------------------------------------------------------------
# correctable error set


@dataclass(frozen=True)
class CorrectableSet:
    """Shift window with its phase half-width, plus the pure-rotation set."""

    shifts: tuple
    phase_halfwidth: float
    windows: tuple
    pure_rotation: tuple


def correctable_set(code: CodeParams, G: int, L: int) -> CorrectableSet:
    """Correctable displacements: shifts in [-G, L], phases below pi/(2 d_N);
    alternatively pure rotations up to half the phase distance."""
    if G < 0 or L < 0:
        raise WindowError(f"window bounds must be non-negative, got G={G} L={L}")
    _require_window(code, G, L)
    half = math.pi / (2 * code.d_N)
    shifts = tuple(range(-G, L + 1))
    windows = tuple((l, (-half, half)) for l in shifts)
    return CorrectableSet(
        shifts=shifts,
        phase_halfwidth=half,
        windows=windows,
        pure_rotation=(0, (-code.d_phi / 2, code.d_phi / 2)),
    )


# ---------------------------------------------------------------------------
# coherent-ancilla parity readout validation


def parity_circuit_validation(code: CodeParams, alpha_anc: float, dims) -> np.ndarray:
    """Confusion matrix of the coherent-ancilla modular parity readout.

    Injects each parity k by shifting |+>_L, applies the doubled
    controlled-phase to a joint state with |alpha>, and bins the ancilla's
    canonical phase distribution into s sectors centered at 2 pi k'/s.
    Returns P(decoded k' | injected k) as an s x s matrix.
    """
    dim_d, dim_a = int(dims[0]), int(dims[1])
    if dim_d > 30 or dim_a > 30:
        raise ResourceGuardError(
            f"validation dims {dim_d}x{dim_a} exceed the 30x30 guard"
        )
    if alpha_anc <= 0:
        raise ValueError(f"alpha_anc must be positive, got {alpha_anc}")
    s = code.s
    if s == 1:
        return np.ones((1, 1))
    params = CodeParams(code.s, code.f, code.amplitude, dim=dim_d)
    plus = build_codewords(params, check_tail=False).plus.amps
    coh = coherent_state(alpha_anc, dim_a, check_tail=False).normalized().amps
    gate = controlled_phase(s, 1, (dim_d, dim_a))
    phases = np.diagonal(gate.mat).reshape(dim_d, dim_a)
    grid = PhaseGrid(4096)
    probe = np.exp(-1j * np.outer(grid.points, np.arange(dim_a))) / math.sqrt(
        2 * math.pi
    )
    sector = np.rint(grid.points * s / (2 * math.pi)).astype(int) % s
    confusion = np.zeros((s, s))
    for k in range(s):
        shifted = np.concatenate([plus[k:], np.zeros(k, dtype=complex)])
        shifted = shifted / np.linalg.norm(shifted)
        joint = np.outer(shifted, coh) * phases**2
        rho_anc = joint.T @ joint.conj()
        dist = np.real(np.einsum("jm,mn,jn->j", probe, rho_anc, probe.conj()))
        dist = np.clip(dist, 0.0, None) * grid.spacing
        np.add.at(confusion[k], sector, dist)
        confusion[k] /= confusion[k].sum()
    return confusion
