"""One-way repeater benchmark for number-phase lattice codes.

Each fiber hop of dimensionless length ``L0 = spacing/attenuation`` exposes
the code to loss ``Gamma = 1 - exp(-L0) + eps`` and dephasing
``Gamma_phi = h * Gamma``; one QEC cycle per hop yields a logical channel
that is Pauli-twirled and composed over all hops to score the link by its
error-accumulation rate or asymptotic secret-key rate per mode.

Two per-hop evaluators coexist.  ``accumulation_rate`` simulates the full
teleportation circuit, canonical phase measurement included, so it carries
that measurement's intrinsic misassignment floor (order 1e-2 per hop at
code energies below ten photons).  The key-rate chain instead scores the
code itself through the transpose-channel recovery, whose per-hop error at
a well-chosen code sits at the 1e-5..1e-4 level required before a
thousand-kilometer chain of thousands of hops can distill any key at all.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .codes import (
    BinomialAmplitudes,
    CodeParams,
    GaussianAmplitudes,
    binomial_K_for_nbar,
    gaussian_alpha_for_nbar,
)
from .errors import NPQECError, OptimizationFailedError, SpacingError
from .noise import NoiseParams, kraus_extract, lindblad_channel
from .qec import (
    LogicalChannel,
    QECConfig,
    channel_fidelity,
    near_optimal_qec,
    teleport_qec,
)

__all__ = [
    "RepeaterConfig",
    "SweepRecord",
    "CodeCandidate",
    "SearchSpace",
    "OptimizationResult",
    "effective_rates",
    "noise_exposures",
    "hop_channel",
    "near_optimal_hop",
    "accumulation_rate",
    "pauli_twirl",
    "compose_pauli",
    "binary_entropy",
    "skrpm_from_probs",
    "skrpm",
    "optimize_code",
]

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)
# sign(P, Q) = +1 when P and Q commute; rows/columns ordered I, X, Y, Z
_COMM_SIGNS = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, -1, -1, 1],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class RepeaterConfig:
    """Link geometry and per-hop imperfections of the one-way chain."""

    spacing_km: float
    total_km: float
    coupling_loss: float = 0.01
    dephasing_ratio: float = 0.1
    attenuation_km: float = 20.0
    cycle_time_us: float = 1.0

    def __post_init__(self):
        if self.spacing_km <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing_km}")
        if self.attenuation_km <= 0:
            raise ValueError(
                f"attenuation length must be positive, got {self.attenuation_km}"
            )
        if not 0.0 <= self.coupling_loss < 1.0:
            raise ValueError(
                f"coupling loss must lie in [0, 1), got {self.coupling_loss}"
            )
        if not 0.0 <= self.dephasing_ratio < 1.0:
            raise ValueError(
                f"dephasing ratio must lie in [0, 1), got {self.dephasing_ratio}"
            )
        if self.cycle_time_us <= 0:
            raise ValueError(
                f"cycle time must be positive, got {self.cycle_time_us}"
            )
        if self.n_hops < 1:
            raise ValueError(
                f"total {self.total_km} km holds no full hop of "
                f"{self.spacing_km} km"
            )

    @property
    def tilde_L0(self) -> float:
        return self.spacing_km / self.attenuation_km

    @property
    def n_hops(self) -> int:
        return int(round(self.total_km / self.spacing_km))


def effective_rates(cfg: RepeaterConfig):
    """Per-hop loss and dephasing probabilities (Gamma, Gamma_phi)."""
    gamma = 1.0 - math.exp(-cfg.tilde_L0) + cfg.coupling_loss
    if gamma >= 1.0:
        raise SpacingError(
            f"per-hop loss {gamma:.3f} reaches 1; shrink the repeater spacing"
        )
    return gamma, cfg.dephasing_ratio * gamma


def noise_exposures(cfg: RepeaterConfig) -> NoiseParams:
    """Channel exposures reproducing the per-hop probabilities."""
    gamma, gamma_phi = effective_rates(cfg)
    return NoiseParams(-math.log1p(-gamma), gamma_phi)


def hop_channel(
    code: CodeParams, cfg: RepeaterConfig, qec: QECConfig
) -> LogicalChannel:
    """Logical channel of one fiber hop followed by one teleport QEC cycle."""
    params = noise_exposures(cfg)
    kset = kraus_extract(lindblad_channel(params, code.dim))
    return teleport_qec(code, kset, qec)


def near_optimal_hop(code: CodeParams, cfg: RepeaterConfig) -> LogicalChannel:
    """Per-hop logical channel under the transpose-channel recovery."""
    params = noise_exposures(cfg)
    kset = kraus_extract(lindblad_channel(params, code.dim))
    return near_optimal_qec(code, kset)


def accumulation_rate(
    code: CodeParams, cfg: RepeaterConfig, qec: QECConfig
) -> float:
    """Error accumulation rate tau = (1 - F) / L0 of one hop."""
    fid = channel_fidelity(hop_channel(code, cfg, qec))
    return (1.0 - fid) / cfg.tilde_L0


def pauli_twirl(lc: LogicalChannel) -> np.ndarray:
    """Pauli-channel probabilities (p_I, p_X, p_Y, p_Z) of a logical block.

    Twirling keeps the diagonal chi elements lambda_P = Tr[P E(P)]/2; any
    trace lost to leakage is booked on p_Y, which corrupts both quadrature
    bases and is therefore the pessimistic assignment.
    """
    proc = np.asarray(lc.process)
    blocks = proc.reshape(2, 2, 2, 2)  # [a, b, mu, nu]
    lam = np.empty(4)
    for ip, pauli in enumerate(_PAULIS):
        image = np.einsum("abmn,mn->ab", blocks, pauli)
        lam[ip] = 0.5 * np.real(np.trace(pauli.conj().T @ image))
    probs = _COMM_SIGNS @ lam / 4.0
    probs = np.clip(probs, 0.0, None)
    probs[2] += max(0.0, 1.0 - probs.sum())
    return probs


def compose_pauli(probs: np.ndarray, n_hops: int) -> np.ndarray:
    """Probabilities of n_hops independent copies of a Pauli channel."""
    if n_hops < 0:
        raise ValueError(f"hop count must be non-negative, got {n_hops}")
    eta = _COMM_SIGNS @ np.asarray(probs, dtype=float)
    return _COMM_SIGNS @ (eta**n_hops) / 4.0


def binary_entropy(e: float) -> float:
    if e <= 0.0 or e >= 1.0:
        return 0.0
    return -e * math.log2(e) - (1.0 - e) * math.log2(1.0 - e)


def skrpm_from_probs(probs: np.ndarray) -> float:
    """Asymptotic BB84 key fraction of a Pauli channel, clamped at 0."""
    _, p_x, p_y, p_z = probs
    e_z = p_x + p_y
    e_x = p_z + p_y
    return max(0.0, 1.0 - binary_entropy(e_x) - binary_entropy(e_z))


def skrpm(code: CodeParams, cfg: RepeaterConfig, qec: QECConfig) -> float:
    """Secret key rate per mode of the full chain (1/t0 gives bits/s).

    The per-hop block is the transpose-recovery channel; the ``qec``
    argument stays in the signature for interface parity with the
    accumulation-rate scoring even though the benchmark recovery needs no
    measurement window.
    """
    probs = pauli_twirl(near_optimal_hop(code, cfg))
    return skrpm_from_probs(compose_pauli(probs, cfg.n_hops))


# ---------------------------------------------------------------------------
# code-parameter optimization


@dataclass(frozen=True)
class SweepRecord:
    """One evaluated configuration with every reported benchmark quantity."""

    s: int
    p: int
    q: int
    family: str
    alpha: float
    r: float
    nbar: float
    tilde_L0: float
    Gamma: float
    Gamma_phi: float
    fidelity: float
    tau: float
    skrpm: float

    def __post_init__(self):
        values = [
            self.nbar, self.tilde_L0, self.Gamma, self.Gamma_phi,
            self.fidelity, self.tau, self.skrpm,
        ]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("sweep record holds non-finite values")
        if not 0.0 <= self.skrpm <= 1.0:
            raise ValueError(f"skrpm must lie in [0, 1], got {self.skrpm}")

    @property
    def infidelity(self) -> float:
        return 1.0 - self.fidelity


@dataclass(frozen=True)
class CodeCandidate:
    """Discrete code identity: rotation order, shear fraction, family."""

    s: int
    f: object
    family: str

    def __post_init__(self):
        if self.family not in ("gaussian", "binomial"):
            raise ValueError(f"unknown amplitude family {self.family!r}")


@dataclass(frozen=True)
class SearchSpace:
    """Discrete candidates times a continuous (alpha, r) box.

    With ``nbar`` set the mean excitation is held fixed: gaussian codes keep
    r free and solve alpha from nbar, binomial codes have no free knob.
    Binomial candidates in free mode enumerate ``binomial_K`` instead.
    """

    candidates: tuple
    alpha_bounds: tuple = (1.0, 3.5)
    r_bounds: tuple = (0.0, 0.0)
    spacings_km: tuple = ()
    nbar: float = None
    binomial_K: tuple = ()


@dataclass(frozen=True)
class OptimizationResult:
    best: SweepRecord
    log: tuple
    seed: int


_OBJECTIVES = {
    "tau": lambda rec: rec.tau,
    "infidelity": lambda rec: rec.infidelity,
    "skrpm": lambda rec: -rec.skrpm,
}


def _evaluate(candidate, alpha, r, cfg, qec):
    family = (
        GaussianAmplitudes(alpha, r)
        if candidate.family == "gaussian"
        else BinomialAmplitudes(int(round(alpha)))
    )
    code = CodeParams(candidate.s, candidate.f, family)
    gamma, gamma_phi = effective_rates(cfg)
    lc = near_optimal_hop(code, cfg)
    fid = channel_fidelity(lc)
    key = skrpm_from_probs(compose_pauli(pauli_twirl(lc), cfg.n_hops))
    return SweepRecord(
        s=code.s,
        p=code.p,
        q=code.q,
        family=candidate.family,
        alpha=float(alpha),
        r=float(r),
        nbar=code.nbar_target,
        tilde_L0=cfg.tilde_L0,
        Gamma=gamma,
        Gamma_phi=gamma_phi,
        fidelity=fid,
        tau=(1.0 - fid) / cfg.tilde_L0,
        skrpm=key,
    )


def optimize_code(
    objective: str,
    space: SearchSpace,
    cfg: RepeaterConfig,
    qec: QECConfig,
    budget: int = 60,
    seed: int = 20260814,
) -> OptimizationResult:
    """Exhaustive discrete enumeration with simplex descent on (alpha, r).

    Every (candidate, spacing) pair runs a derivative-free Nelder-Mead
    search over the continuous box with three restarts seeded from
    ``seed``; ``budget`` caps objective evaluations per pair.  Evaluations
    that raise are logged as failures; if nothing succeeds the whole
    search fails.
    """
    if objective not in _OBJECTIVES:
        raise ValueError(
            f"objective must be one of {sorted(_OBJECTIVES)}, got {objective!r}"
        )
    if budget < 10:
        raise ValueError(f"budget must be at least 10, got {budget}")
    score = _OBJECTIVES[objective]
    rng = np.random.default_rng(seed)
    log = []
    failures = 0

    def run_point(candidate, alpha, r, local_cfg):
        nonlocal failures
        try:
            rec = _evaluate(candidate, alpha, r, local_cfg, qec)
        except (NPQECError, ValueError):
            failures += 1
            return None
        log.append(rec)
        return rec

    spacings = space.spacings_km if space.spacings_km else (cfg.spacing_km,)
    for candidate in space.candidates:
        for spacing in spacings:
            local_cfg = replace(cfg, spacing_km=spacing)
            if space.nbar is not None:
                if candidate.family == "binomial":
                    try:
                        K = binomial_K_for_nbar(candidate.s, space.nbar)
                    except ValueError:
                        failures += 1
                        continue
                    run_point(candidate, K, 0.0, local_cfg)
                    continue

                def cost_r(x):
                    rr = float(np.clip(x[0], *space.r_bounds))
                    try:
                        alpha = gaussian_alpha_for_nbar(
                            candidate.s, space.nbar, rr
                        )
                    except ValueError:
                        return 1e6
                    rec = run_point(candidate, alpha, rr, local_cfg)
                    return 1e6 if rec is None else score(rec)

                if space.r_bounds[0] == space.r_bounds[1]:
                    cost_r([space.r_bounds[0]])
                    continue
                per_restart = max(5, budget // 3)
                for _ in range(3):
                    x0 = [rng.uniform(*space.r_bounds)]
                    minimize(
                        cost_r,
                        x0,
                        method="Nelder-Mead",
                        options={"maxfev": per_restart, "xatol": 1e-3,
                                 "fatol": 1e-9},
                    )
                continue

            if candidate.family == "binomial":
                if not space.binomial_K:
                    raise ValueError(
                        "binomial candidates need nbar or binomial_K options"
                    )
                for K in space.binomial_K:
                    run_point(candidate, K, 0.0, local_cfg)
                continue

            def cost(x):
                alpha = float(np.clip(x[0], *space.alpha_bounds))
                rr = float(np.clip(x[1], *space.r_bounds))
                rec = run_point(candidate, alpha, rr, local_cfg)
                return 1e6 if rec is None else score(rec)

            per_restart = max(5, budget // 3)
            for _ in range(3):
                x0 = [
                    rng.uniform(*space.alpha_bounds),
                    rng.uniform(*space.r_bounds),
                ]
                minimize(
                    cost,
                    x0,
                    method="Nelder-Mead",
                    options={"maxfev": per_restart, "xatol": 1e-3,
                             "fatol": 1e-9},
                )

    if not log:
        raise OptimizationFailedError(
            f"all {failures} evaluations failed; nothing to report"
        )
    best = min(log, key=score)
    return OptimizationResult(best=best, log=tuple(log), seed=seed)
