"""Command-line benchmark harness.

One JSON configuration document drives every subcommand.  The schema is
strict — unknown keys anywhere are rejected before any computation — and
every emitted CSV embeds the canonical config plus its SHA-256 so a run can
be reproduced from its own output.  Exit codes: 0 success, 1 validation
failure, 2 config error, 3 numerical failure.

Subcommands
-----------
codes     text/JSON report: metrics, syndrome-table row, Fock amplitudes
lattice   codespace lattice points in the (number, phase) plane as CSV
wigner    quadrature Wigner function of |+>_L on a square grid as CSV
fidelity  one-cycle logical fidelity sweep as CSV
repeater  per-hop rates and secret-key rate per mode over distances as CSV
validate  named invariant suites (quick or full)

CSV conventions: UTF-8, LF line endings, header row after ``#``-prefixed
provenance comments, floats printed with 17 significant digits.  Sweep rows
are computed concurrently up to ``--jobs`` and written in input order; a
numerical failure flushes the rows already produced, appends a sentinel row
whose result columns are ``nan``, and exits with code 3.
"""

import argparse
import csv
import hashlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import validate as validate_mod
from .codes import (
    BinomialAmplitudes,
    CodeParams,
    GaussianAmplitudes,
    binomial_K_for_nbar,
    build_codewords,
    code_metrics,
    gaussian_alpha_for_nbar,
    lattice_points,
)
from .errors import NPQECError, TruncationError
from .fock import wigner_xp
from .noise import NoiseParams, kraus_extract, lindblad_channel
from .qec import QECConfig, channel_fidelity, near_optimal_qec
from .repeater import (
    RepeaterConfig,
    compose_pauli,
    effective_rates,
    near_optimal_hop,
    pauli_twirl,
    skrpm_from_probs,
)

DEFAULT_SEED = 20260814

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

FIDELITY_HEADER = (
    "code_type", "s", "p", "q", "alpha", "r", "nbar",
    "gamma_t", "kappa_t", "fidelity", "infidelity", "leakage", "seed",
)
REPEATER_HEADER = (
    "code_type", "s", "p", "q", "alpha", "r", "spacing_km", "distance_km",
    "Gamma", "Gamma_phi", "fidelity", "tau", "skrpm",
)

LATTICE_N_MAX = 10


class ConfigError(Exception):
    """The configuration document violates the schema or its invariants."""


# ---------------------------------------------------------------------------
# schema


def _check_keys(block, where, allowed, required=()):
    if not isinstance(block, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")
    missing = sorted(set(required) - set(block))
    if missing:
        raise ConfigError(f"missing key(s) {missing} in {where}")


def _as_int(block, key, where, minimum=None):
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}, got {value}")
    return value


def _as_float(block, key, where, minimum=None):
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    value = float(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key} must be >= {minimum}, got {value}")
    return value


def _as_float_list(block, key, where, minimum=None):
    value = block[key]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}.{key} must be a non-empty list")
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{where}.{key}[{i}] must be a number, got {item!r}")
        item = float(item)
        if minimum is not None and item < minimum:
            raise ConfigError(f"{where}.{key}[{i}] must be >= {minimum}")
        out.append(item)
    return out


def _as_rates(block, key, where):
    """gamma_t / kappa_t accept a single exposure or a list of them."""
    if isinstance(block[key], list):
        return _as_float_list(block, key, where, minimum=0.0)
    return [_as_float(block, key, where, minimum=0.0)]


@dataclass(frozen=True)
class CodeSpec:
    family: str
    s: int
    p: int
    q: int
    alpha: float
    r: float
    K: int

    @property
    def f(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class TruncationSpec:
    dim: int
    tail_tol: float


@dataclass(frozen=True)
class RepeaterSpec:
    spacing_km: float
    eps: float
    h: float
    t0_us: float
    distances_km: tuple


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated configuration document."""

    raw: dict
    code: CodeSpec
    truncation: TruncationSpec
    gamma_t: tuple
    kappa_t: tuple
    qec: QECConfig
    sweep_nbar: tuple
    sweep_alpha: tuple
    repeater: RepeaterSpec

    @property
    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json.encode("utf-8")).hexdigest()


def _parse_code(block):
    _check_keys(block, "code", ("type", "s", "p", "q", "amplitude"),
                ("type", "s", "p", "q", "amplitude"))
    family = block["type"]
    if family not in ("gaussian", "binomial"):
        raise ConfigError(f"code.type must be 'gaussian' or 'binomial', got {family!r}")
    s = _as_int(block, "s", "code", minimum=1)
    p = _as_int(block, "p", "code", minimum=0)
    q = _as_int(block, "q", "code", minimum=1)
    amp = block["amplitude"]
    alpha = r = None
    K = None
    if family == "gaussian":
        _check_keys(amp, "code.amplitude", ("alpha", "r"))
        alpha = _as_float(amp, "alpha", "code.amplitude", minimum=0.0) if "alpha" in amp else None
        r = _as_float(amp, "r", "code.amplitude") if "r" in amp else 0.0
    else:
        _check_keys(amp, "code.amplitude", ("K",))
        K = _as_int(amp, "K", "code.amplitude", minimum=1) if "K" in amp else None
        r = 0.0
    return CodeSpec(family=family, s=s, p=p, q=q, alpha=alpha, r=r, K=K)


def _parse_truncation(block):
    if block is None:
        return TruncationSpec(dim=None, tail_tol=None)
    _check_keys(block, "truncation", ("dim", "auto", "tail_tol"))
    if "dim" in block and ("auto" in block or "tail_tol" in block):
        raise ConfigError("truncation.dim excludes truncation.auto/tail_tol")
    if "dim" in block:
        return TruncationSpec(dim=_as_int(block, "dim", "truncation", minimum=2),
                              tail_tol=None)
    if block.get("auto") is not True:
        raise ConfigError("truncation needs either dim or \"auto\": true")
    tol = _as_float(block, "tail_tol", "truncation", minimum=0.0) if "tail_tol" in block else None
    return TruncationSpec(dim=None, tail_tol=tol)


def _parse_qec(block):
    if block is None:
        return None
    _check_keys(block, "qec", ("G", "L", "phase_points", "parity_mode", "ancilla"),
                ("G", "L"))
    kwargs = {"G": _as_int(block, "G", "qec", minimum=0),
              "L": _as_int(block, "L", "qec", minimum=0)}
    if "phase_points" in block:
        kwargs["phase_points"] = _as_int(block, "phase_points", "qec", minimum=256)
    if "parity_mode" in block:
        kwargs["parity_mode"] = block["parity_mode"]
    if "ancilla" in block and block["ancilla"] is not None:
        spec = _parse_code(block["ancilla"])
        kwargs["ancilla"] = _build_code(spec, TruncationSpec(None, None))
    try:
        return QECConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"qec block rejected: {exc}") from exc


def _parse_sweep(block):
    if block is None:
        return (), ()
    _check_keys(block, "sweep", ("nbar", "alpha"))
    if ("nbar" in block) == ("alpha" in block):
        raise ConfigError("sweep needs exactly one of nbar or alpha")
    if "nbar" in block:
        return tuple(_as_float_list(block, "nbar", "sweep", minimum=0.0)), ()
    return (), tuple(_as_float_list(block, "alpha", "sweep", minimum=0.0))


def _parse_repeater(block):
    if block is None:
        return None
    _check_keys(block, "repeater", ("spacing_km", "eps", "h", "t0_us", "distances_km"),
                ("spacing_km", "eps", "h", "distances_km"))
    spacing = _as_float(block, "spacing_km", "repeater")
    if spacing <= 0:
        raise ConfigError("repeater.spacing_km must be positive")
    eps = _as_float(block, "eps", "repeater", minimum=0.0)
    h = _as_float(block, "h", "repeater", minimum=0.0)
    t0 = _as_float(block, "t0_us", "repeater") if "t0_us" in block else 1.0
    if t0 <= 0:
        raise ConfigError("repeater.t0_us must be positive")
    distances = _as_float_list(block, "distances_km", "repeater", minimum=0.0)
    for d in distances:
        hops = round(d / spacing)
        if abs(hops * spacing - d) > 1e-9 * max(1.0, d):
            raise ConfigError(
                f"distance {d} km is not a whole number of {spacing} km hops"
            )
    return RepeaterSpec(spacing_km=spacing, eps=eps, h=h, t0_us=t0,
                        distances_km=tuple(distances))


def parse_config(document: str) -> RunConfig:
    """Parse and schema-check one JSON configuration document."""
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    _check_keys(raw, "config",
                ("code", "truncation", "noise", "qec", "sweep", "repeater"),
                ("code",))
    code = _parse_code(raw["code"])
    truncation = _parse_truncation(raw.get("truncation"))
    gamma_t = kappa_t = ()
    if "noise" in raw:
        _check_keys(raw["noise"], "noise", ("gamma_t", "kappa_t"),
                    ("gamma_t", "kappa_t"))
        gamma_t = tuple(_as_rates(raw["noise"], "gamma_t", "noise"))
        kappa_t = tuple(_as_rates(raw["noise"], "kappa_t", "noise"))
    qec_cfg = _parse_qec(raw.get("qec"))
    sweep_nbar, sweep_alpha = _parse_sweep(raw.get("sweep"))
    repeater_spec = _parse_repeater(raw.get("repeater"))
    return RunConfig(raw=raw, code=code, truncation=truncation,
                     gamma_t=gamma_t, kappa_t=kappa_t, qec=qec_cfg,
                     sweep_nbar=sweep_nbar, sweep_alpha=sweep_alpha,
                     repeater=repeater_spec)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(document)


# ---------------------------------------------------------------------------
# code construction


def _build_code(spec: CodeSpec, truncation: TruncationSpec,
                alpha=None, K=None) -> CodeParams:
    """Concrete CodeParams; sweep values override the amplitude block."""
    if spec.family == "gaussian":
        alpha = spec.alpha if alpha is None else alpha
        if alpha is None:
            raise ConfigError("code.amplitude.alpha is required here "
                              "(no sweep value supplies it)")
        amp = GaussianAmplitudes(alpha, spec.r)
    else:
        K = spec.K if K is None else K
        if K is None:
            raise ConfigError("code.amplitude.K is required here "
                              "(no sweep value supplies it)")
        amp = BinomialAmplitudes(K)
    try:
        return CodeParams(spec.s, spec.f, amp, dim=truncation.dim)
    except ValueError as exc:
        raise ConfigError(f"code block rejected: {exc}") from exc


def _check_tail(code: CodeParams, tail_tol):
    """Extra pre-flight tail bound on top of the library default."""
    if tail_tol is None:
        return
    basis = build_codewords(code, check_tail=False)
    levels = max(5, code.s)
    worst = max(basis.plus.tail_mass(levels), basis.minus.tail_mass(levels))
    if worst > tail_tol:
        raise TruncationError(
            f"codeword tail mass {worst:.3e} exceeds configured "
            f"tail_tol {tail_tol:.3e} at dim={code.dim}",
            tail_mass=worst,
        )


def _amplitude_label(spec: CodeSpec) -> str:
    if spec.family == "binomial":
        return "sqrt(2^-K binom(K, n))"
    return "<n|alpha,r>"


def _lattice_label(spec: CodeSpec) -> str:
    f = spec.f
    if f == 0:
        return "Rect."
    if spec.s == 1:
        return "Obl."
    if f == Fraction(1, 2):
        return "Diam."
    return "Gen."


def _syndrome_column(spec: CodeSpec) -> str:
    if spec.f == 0:
        return "(k, phi_e)"
    if spec.s == 1:
        return "(0, m f pi + phi_e)"
    return "(k, m f pi/s + phi_e)"


# ---------------------------------------------------------------------------
# CSV plumbing


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_preamble(fh, cfg: RunConfig, seed, header):
    fh.write(f"# config_sha256={cfg.sha256}\n")
    fh.write(f"# config={cfg.canonical_json}\n")
    fh.write(f"# seed={seed}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    return writer


def _fmt(value) -> str:
    return format(float(value), ".16e")


# ---------------------------------------------------------------------------
# fidelity sweep


def _fidelity_points(cfg: RunConfig):
    """Expand sweep x gamma_t x kappa_t into picklable work items."""
    spec = cfg.code
    points = []
    if cfg.sweep_nbar:
        for nbar in cfg.sweep_nbar:
            if spec.family == "gaussian":
                try:
                    alpha = gaussian_alpha_for_nbar(spec.s, nbar, spec.r)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
                points.append((alpha, None))
            else:
                try:
                    points.append((None, binomial_K_for_nbar(spec.s, nbar)))
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
    else:
        if spec.family != "gaussian":
            raise ConfigError("sweep.alpha applies to gaussian amplitudes only")
        points = [(alpha, None) for alpha in cfg.sweep_alpha]
    work = []
    for alpha, K in points:
        for gamma in cfg.gamma_t:
            for kappa in cfg.kappa_t:
                work.append((spec.family, spec.s, spec.p, spec.q, alpha, spec.r,
                             K, gamma, kappa, cfg.truncation.dim,
                             cfg.truncation.tail_tol))
    return work


def _fidelity_worker(item):
    """One sweep row; returns ("ok", row floats) or ("err", name, message)."""
    family, s, p, q, alpha, r, K, gamma, kappa, dim, tail_tol = item
    spec = CodeSpec(family=family, s=s, p=p, q=q, alpha=alpha, r=r, K=K)
    try:
        code = _build_code(spec, TruncationSpec(dim=dim, tail_tol=tail_tol))
        _check_tail(code, tail_tol)
        kset = kraus_extract(lindblad_channel(NoiseParams(gamma, kappa), code.dim))
        lc = near_optimal_qec(code, kset)
        fid = channel_fidelity(lc)
        nbar = code_metrics(code).nbar
    except (NPQECError, ConfigError) as exc:
        return ("err", type(exc).__name__, str(exc))
    return ("ok", nbar, fid, 1.0 - fid, lc.leakage)


def _preflight(work):
    """Reject config-level point failures before any output file exists.

    Numerical failures (insufficient truncation and the like) are left for
    the workers so they land in the CSV as a sentinel row.
    """
    for item in work:
        family, s, p, q, alpha, r, K, _, _, dim, tail_tol = item
        spec = CodeSpec(family=family, s=s, p=p, q=q, alpha=alpha, r=r, K=K)
        try:
            _build_code(spec, TruncationSpec(dim=dim, tail_tol=tail_tol))
        except NPQECError:
            pass


def _fidelity_row(spec: CodeSpec, item, seed, nbar, fid, infid, leak):
    alpha = item[4] if item[4] is not None else float(item[6])
    return (spec.family, spec.s, spec.p, spec.q, _fmt(alpha), _fmt(item[5]),
            _fmt(nbar), _fmt(item[7]), _fmt(item[8]),
            _fmt(fid), _fmt(infid), _fmt(leak), seed)


def cmd_fidelity(cfg: RunConfig, out, seed, jobs) -> int:
    """One-cycle logical fidelity per sweep point under the configured noise."""
    if not (cfg.sweep_nbar or cfg.sweep_alpha):
        raise ConfigError("fidelity needs a sweep block")
    if not cfg.gamma_t:
        raise ConfigError("fidelity needs a noise block")
    work = _fidelity_points(cfg)
    _preflight(work)
    fh, owns = _open_out(out)
    status = EXIT_OK
    try:
        writer = _write_preamble(fh, cfg, seed, FIDELITY_HEADER)
        if jobs > 1:
            executor = ProcessPoolExecutor(max_workers=jobs)
            results = executor.map(_fidelity_worker, work)
        else:
            executor = None
            results = map(_fidelity_worker, work)
        try:
            for index, (item, result) in enumerate(zip(work, results)):
                if result[0] == "ok":
                    _, nbar, fid, infid, leak = result
                    writer.writerow(
                        _fidelity_row(cfg.code, item, seed, nbar, fid, infid, leak)
                    )
                    continue
                sentinel_nbar = float("nan")
                alpha = item[4] if item[4] is not None else float(item[6])
                writer.writerow(
                    (cfg.code.family, cfg.code.s, cfg.code.p, cfg.code.q,
                     _fmt(alpha), _fmt(item[5]), _fmt(sentinel_nbar),
                     _fmt(item[7]), _fmt(item[8]), _fmt(float("nan")),
                     _fmt(float("nan")), _fmt(float("nan")), seed)
                )
                fh.write(f"# numerical-failure at row {index}: {result[1]}: {result[2]}\n")
                status = EXIT_NUMERICAL
                break
        finally:
            if executor is not None:
                executor.shutdown(cancel_futures=True)
    finally:
        if owns:
            fh.close()
    return status


# ---------------------------------------------------------------------------
# repeater sweep


def cmd_repeater(cfg: RunConfig, out, seed, jobs) -> int:
    """Per-hop logical channel composed over each total distance."""
    spec = cfg.repeater
    if spec is None:
        raise ConfigError("repeater needs a repeater block")
    code = _build_code(cfg.code, cfg.truncation)
    _check_tail(code, cfg.truncation.tail_tol)
    try:
        hop_cfg = RepeaterConfig(
            spacing_km=spec.spacing_km,
            total_km=spec.spacing_km,
            coupling_loss=spec.eps,
            dephasing_ratio=spec.h,
            cycle_time_us=spec.t0_us,
        )
    except ValueError as exc:
        raise ConfigError(f"repeater block rejected: {exc}") from exc
    gamma, gamma_phi = effective_rates(hop_cfg)
    lc = near_optimal_hop(code, hop_cfg)
    fid = channel_fidelity(lc)
    tau = (1.0 - fid) / hop_cfg.tilde_L0
    probs = pauli_twirl(lc)
    alpha = cfg.code.alpha if cfg.code.family == "gaussian" else float(cfg.code.K)
    fh, owns = _open_out(out)
    try:
        writer = _write_preamble(fh, cfg, seed, REPEATER_HEADER)
        for distance in spec.distances_km:
            n_hops = round(distance / spec.spacing_km)
            key = skrpm_from_probs(compose_pauli(probs, n_hops))
            writer.writerow(
                (cfg.code.family, cfg.code.s, cfg.code.p, cfg.code.q,
                 _fmt(alpha), _fmt(cfg.code.r), _fmt(spec.spacing_km),
                 _fmt(distance), _fmt(gamma), _fmt(gamma_phi),
                 _fmt(fid), _fmt(tau), _fmt(key))
            )
    finally:
        if owns:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# code report


def cmd_codes(cfg: RunConfig, out, seed, jobs) -> int:
    """Report metrics, the syndrome-table row and the Fock amplitudes."""
    code = _build_code(cfg.code, cfg.truncation)
    _check_tail(code, cfg.truncation.tail_tol)
    metrics = code_metrics(code)
    spec = cfg.code
    theta = code.theta()
    theta = theta / np.linalg.norm(theta)
    levels = [int(code.s * n) for n in range(theta.shape[0])]
    lattice = _lattice_label(spec)
    syndrome = _syndrome_column(spec)
    lines = [
        "number-phase code report",
        f"  family      {spec.family}",
        f"  lattice     {lattice}",
        f"  s           {spec.s}",
        f"  f           {spec.p}/{spec.q}",
        f"  d_N         {metrics.d_N}",
        f"  d_phi       {metrics.d_phi!r} (pi/{spec.s})",
        f"  nbar        {metrics.nbar!r}",
        f"  delta_phi   {metrics.delta_phi!r}",
        f"  overlap     {metrics.overlap!r}",
        f"  dim         {code.dim}",
        "",
        "syndrome-table row:",
        f"  {lattice} | s={spec.s} | f={spec.p}/{spec.q} | "
        f"{_amplitude_label(spec)} | {syndrome}",
        "",
        "fock amplitudes (level: theta_n):",
    ]
    lines += [f"  {lvl:4d}: {float(amp)!r}" for lvl, amp in zip(levels, theta.real)]
    report = "\n".join(lines)
    print(report)
    if out is not None:
        payload = {
            "config_sha256": cfg.sha256,
            "seed": seed,
            "family": spec.family,
            "lattice": lattice,
            "s": spec.s,
            "f": [spec.p, spec.q],
            "d_N": metrics.d_N,
            "d_phi": metrics.d_phi,
            "nbar": metrics.nbar,
            "delta_phi": metrics.delta_phi,
            "overlap": metrics.overlap,
            "dim": code.dim,
            "syndrome_row": syndrome,
            "amplitudes": [[lvl, float(amp)] for lvl, amp in zip(levels, theta.real)],
        }
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# lattice and wigner grids


def cmd_lattice(cfg: RunConfig, out, seed, jobs) -> int:
    """Codespace lattice points with number coordinate up to 10."""
    spec = cfg.code
    points = lattice_points(spec.s, spec.f, n_max=LATTICE_N_MAX)
    fh, owns = _open_out(out)
    try:
        writer = _write_preamble(fh, cfg, seed, ("n", "phase"))
        for n_coord, phase in points:
            writer.writerow((_fmt(n_coord), _fmt(phase)))
    finally:
        if owns:
            fh.close()
    return EXIT_OK


def cmd_wigner(cfg: RunConfig, out, seed, jobs) -> int:
    """Wigner function of |+>_L on a grid sized from the code energy."""
    code = _build_code(cfg.code, cfg.truncation)
    _check_tail(code, cfg.truncation.tail_tol)
    basis = build_codewords(code)
    half = math.ceil(2.0 * math.sqrt(code_metrics(code).nbar + 1.0))
    axis = np.linspace(-half, half, 16 * half + 1)
    grid = wigner_xp(basis.plus, axis, axis)
    fh, owns = _open_out(out)
    try:
        writer = _write_preamble(fh, cfg, seed, ("x", "p", "w"))
        for i, x in enumerate(axis):
            for j, p_val in enumerate(axis):
                writer.writerow((_fmt(x), _fmt(p_val), _fmt(grid[i, j])))
    finally:
        if owns:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# validation


def cmd_validate(level, out) -> int:
    """Run the named invariant suites and print one line per check."""
    artifact = out if out is not None else "fig4a_sweep.csv"
    results = validate_mod.run_checks(level, artifact_path=artifact)
    print(validate_mod.format_report(results))
    if all(res.passed for res in results):
        return EXIT_OK
    return EXIT_VALIDATION


# ---------------------------------------------------------------------------
# entry point


def _add_common(parser, needs_config=True):
    parser.add_argument("--config", required=needs_config,
                        help="path to the JSON configuration document")
    parser.add_argument("--out", default=None, help="output path (default: stdout)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help="seed recorded in output provenance")
    parser.add_argument("--jobs", type=int, default=1,
                        help="concurrent sweep evaluations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npqec",
        description="benchmark harness for number-phase lattice bosonic codes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("codes", "code metrics, syndrome-table row and Fock amplitudes"),
        ("lattice", "codespace lattice points as CSV"),
        ("wigner", "Wigner function grid of |+>_L as CSV"),
        ("fidelity", "one-cycle logical fidelity sweep as CSV"),
        ("repeater", "repeater rates and secret-key rate per mode as CSV"),
    ):
        _add_common(sub.add_parser(name, help=text))
    val = sub.add_parser("validate", help="run the named invariant suites")
    val.add_argument("--level", choices=("quick", "full"), default="quick")
    val.add_argument("--out", default=None,
                     help="path for the full-level sweep artifact")
    return parser


_COMMANDS = {
    "codes": cmd_codes,
    "lattice": cmd_lattice,
    "wigner": cmd_wigner,
    "fidelity": cmd_fidelity,
    "repeater": cmd_repeater,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.level, args.out)
    if args.jobs < 1:
        print("config error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](cfg, args.out, args.seed, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NPQECError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
