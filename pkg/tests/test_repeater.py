import math
from fractions import Fraction

import numpy as np
import pytest

import npqec.repeater
from npqec.codes import BinomialAmplitudes, CodeParams, GaussianAmplitudes
from npqec.errors import OptimizationFailedError, SpacingError
from npqec.qec import LogicalChannel, QECConfig
from npqec.repeater import (
    CodeCandidate,
    OptimizationResult,
    RepeaterConfig,
    SearchSpace,
    accumulation_rate,
    binary_entropy,
    compose_pauli,
    effective_rates,
    hop_channel,
    near_optimal_hop,
    noise_exposures,
    optimize_code,
    pauli_twirl,
    skrpm,
    skrpm_from_probs,
)

PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def pauli_process(probs):
    """Process matrix of E(rho) = sum_Q p_Q Q rho Q."""
    proc = np.zeros((4, 4), dtype=complex)
    for mu in range(2):
        for nu in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[mu, nu] = 1.0
            out = sum(
                p * q @ unit @ q.conj().T for p, q in zip(probs, PAULIS)
            )
            proc[:, 2 * mu + nu] = out.reshape(4)
    return proc


def small_chain(**overrides):
    kwargs = dict(
        spacing_km=1.0,
        total_km=200.0,
        coupling_loss=0.01,
        dephasing_ratio=0.1,
    )
    kwargs.update(overrides)
    return RepeaterConfig(**kwargs)


class TestRepeaterConfig:
    def test_dimensionless_spacing(self):
        assert small_chain().tilde_L0 == pytest.approx(0.05)

    def test_hop_count_rounds(self):
        assert small_chain(spacing_km=2.0, total_km=5.0).n_hops == 2

    def test_zero_spacing_rejected(self):
        with pytest.raises(ValueError):
            small_chain(spacing_km=0.0)

    def test_full_coupling_loss_rejected(self):
        with pytest.raises(ValueError):
            small_chain(coupling_loss=1.0)

    def test_dephasing_ratio_below_one(self):
        with pytest.raises(ValueError):
            small_chain(dephasing_ratio=1.2)

    def test_zero_cycle_time_rejected(self):
        with pytest.raises(ValueError):
            small_chain(cycle_time_us=0.0)

    def test_chain_needs_one_hop(self):
        with pytest.raises(ValueError):
            small_chain(spacing_km=10.0, total_km=4.0)


class TestEffectiveRates:
    def test_loss_anchor(self):
        gamma, _ = effective_rates(small_chain())
        assert gamma == pytest.approx(1 - math.exp(-0.05) + 0.01, abs=1e-12)
        assert gamma == pytest.approx(0.058771, abs=1e-6)

    def test_dephasing_follows_ratio(self):
        gamma, gamma_phi = effective_rates(small_chain())
        assert gamma_phi == pytest.approx(0.1 * gamma, abs=1e-15)
        assert gamma_phi == pytest.approx(0.00588, abs=1e-5)

    def test_short_clean_hop_is_lossless(self):
        gamma, _ = effective_rates(
            small_chain(spacing_km=1e-6, total_km=1e-6, coupling_loss=0.0)
        )
        assert gamma == pytest.approx(0.0, abs=1e-7)

    def test_oversized_spacing_rejected(self):
        with pytest.raises(SpacingError):
            effective_rates(small_chain(spacing_km=100.0, total_km=200.0))

    def test_exposures_invert_the_loss(self):
        cfg = small_chain()
        gamma, gamma_phi = effective_rates(cfg)
        params = noise_exposures(cfg)
        assert 1 - math.exp(-params.gamma_t) == pytest.approx(gamma, abs=1e-12)
        assert params.kappa_t == pytest.approx(gamma_phi, abs=1e-15)


class TestPauliTwirl:
    def test_identity_channel(self):
        proc = pauli_process([1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(
            pauli_twirl(LogicalChannel(process=proc)),
            [1, 0, 0, 0],
            atol=1e-14,
        )

    def test_pauli_channel_roundtrip(self, rng):
        for _ in range(5):
            probs = rng.dirichlet(np.ones(4))
            lc = LogicalChannel(process=pauli_process(probs))
            np.testing.assert_allclose(pauli_twirl(lc), probs, atol=1e-12)

    def test_amplitude_damping_twirl(self):
        gamma = 0.2
        k0 = np.diag([1.0, math.sqrt(1 - gamma)])
        k1 = np.array([[0.0, math.sqrt(gamma)], [0.0, 0.0]])
        proc = np.zeros((4, 4), dtype=complex)
        for mu in range(2):
            for nu in range(2):
                unit = np.zeros((2, 2), dtype=complex)
                unit[mu, nu] = 1.0
                out = sum(k @ unit @ k.conj().T for k in (k0, k1))
                proc[:, 2 * mu + nu] = out.reshape(4)
        probs = pauli_twirl(LogicalChannel(process=proc))
        root = math.sqrt(1 - gamma)
        lam = np.array([1.0, root, root, 1 - gamma])
        w = np.array(
            [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]],
            dtype=float,
        )
        np.testing.assert_allclose(probs, w @ lam / 4, atol=1e-12)

    def test_leakage_booked_as_y(self):
        proc = 0.9 * pauli_process([1.0, 0.0, 0.0, 0.0])
        probs = pauli_twirl(LogicalChannel(process=proc, leakage=0.1))
        np.testing.assert_allclose(probs, [0.9, 0.0, 0.1, 0.0], atol=1e-12)


class TestComposePauli:
    @pytest.mark.parametrize("n_hops", [1, 2, 3, 5])
    def test_matches_process_matrix_power(self, rng, n_hops):
        probs = rng.dirichlet(np.array([20.0, 1.0, 1.0, 1.0]))
        brute = np.linalg.matrix_power(pauli_process(probs), n_hops)
        expected = pauli_twirl(LogicalChannel(process=brute))
        np.testing.assert_allclose(
            compose_pauli(probs, n_hops), expected, atol=1e-10
        )

    def test_zero_hops_is_identity(self):
        out = compose_pauli([0.7, 0.1, 0.1, 0.1], 0)
        np.testing.assert_allclose(out, [1, 0, 0, 0], atol=1e-14)

    def test_negative_hops_rejected(self):
        with pytest.raises(ValueError):
            compose_pauli([1, 0, 0, 0], -1)


class TestKeyRate:
    def test_entropy_symmetry(self, rng):
        for e in rng.uniform(0.0, 1.0, size=10):
            assert binary_entropy(e) == pytest.approx(
                binary_entropy(1 - e), abs=1e-12
            )
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0)

    def test_perfect_channel_any_length(self):
        probs = np.array([1.0, 0.0, 0.0, 0.0])
        for n_hops in (1, 10, 1000):
            assert skrpm_from_probs(compose_pauli(probs, n_hops)) == 1.0

    def test_symmetric_qber_twelve_percent_gives_zero(self):
        probs = np.array([0.76, 0.12, 0.0, 0.12])
        assert skrpm_from_probs(probs) == 0.0

    def test_key_degrades_with_distance(self):
        hop = np.array([0.996, 0.002, 0.001, 0.001])
        rates = [
            skrpm_from_probs(compose_pauli(hop, n)) for n in (1, 4, 16, 64)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(rates, rates[1:]))
        assert rates[0] > rates[-1]


class TestHopPipeline:
    def test_accumulation_diverges_at_tight_spacing(self):
        code = CodeParams(2, Fraction(1, 2), BinomialAmplitudes(3), dim=12)
        qec = QECConfig(G=1, L=2, phase_points=1024)
        taus = []
        for tilde in (0.01, 0.05, 0.25):
            cfg = small_chain(spacing_km=20 * tilde)
            taus.append(accumulation_rate(code, cfg, qec))
        assert taus[0] > taus[1] > taus[2]

    def test_interior_optimal_spacing_for_large_code(self):
        code = CodeParams(2, Fraction(1, 2), GaussianAmplitudes(3.0, 0.0))
        qec = QECConfig(G=0, L=3, phase_points=1024)
        taus = [
            accumulation_rate(code, small_chain(spacing_km=20 * t), qec)
            for t in (0.002, 0.005, 0.02)
        ]
        assert taus[1] < taus[0]
        assert taus[1] < taus[2]

    def test_perfect_cycle_accumulates_nothing(self, monkeypatch):
        monkeypatch.setattr(npqec.repeater, "channel_fidelity", lambda lc: 1.0)
        code = CodeParams(2, Fraction(1, 2), BinomialAmplitudes(3), dim=12)
        qec = QECConfig(G=1, L=2, phase_points=1024)
        assert accumulation_rate(code, small_chain(), qec) == 0.0

    def test_short_clean_chain_keeps_key(self):
        code = CodeParams(2, Fraction(1, 2), GaussianAmplitudes(3.0, 0.0))
        qec = QECConfig(G=0, L=3, phase_points=1024)
        cfg = small_chain(
            spacing_km=0.2, total_km=2.0, coupling_loss=0.001
        )
        value = skrpm(code, cfg, qec)
        assert value > 0.5
        hop = pauli_twirl(near_optimal_hop(code, cfg))
        assert value == pytest.approx(
            skrpm_from_probs(compose_pauli(hop, cfg.n_hops)), abs=1e-12
        )
        # the benchmark recovery can only improve on the measured circuit
        circuit_hop = pauli_twirl(hop_channel(code, cfg, qec))
        assert hop[0] >= circuit_hop[0] - 1e-12


class TestOptimizeCode:
    def test_single_point_space(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "binomial"),),
            nbar=3.0,
        )
        qec = QECConfig(G=1, L=2, phase_points=1024)
        result = optimize_code("infidelity", space, small_chain(), qec, budget=10)
        assert isinstance(result, OptimizationResult)
        assert len(result.log) == 1
        assert result.best == result.log[0]
        assert result.best.family == "binomial"
        assert result.best.nbar == pytest.approx(3.0)

    def test_argmin_contract_and_determinism(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "binomial"),),
            binomial_K=(2, 3, 4),
        )
        qec = QECConfig(G=1, L=2, phase_points=1024)
        first = optimize_code("tau", space, small_chain(), qec, budget=10)
        assert all(first.best.tau <= rec.tau for rec in first.log)
        again = optimize_code("tau", space, small_chain(), qec, budget=10)
        assert [rec.tau for rec in again.log] == [rec.tau for rec in first.log]

    def test_squeezing_search_improves_on_endpoint(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "gaussian"),),
            nbar=6.0,
            r_bounds=(0.0, 0.4),
        )
        qec = QECConfig(G=0, L=3, phase_points=1024)
        result = optimize_code(
            "infidelity", space, small_chain(), qec, budget=12
        )
        assert len(result.log) >= 10
        assert 0.0 <= result.best.r <= 0.4
        assert all(
            result.best.infidelity <= rec.infidelity for rec in result.log
        )

    def test_budget_floor(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "binomial"),),
            nbar=3.0,
        )
        with pytest.raises(ValueError):
            optimize_code(
                "tau", space, small_chain(), QECConfig(G=1, L=2), budget=5
            )

    def test_unknown_objective(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "binomial"),),
            nbar=3.0,
        )
        with pytest.raises(ValueError):
            optimize_code(
                "speed", space, small_chain(), QECConfig(G=1, L=2), budget=10
            )

    def test_unreachable_space_fails_loudly(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "binomial"),),
            nbar=3.3,  # not on the binomial ladder for s=2
        )
        with pytest.raises(OptimizationFailedError):
            optimize_code(
                "tau", space, small_chain(), QECConfig(G=1, L=2), budget=10
            )

    def test_binomial_free_mode_needs_options(self):
        space = SearchSpace(
            candidates=(CodeCandidate(2, Fraction(1, 2), "binomial"),),
        )
        with pytest.raises(ValueError):
            optimize_code(
                "tau", space, small_chain(), QECConfig(G=1, L=2), budget=10
            )
