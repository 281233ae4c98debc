import math

import numpy as np
import pytest

import oracles
from spinorbit.errors import ConfigError
from spinorbit.experiments import (
    CountRecord,
    ExperimentConfig,
    Mode,
    classical_power_fraction,
    expected_counts,
    hybrid_target_state,
    measure_pair,
    mean_counts,
    noisy_probability,
    pair_rate_for_peak,
    nonlocal_pair_state,
    prepared_single_state,
    probability_pair,
    probability_single,
    simulate_counts,
    to_reflected_b_frame,
)
from spinorbit.hilbert import fidelity

GRID64 = np.linspace(0, np.pi, 64, endpoint=False)
GRID16 = np.linspace(-np.pi / 2, np.pi / 2, 16)


def law(theta, chi):
    return 0.5 * math.cos(theta - 2 * chi) ** 2


class TestProbabilitySingle:
    def test_dark(self):
        assert probability_single(0, math.pi / 4) == pytest.approx(0, abs=1e-15)

    def test_bright(self):
        assert probability_single(0, 0) == pytest.approx(0.5, abs=1e-15)

    def test_diagonal(self):
        assert probability_single(math.pi / 4, math.pi / 8) == pytest.approx(0.5, abs=1e-15)

    def test_law_on_64x64_grid(self):
        err = max(abs(probability_single(t, c) - law(t, c)) for t in GRID64 for c in GRID64)
        assert err < 1e-12

    def test_dense_oracle(self):
        for t in GRID16:
            for c in GRID16:
                assert probability_single(t, c) == pytest.approx(oracles.single_photon_probability(t, c), abs=1e-14)

    def test_periods(self):
        for t in GRID16:
            for c in GRID16:
                p = probability_single(t, c)
                assert probability_single(t, c + math.pi / 2) == pytest.approx(p, abs=1e-14)
                assert probability_single(t + math.pi, c) == pytest.approx(p, abs=1e-14)

    def test_complementarity(self):
        for t in GRID16:
            for c in GRID16:
                assert probability_single(t, c) + probability_single(t + math.pi / 2, c) == pytest.approx(0.5, abs=1e-14)

    def test_without_qplate_no_fringes(self):
        # no spin-orbit coupling: m = 0 never reaches the sector hologram
        assert probability_single(0.1, 0.2, stages=()) == 0.0

    def test_prepared_state_is_phi_plus(self):
        assert prepared_single_state().is_normalized


class TestProbabilityPair:
    def test_equals_single_on_grid(self):
        for t in GRID16:
            for c in GRID16:
                assert probability_pair(t, c) == pytest.approx(probability_single(t, c), abs=1e-12)

    def test_polarizer_period(self):
        for t in GRID16:
            assert probability_pair(t + math.pi, 0.3) == pytest.approx(probability_pair(t, 0.3), abs=1e-14)

    def test_fringe_extremes(self):
        vals = np.array([[probability_pair(t, c) for c in GRID64] for t in GRID64[::8]])
        assert vals.max() == pytest.approx(0.5, abs=1e-3)
        assert vals.min() == pytest.approx(0.0, abs=1e-3)

    def test_nonlocal_state_fidelity(self):
        st = nonlocal_pair_state()
        assert st.is_normalized
        assert fidelity(to_reflected_b_frame(st), hybrid_target_state()) == pytest.approx(1, abs=1e-12)

    def test_reflected_labelling_reflects_chi(self):
        # in the mirrored arm-B frame the same law holds with chi -> -chi
        reflected = hybrid_target_state()
        for t in GRID16:
            for c in GRID16:
                assert measure_pair(reflected, t, c) == pytest.approx(law(t, -c), abs=1e-12)


def test_classical_matches_single():
    for t in GRID16:
        for c in GRID16:
            assert classical_power_fraction(t, c) == probability_single(t, c)


class TestNoisyProbability:
    def test_v1(self):
        assert noisy_probability(0.37, 1.0) == 0.37

    def test_v0(self):
        assert noisy_probability(0.37, 0.0) == 0.25
        assert noisy_probability(0.0, 0.0) == 0.25

    def test_v09(self):
        hi, lo = noisy_probability(0.5, 0.9), noisy_probability(0.0, 0.9)
        assert hi == pytest.approx(0.475)
        assert lo == pytest.approx(0.025)
        assert (hi - lo) / (hi + lo) == pytest.approx(0.9)

    @pytest.mark.parametrize("v", [-0.1, 1.1])
    def test_domain(self, v):
        with pytest.raises(ValueError):
            noisy_probability(0.2, v)


def _cfg(**kw):
    base = dict(theta_list=(0.0,), chi_list=(0.0,), pair_rate=10000.0, exposure=1.0, visibility=1.0)
    base.update(kw)
    return ExperimentConfig(**base)


class TestSimulateCounts:
    def test_dark_setting_zero(self):
        recs = simulate_counts(_cfg(chi_list=(math.pi / 4,)))
        assert recs[0].counts == 0
        for seed in range(20):
            assert simulate_counts(_cfg(chi_list=(math.pi / 4,), seed=seed))[0].counts == 0

    def test_peak_mean(self):
        samples = [simulate_counts(_cfg(seed=s))[0].counts for s in range(100)]
        # standard error of the mean of 100 Poisson(10000) draws is 10
        assert abs(np.mean(samples) - 10000) < 3 * 10

    def test_reproducible(self):
        cfg = ExperimentConfig(pair_rate=500.0, visibility=0.9, seed=42)
        assert simulate_counts(cfg) == simulate_counts(cfg)

    def test_different_seeds_differ(self):
        a = simulate_counts(ExperimentConfig(pair_rate=500.0, seed=1))
        b = simulate_counts(ExperimentConfig(pair_rate=500.0, seed=2))
        assert [r.counts for r in a] != [r.counts for r in b]

    def test_streams_are_per_setting(self):
        full = ExperimentConfig(pair_rate=500.0, seed=3, theta_list=(0.0, 0.5), chi_list=(0.1, 0.2, 0.3))
        head = ExperimentConfig(pair_rate=500.0, seed=3, theta_list=(0.0,), chi_list=(0.1, 0.2))
        assert [r.counts for r in simulate_counts(head)] == [r.counts for r in simulate_counts(full)][:2]

    def test_row_major_grid(self):
        recs = simulate_counts(ExperimentConfig(theta_list=(0.0, 1.0), chi_list=(0.1, 0.2, 0.3)))
        assert [(r.theta, r.chi) for r in recs] == [(t, c) for t in (0.0, 1.0) for c in (0.1, 0.2, 0.3)]

    def test_integer_counts_for_photons(self):
        assert all(isinstance(r.counts, int) for r in simulate_counts(ExperimentConfig(mode=Mode.TWO_PHOTON)))

    def test_classical_is_expected_flux(self):
        cfg = ExperimentConfig(mode=Mode.CLASSICAL, pair_rate=1e6, visibility=0.9)
        assert simulate_counts(cfg) == expected_counts(cfg)
        assert any(not float(r.counts).is_integer() for r in simulate_counts(cfg))

    def test_classical_power_noise_seeded(self):
        cfg = ExperimentConfig(mode=Mode.CLASSICAL, pair_rate=1e6, power_noise=0.01, seed=5)
        a, b = simulate_counts(cfg), simulate_counts(cfg)
        assert a == b
        assert a != expected_counts(cfg)

    def test_accidentals_add_flat_rate(self):
        cfg = _cfg(chi_list=(math.pi / 4,), accidental_rate=50.0, exposure=2.0)
        assert mean_counts(cfg, 0.0, math.pi / 4) == pytest.approx(100.0)

    @pytest.mark.parametrize("v", [1.0, 0.9, 0.5])
    def test_pair_rate_for_peak(self, v):
        cfg = _cfg(pair_rate=pair_rate_for_peak(2000.0, v, exposure=2.0), visibility=v, exposure=2.0)
        assert mean_counts(cfg, 0.0, 0.0) == pytest.approx(2000.0, rel=1e-12)

    def test_rate_normalization(self):
        cfg = _cfg(pair_rate=123.0, exposure=2.0)
        assert mean_counts(cfg, 0.0, 0.0) == pytest.approx(246.0)

    def test_monte_carlo_mean_and_variance(self):
        n = 10_000
        cfg = _cfg(pair_rate=40.0, visibility=0.9, theta_list=(0.0,), chi_list=(0.0, math.pi / 8, math.pi / 4))
        lam = [mean_counts(cfg, 0.0, c) for c in cfg.chi_list]
        draws = np.array([[r.counts for r in simulate_counts(ExperimentConfig(**{**cfg.__dict__, "seed": s}))]
                          for s in range(n)], dtype=float)
        for k, l in enumerate(lam):
            mean, var = draws[:, k].mean(), draws[:, k].var(ddof=1)
            assert abs(mean - l) < 5 * math.sqrt(l / n)
            assert abs(var - l) < 5 * math.sqrt((l + 2 * l * l) / n)


class TestConfigValidation:
    @pytest.mark.parametrize("kw,key", [
        ({"visibility": 1.5}, "visibility"),
        ({"pair_rate": -1.0}, "pair_rate"),
        ({"exposure": 0.0}, "exposure_s"),
        ({"accidental_rate": float("nan")}, "accidental_rate"),
        ({"theta_list": ()}, "theta"),
        ({"seed": -3}, "seed"),
    ])
    def test_rejects(self, kw, key):
        with pytest.raises(ConfigError) as exc:
            ExperimentConfig(**kw)
        assert exc.value.key == key

    def test_bad_stage(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(stages=({"type": "nope"},))


def test_count_record_nonnegative():
    with pytest.raises(ValueError):
        CountRecord(0.0, 0.0, -1)
