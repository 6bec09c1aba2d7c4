import numpy as np
import pytest

from dpdmeans.errors import DomainError
from dpdmeans.simulate import (
    SimulationConfig,
    TestSpec,
    rng_stream,
    run_level_power_study,
    sample_population,
    split_sizes,
)


class TestStreams:
    def test_reproducible(self):
        a = rng_stream(42, 3, 1).normal(size=10)
        b = rng_stream(42, 3, 1).normal(size=10)
        np.testing.assert_array_equal(a, b)

    def test_cross_correlation(self):
        a = rng_stream(42, 0, 0).normal(size=10_000)
        b = rng_stream(42, 1, 0).normal(size=10_000)
        c = rng_stream(42, 0, 1).normal(size=10_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
        assert abs(np.corrcoef(a, c)[0, 1]) < 0.05

    def test_known_output(self):
        # Philox keyed by SeedSequence is platform independent; freeze the first draws.
        draws = rng_stream(2014, 0, 0).random(3)
        assert draws.tolist() == [0.74091819023156, 0.6438389488220182, 0.17517105368992758]
        assert draws.tolist() != rng_stream(2014, 0, 0, cell_index=1).random(3).tolist()


class TestSamplePopulation:
    def test_pure(self):
        s = sample_population(100_000, 3.0, 2.0, 0.0, -10, 1, rng_stream(1, 0, 0))
        assert abs(s.values.mean() - 3.0) < 4 * 2.0 / np.sqrt(100_000)

    def test_all_contaminated(self):
        s = sample_population(1000, 0.0, 1.0, 1.0, -10, 1, rng_stream(1, 0, 0))
        assert s.values.max() < -5

    def test_rate(self):
        s = sample_population(100_000, 0.0, 1.0, 0.05, -10, 1, rng_stream(1, 0, 0))
        assert 0.045 <= np.mean(s.values < -5) <= 0.055

    @pytest.mark.parametrize("rate", [-0.1, 1.1])
    def test_bad_rate(self, rate):
        with pytest.raises(DomainError):
            sample_population(10, 0, 1, rate, -10, 1, rng_stream(1, 0, 0))


class TestConfig:
    def test_split(self):
        assert split_sizes(100, 0.6) == (61, 39)
        assert split_sizes(20, 0.6) == (13, 7)

    def test_split_too_small(self):
        with pytest.raises(DomainError):
            split_sizes(3, 0.6)

    def test_round_trip(self):
        cfg = SimulationConfig(total_n_grid=[20, 40], tests=["dpd:0.2", "wilcoxon", "trimmed-t:0.1"], master_seed=9)
        assert SimulationConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_field(self):
        with pytest.raises(DomainError, match="bogus"):
            SimulationConfig.from_dict({"total_n_grid": [20], "bogus": 1})

    def test_missing_grid(self):
        with pytest.raises(DomainError, match="total_n_grid"):
            SimulationConfig.from_dict({"replications": 3})

    @pytest.mark.parametrize(
        "kwargs", [{"w": 1.0}, {"replications": 0}, {"contamination_rate": 1.0}, {"total_n_grid": []}, {"tests": []}]
    )
    def test_invalid(self, kwargs):
        base = {"total_n_grid": [20]}
        base.update(kwargs)
        with pytest.raises(DomainError):
            SimulationConfig(**base)

    def test_spec_parsing(self):
        assert TestSpec.parse("dpd:0.1") == TestSpec("dpd", 0.1, 0.1)
        assert TestSpec.parse("dpd:0.2:0.5").name == "dpd:0.2:0.5"
        assert TestSpec.parse("trimmed-t").trim == 0.2
        with pytest.raises(DomainError):
            TestSpec.parse("anova")
        with pytest.raises(DomainError):
            TestSpec.parse("ks:3")


class TestStudy:
    def test_single_replication_rates(self):
        cfg = SimulationConfig(total_n_grid=[20], replications=1, tests=["pooled-t", "dpd:0.3", "ks"])
        for c in run_level_power_study(cfg).cells:
            assert c.rate in (0.0, 1.0)

    def test_rate_accounting(self):
        cfg = SimulationConfig(total_n_grid=[20, 30], replications=37, mu2=0.5, tests=["pooled-t", "dpd:0.5"])
        for c in run_level_power_study(cfg).cells:
            assert c.effective + c.excluded == c.replications
            assert c.rate == c.rejections / c.effective
            assert c.mc_se == pytest.approx(np.sqrt(c.rate * (1 - c.rate) / c.effective))

    def test_parallel_matches_serial(self):
        cfg = SimulationConfig(total_n_grid=[20, 50], replications=60, contamination_rate=0.1,
                               tests=["pooled-t", "dpd:0.1", "wilcoxon"], master_seed=5)
        serial = run_level_power_study(cfg).to_csv()
        assert run_level_power_study(cfg, workers=2, chunk_size=7).to_csv() == serial
        assert run_level_power_study(cfg, chunk_size=13).to_csv() == serial

    def test_csv_header(self):
        cfg = SimulationConfig(total_n_grid=[20], replications=2, master_seed=123)
        lines = run_level_power_study(cfg).to_csv().splitlines()
        assert lines[0].startswith("# dpdmeans ")
        assert '"master_seed": 123' in lines[1]
        assert lines[2] == "test,n,n1,n2,replications,effective,excluded,rejections,rate,mc_se"

    @pytest.mark.slow
    def test_pure_level_dpd(self):
        cfg = SimulationConfig(total_n_grid=[200], replications=2000, tests=["dpd:0.1"], master_seed=1)
        assert 0.035 <= run_level_power_study(cfg).rate("dpd:0.1", 200) <= 0.07

    @pytest.mark.slow
    def test_pure_level_pooled_t(self):
        cfg = SimulationConfig(total_n_grid=[200], replications=5000, tests=["pooled-t"], master_seed=2)
        assert 0.04 <= run_level_power_study(cfg).rate("pooled-t", 200) <= 0.06

    @pytest.mark.slow
    def test_contaminated_power_gap(self):
        cfg = SimulationConfig(total_n_grid=[100], mu2=1.0, contamination_rate=0.05, replications=2000,
                               tests=["pooled-t", "dpd:0.1"], master_seed=3)
        report = run_level_power_study(cfg)
        assert report.rate("dpd:0.1", 100) - report.rate("pooled-t", 100) >= 0.15

    def test_contaminated_level_order(self):
        cfg = SimulationConfig(total_n_grid=[100], contamination_rate=0.05, replications=300,
                               tests=["pooled-t", "dpd:0.1"], master_seed=4)
        report = run_level_power_study(cfg)
        assert report.rate("pooled-t", 100) > report.rate("dpd:0.1", 100)
