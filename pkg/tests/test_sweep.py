"""Tests for the region-map sweep."""

import csv

import numpy as np
import pytest

import gaussian_locality.sweep as sweep_module
from gaussian_locality.certifier import certify_click_setting, lossy_tmss_noise_bound, region_condition
from gaussian_locality.models import ChshEvaluation, LocalityCertificate, SweepConfig, TmssParameters, VerdictStatus
from gaussian_locality.states import lossy_tmss
from gaussian_locality.sweep import CSV_HEADER, evaluate_cell, run_sweep, summarize
from gaussian_locality.wigner import noise_threshold


def small_config(**overrides) -> SweepConfig:
    values = {
        "eta_range": (0.1, 0.95, 2),
        "nu_range": (1.05, 1.4, 2),
        "optimizer_budget": 20,
        "max_workers": 1,
    }
    values.update(overrides)
    return SweepConfig(**values)


class TestEvaluateCell:
    """Tests for single-cell classification."""

    def test_certified_cell(self, settings):
        """Test the local reference point."""
        verdict = evaluate_cell(0.1, 1.05, 0.02, settings)
        assert verdict.status == VerdictStatus.LHV_CERTIFIED
        assert isinstance(verdict.witness, LocalityCertificate)
        assert verdict.value >= 0.0

    def test_violating_cell(self, settings):
        """Test the violating reference point."""
        verdict = evaluate_cell(0.95, 1.4, 0.02, settings)
        assert verdict.status == VerdictStatus.CHSH_VIOLATING
        assert isinstance(verdict.witness, ChshEvaluation)
        assert verdict.value > 2.0

    def test_vacuum_row_certified(self, settings):
        """Test that nu=1 is certified at any transmittance."""
        for eta in (0.0, 0.5, 1.0):
            assert evaluate_cell(eta, 1.0, 0.02, settings).status == VerdictStatus.LHV_CERTIFIED

    def test_full_loss_certified(self, settings):
        """Test that eta=0 is certified even for strong squeezing."""
        verdict = evaluate_cell(0.0, 1.5, 0.02, settings)
        assert verdict.status == VerdictStatus.LHV_CERTIFIED

    def test_weak_squeezing_low_transmittance(self, settings):
        """Test that eta=0.05, nu=1.05 is certified."""
        verdict = evaluate_cell(0.05, 1.05, 0.02, settings)
        assert verdict.status == VerdictStatus.LHV_CERTIFIED
        assert region_condition(0.05, 1.05, 0.02)


class TestRunSweep:
    """Tests for run_sweep and its outputs."""

    def test_grid_shape_and_corners(self, settings):
        """Test row-major verdicts and the two reference corners."""
        verdicts = run_sweep(small_config(), settings)
        assert len(verdicts) == 2
        assert all(len(row) == 2 for row in verdicts)
        assert verdicts[0][0].status == VerdictStatus.LHV_CERTIFIED
        assert verdicts[1][1].status == VerdictStatus.CHSH_VIOLATING
        assert verdicts[0][1].eta == pytest.approx(0.1)
        assert verdicts[0][1].nu == pytest.approx(1.4)

    def test_callback_per_cell(self, settings):
        """Test that on_cell fires once for every cell."""
        seen = []
        run_sweep(small_config(), settings, on_cell=seen.append)
        assert len(seen) == 4

    def test_budget_override(self, settings, mocker):
        """Test that the sweep budget replaces the optimiser budget."""
        spy = mocker.spy(sweep_module, "evaluate_cell")
        run_sweep(small_config(optimizer_budget=7), settings)
        assert all(call.args[3].optimizer.budget == 7 for call in spy.call_args_list)

    def test_csv_output(self, settings, temp_dir):
        """Test the CSV header, row count and status names."""
        path = temp_dir / "map.csv"
        run_sweep(small_config(output_path=path), settings)

        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))

        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 5
        assert rows[1][:3] == ["0.1", "1.05", "lhv_certified"]
        assert {row[2] for row in rows[1:]} <= {status.value for status in VerdictStatus}

    def test_process_pool_matches_serial(self, settings):
        """Test that worker processes give the same verdicts in the same order."""
        serial = run_sweep(small_config(), settings)
        parallel = run_sweep(small_config(max_workers=2), settings)
        assert [[v.status for v in row] for row in serial] == [[v.status for v in row] for row in parallel]

    def test_summary(self, settings):
        """Test per-status counts."""
        counts = summarize(run_sweep(small_config(), settings))
        assert sum(counts.values()) == 4
        assert counts["lhv_certified"] >= 1
        assert counts["chsh_violating"] >= 1


class TestSweepConfig:
    """Tests for sweep grid validation."""

    def test_default_grid(self):
        """Test the default 50 x 50 grid."""
        config = SweepConfig()
        assert config.cell_count == 2500
        assert config.etas()[0] == 0.0
        assert config.nus()[-1] == pytest.approx(1.5)

    def test_nu_below_one(self):
        """Test that nu ranges below one are rejected."""
        with pytest.raises(ValueError):
            SweepConfig(nu_range=(0.9, 1.5, 10))

    def test_single_step(self):
        """Test that one grid point per axis is rejected."""
        with pytest.raises(ValueError):
            SweepConfig(eta_range=(0.0, 1.0, 1))


class TestFullMap:
    """Acceptance check on the default region map."""

    @pytest.mark.slow
    def test_default_grid_matches_closed_form(self, settings):
        """Test that certified cells of the 50 x 50 map follow the closed-form condition."""
        config = SweepConfig(optimizer_budget=40, max_workers=4)
        verdicts = run_sweep(config, settings)
        assert sum(len(row) for row in verdicts) == 2500
        for row in verdicts:
            for verdict in row:
                if abs(lossy_tmss_noise_bound(verdict.eta, verdict.nu) - 0.92**0.5) < 1e-6:
                    continue
                certified = verdict.status == VerdictStatus.LHV_CERTIFIED
                assert certified == region_condition(verdict.eta, verdict.nu, 0.02)

    @pytest.mark.parametrize("epsilon", [0.0, 0.02, 0.1, 0.25])
    def test_certifier_follows_closed_form(self, epsilon):
        """Test that isotropic certification agrees with the closed-form condition on an 11 x 11 grid."""
        t_star = noise_threshold(epsilon).t_star
        for eta in np.linspace(0.0, 1.0, 11):
            for nu in np.linspace(1.0, 1.5, 11):
                if abs(lossy_tmss_noise_bound(eta, nu) - t_star) < 1e-4:
                    continue
                state = lossy_tmss(TmssParameters(eta=eta, nu=nu))
                certified = certify_click_setting(state, epsilon) is not None
                assert certified == region_condition(eta, nu, epsilon), (eta, nu)

    def test_quarter_dark_count_certifies_everything(self, settings):
        """Test that epsilon=0.25 certifies every cell of the map."""
        config = small_config(eta_range=(0.0, 1.0, 6), nu_range=(1.0, 1.5, 6), epsilon=0.25)
        counts = summarize(run_sweep(config, settings))
        assert counts["lhv_certified"] == 36

    def test_reference_points_on_map(self, settings):
        """Test the violating and certified reference points on a grid containing both."""
        config = small_config(eta_range=(0.05, 0.95, 2), nu_range=(1.05, 1.4, 2), optimizer_budget=40)
        verdicts = run_sweep(config, settings)
        assert verdicts[0][0].status == VerdictStatus.LHV_CERTIFIED
        assert verdicts[1][1].status == VerdictStatus.CHSH_VIOLATING
