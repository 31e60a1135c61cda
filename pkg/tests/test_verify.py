"""Tests for the trend-based verification experiments."""
from __future__ import annotations

import numpy as np
import pytest

from fluxjump import (
    ExperimentReport,
    FluxPair,
    Grid,
    ParameterError,
    blowup_experiment,
    bvs_test_signal,
    contrast_ladder_data,
    holder_lemma_suite,
    interface_conditions_check,
    outside_interface_experiment,
    power_law_flux,
    random_step_data,
    refinement_contrast_experiment,
    shifted_quadratic,
    smoothing_experiment,
    solve,
    trace_experiment,
    tv_s_bruteforce,
    tv_s_exact,
    write_report,
)


# -- report container ------------------------------------------------------------

class TestExperimentReport:
    def _report(self, **kw):
        base = dict(name="demo", parameters={"a": "1"},
                    series={"x": np.array([1.0, 2.0])},
                    coefficients={"c": 3.0}, verdict="pass")
        base.update(kw)
        return ExperimentReport(**base)

    def test_verdict_validated(self):
        with pytest.raises(ParameterError):
            self._report(verdict="maybe")

    def test_series_lengths_validated(self):
        with pytest.raises(ParameterError):
            self._report(series={"x": np.zeros(2), "y": np.zeros(3)})

    def test_write_report_files(self, tmp_path):
        rep = self._report(notes=("checked",), runtime_seconds=1.23)
        csv_path, txt_path = write_report(rep, str(tmp_path))
        csv = open(csv_path).read()
        assert csv == "x\n1\n2\n"
        txt = open(txt_path).read()
        assert "experiment: demo" in txt
        assert "verdict: pass" in txt
        assert "param a = 1" in txt
        assert "coeff c = 3" in txt
        assert "note: checked" in txt

    def test_write_report_csv_deterministic(self, tmp_path):
        # runtime differs between runs but must not leak into the CSV
        a = self._report(runtime_seconds=0.5)
        b = self._report(runtime_seconds=9.9)
        pa, _ = write_report(a, str(tmp_path / "a") if False else str(tmp_path))
        ca = open(pa, "rb").read()
        pb, _ = write_report(b, str(tmp_path))
        assert open(pb, "rb").read() == ca


# -- deterministic data generators --------------------------------------------------

class TestDataGenerators:
    def test_bvs_signal_exact_variation(self):
        # alternating decreasing jumps: TV^sigma equals the full jump sum
        for s in (0.5, 0.8):
            sig = bvs_test_signal(s, n_jumps=12)
            ks = np.arange(1, 13, dtype=float)
            for sigma in (s, 0.75 * s):
                expect = float(np.sum((ks ** (-s)) ** (1.0 / sigma)))
                assert tv_s_exact(sig, sigma).value == pytest.approx(expect, abs=1e-10)
                assert tv_s_bruteforce(sig, sigma) == pytest.approx(expect, abs=1e-10)

    def test_bvs_signal_base_and_size(self):
        sig = bvs_test_signal(0.5, n_jumps=5, base=2.0)
        assert len(sig) == 6
        assert sig.values[-1] == pytest.approx(2.0)  # value before the jumps

    def test_bvs_signal_validation(self):
        with pytest.raises(ParameterError):
            bvs_test_signal(0.0)
        with pytest.raises(ParameterError):
            bvs_test_signal(0.5, n_jumps=0)

    def test_random_step_data_deterministic(self):
        a = random_step_data(11, 1.5, 2.0)
        b = random_step_data(11, 1.5, 2.0)
        assert np.array_equal(a.breakpoints, b.breakpoints)
        assert np.array_equal(a.values, b.values)

    def test_random_step_data_bounds(self):
        data = random_step_data(3, 0.7, 4.0, n_pieces=12)
        assert len(data.breakpoints) == 12
        assert np.abs(data.values).max() <= 0.7
        assert data.breakpoints.min() >= -2.0 and data.breakpoints.max() <= 2.0


# -- smoothing experiment -------------------------------------------------------------

class TestSmoothing:
    def test_reference_pair_passes(self, reference_pair):
        rep = smoothing_experiment(reference_pair, 3, 1.0, (0.25, 0.5),
                                   (400, 800), half_width=2.0)
        assert rep.verdict == "pass"
        assert rep.coefficients["fit_B"] > 0.0  # variation decays like 1/t
        assert rep.coefficients["tvs_stability"] < 0.10
        assert set(rep.series) == {"n_cells", "t", "tv_s", "tv_1"}

    def test_classical_control_passes(self):
        pair = FluxPair(left=power_law_flux(2.0), right=power_law_flux(2.0))
        rep = smoothing_experiment(pair, 3, 1.0, (0.25, 0.5), (400, 800),
                                   half_width=2.0)
        assert rep.verdict == "pass"
        # equal minima: no transmission singularity, classical order is used
        assert rep.parameters["s_value"] == "1.0"

    def test_validation(self, reference_pair):
        with pytest.raises(ParameterError):
            smoothing_experiment(reference_pair, 0, 1.0, (0.5,), (400,))
        with pytest.raises(ParameterError):
            smoothing_experiment(reference_pair, 0, 1.0, (0.5, 0.25), (400, 800))
        with pytest.raises(ParameterError):
            smoothing_experiment(reference_pair, 0, 1.0, (-0.5, 0.5), (400, 800))


# -- blow-up experiment ----------------------------------------------------------------

class TestBlowup:
    def test_slope_matches_derived_rate(self):
        rep = blowup_experiment(1.0, 0.5, (10000, 20000, 40000, 80000, 160000))
        assert rep.coefficients["slope_target"] == pytest.approx(1.0 / 9.0, abs=1e-12)
        assert rep.coefficients["slope_error"] < 1e-3
        assert rep.coefficients["kappa"] == pytest.approx(8.0 / 9.0, abs=1e-12)

    def test_quadratic_family_tail_fails_honestly(self):
        # the subcritical tail of the p=1 family decays like N^(-1/3): far
        # too slow for the 1% Cauchy threshold even at N = 1e6
        rep = blowup_experiment(1.0, 0.5, (125000, 250000, 500000, 1000000))
        assert rep.verdict == "fail"
        assert rep.coefficients["slope_error"] < 1e-3
        assert rep.coefficients["subcritical_tail_rel"] > 0.01

    def test_faster_family_passes(self):
        rep = blowup_experiment(1.5, 0.8, (125000, 250000, 500000, 1000000))
        assert rep.verdict == "pass"
        assert rep.coefficients["subcritical_tail_rel"] < 0.01

    def test_validation(self):
        with pytest.raises(ParameterError):
            blowup_experiment(1.0, 0.5, (100, 200))
        with pytest.raises(ParameterError):
            blowup_experiment(1.0, 0.5, (200, 100, 400))
        with pytest.raises(ParameterError):
            blowup_experiment(1.0, 0.5, (10000, 20000, 2 * 10 ** 6))


# -- trace experiment ------------------------------------------------------------------

class TestTraces:
    def test_constant_supercritical_data_passes(self, reference_pair):
        rep = trace_experiment(reference_pair, lambda x: np.full_like(x, 1.3),
                               [(0.1, 0.2), (0.2, 0.4)], t_end=0.5,
                               half_width=1.0, grid_list=(400, 800))
        assert rep.verdict == "pass"
        assert rep.coefficients["ratio_spread"] == 0.0

    def test_subcritical_data_inconclusive(self, reference_pair):
        # data inside the left wedge violate the trace-bound precondition;
        # that must surface as inconclusive, not as a pass
        rep = trace_experiment(reference_pair, lambda x: np.full_like(x, -0.5),
                               [(0.1, 0.2), (0.2, 0.4)], t_end=0.5,
                               half_width=1.0, grid_list=(400, 800))
        assert rep.verdict == "inconclusive"

    def test_validation(self, reference_pair):
        u0 = lambda x: np.full_like(x, 1.3)
        with pytest.raises(ParameterError):
            trace_experiment(reference_pair, u0, [], grid_list=(400, 800))
        with pytest.raises(ParameterError):
            trace_experiment(reference_pair, u0, [(0.2, 0.1)],
                             grid_list=(400, 800))
        with pytest.raises(ParameterError):
            trace_experiment(reference_pair, u0, [(0.1, 0.2)], grid_list=(400,))


# -- away-from-interface regularity ------------------------------------------------------

class TestOutside:
    def test_reference_configuration_passes(self, reference_pair):
        u0 = random_step_data(7, 1.0, 4.0)
        rep = outside_interface_experiment(reference_pair, u0, (0.2, 0.4, 0.8),
                                           0.5, n_cells=1000, half_width=2.0)
        assert rep.verdict == "pass"
        assert rep.coefficients["fit_B"] > 0.0
        assert rep.coefficients["monotone_slack"] <= 0.0

    def test_validation(self, reference_pair):
        u0 = random_step_data(7, 1.0, 4.0)
        with pytest.raises(ParameterError):
            outside_interface_experiment(reference_pair, u0, (0.2,), 0.5)
        with pytest.raises(ParameterError):
            outside_interface_experiment(reference_pair, u0, (0.2, -0.4), 0.5)


# -- interface conditions -----------------------------------------------------------------

class TestInterfaceConditions:
    def test_refinement_improves_traces(self, reference_pair):
        u0 = random_step_data(5, 1.0, 2.0)
        sols = [solve(reference_pair, u0, Grid(half_width=2.0, n_cells=n), 0.5)
                for n in (500, 1000, 2000)]
        rep = interface_conditions_check(reference_pair, sols)
        assert rep.verdict == "pass"
        res = rep.series["rh_residual_median"]
        assert np.all(np.diff(res) < 0.0)
        assert np.all(rep.series["iec_violation_fraction"] == 0.0)

    def test_validation(self, reference_pair):
        u0 = random_step_data(5, 1.0, 2.0)
        sol = solve(reference_pair, u0, Grid(half_width=2.0, n_cells=100), 0.2)
        with pytest.raises(ParameterError):
            interface_conditions_check(reference_pair, [sol])
        sol2 = solve(reference_pair, u0, Grid(half_width=2.0, n_cells=50), 0.2)
        with pytest.raises(ParameterError):
            interface_conditions_check(reference_pair, [sol, sol2])


# -- exponent suite ----------------------------------------------------------------------

class TestHolderSuite:
    def test_reference_pair(self, reference_pair):
        rep = holder_lemma_suite(reference_pair)
        assert rep.verdict == "pass"
        est = rep.series["estimate"]
        tgt = rep.series["target"]
        # order: (g')^{-1}, (f')^{-1}, singular, lipschitz
        assert est[0] == pytest.approx(1.0, abs=0.05)
        assert est[1] == pytest.approx(1.0, abs=0.05)
        assert est[2] == pytest.approx(0.5, abs=0.05)
        assert est[3] >= 0.95
        assert tgt[2] == pytest.approx(0.5)

    def test_mirrored_pair(self):
        # swapping which side carries the higher minimum swaps the map roles,
        # and the suite must track that automatically
        pair = FluxPair(left=power_law_flux(2.0), right=shifted_quadratic(-1.0))
        rep = holder_lemma_suite(pair)
        assert rep.verdict == "pass"
        assert rep.series["estimate"][2] == pytest.approx(0.5, abs=0.05)

    def test_cubic_pair(self, cubic_pair):
        rep = holder_lemma_suite(cubic_pair)
        assert rep.series["target"][2] == pytest.approx(1.0 / 3.0)
        assert rep.series["estimate"][2] == pytest.approx(1.0 / 3.0, abs=0.05)


# -- refinement contrast ---------------------------------------------------------------

class TestRefinementContrast:
    def test_ladder_data_shape(self, reference_pair):
        data = contrast_ladder_data(reference_pair)
        assert data.k == 155
        assert data.tau_star == pytest.approx(1.212237258604194, abs=1e-12)
        assert np.all(np.diff(data.positions) > 0)
        assert np.all(np.diff(data.levels) > 0)
        assert data.levels[-1] < 0.0

    def test_ladder_validation(self, reference_pair):
        with pytest.raises(ParameterError):
            contrast_ladder_data(reference_pair, i_lo=0.5)
        with pytest.raises(ParameterError):
            contrast_ladder_data(reference_pair, i_cap=2.0)
        with pytest.raises(ParameterError):
            contrast_ladder_data(reference_pair, tau_lo=1.5)
        with pytest.raises(ParameterError):
            contrast_ladder_data(reference_pair, omega=0.0)
        with pytest.raises(ParameterError):
            contrast_ladder_data(reference_pair, r_factor=1.0)

    def test_coarse_grids_fail_honestly(self, reference_pair):
        # under-resolved grids cannot see the classical-variation growth;
        # the experiment must report that instead of passing
        data = contrast_ladder_data(reference_pair)
        rep = refinement_contrast_experiment(reference_pair, data,
                                             (500, 800, 1200), window=0.8,
                                             half_width=4.0, run_solver=False)
        assert rep.verdict == "fail"
        assert 0.0 < rep.coefficients["tv_one_growth_total"] < 0.50
        assert set(rep.series) == {"n_cells", "tv_fine", "tv_one"}

    def test_validation(self, reference_pair):
        data = contrast_ladder_data(reference_pair)
        with pytest.raises(ParameterError):
            refinement_contrast_experiment(reference_pair, data, (500, 1000),
                                           window=0.8, half_width=4.0)
        with pytest.raises(ParameterError):
            refinement_contrast_experiment(reference_pair, data,
                                           (1000, 500, 2000), window=0.8,
                                           half_width=4.0)
        with pytest.raises(ParameterError):
            refinement_contrast_experiment(reference_pair, data,
                                           (500, 800, 1200), window=5.0,
                                           half_width=4.0)
        with pytest.raises(ParameterError):
            refinement_contrast_experiment(reference_pair, data,
                                           (500, 800, 1200), window=0.8,
                                           half_width=4.0, s_fine=0.0)
