import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvscore.core import NoRoot, UnknownModel
from mvscore.measures import SCORES
from mvscore.studies import (
    BivariateNormalSpec,
    PeakModelSpec,
    correlation_gap,
    five_numbers,
    peak_covariance,
    run_ensemble_size_study,
    run_random_peak_study,
    run_sensitivity_study_1,
    run_sensitivity_study_2,
    sample_bivariate_normal,
    sample_peak_model,
    solve_study2_constants,
    study_config,
    variance_gap,
    write_result,
)

DELTA = 0.5 * math.log(2)
RHO = math.sqrt(2) / 2
M14 = 2**14


def test_bivariate_examples(rng):
    x = sample_bivariate_normal(BivariateNormalSpec(0.0), M14, rng)
    assert abs(np.corrcoef(x.T)[0, 1]) < 0.05
    x = sample_bivariate_normal(BivariateNormalSpec(1.0), 100, rng)
    np.testing.assert_array_equal(x[:, 0], x[:, 1])
    x = sample_bivariate_normal(BivariateNormalSpec(-1.0), 100, rng)
    np.testing.assert_array_equal(x[:, 0], -x[:, 1])
    x = sample_bivariate_normal(BivariateNormalSpec(0.3, mean=(5, 5)), M14, rng)
    assert np.all(np.abs(x.mean(axis=0) - 5) < 4 / math.sqrt(M14))


def test_bivariate_spec_validation():
    with pytest.raises(ValueError):
        BivariateNormalSpec(1.1)
    with pytest.raises(ValueError):
        BivariateNormalSpec(0.0, scale=0.0)


def test_study2_constants_reference_values():
    a1, a2, a3, a4, a5, a6 = solve_study2_constants(DELTA, RHO)
    assert a1 == pytest.approx(math.sqrt(DELTA / (2 - math.sqrt(2))), abs=1e-12)
    assert a2 == pytest.approx(math.sqrt(DELTA / (2 + math.sqrt(2))), abs=1e-12)
    assert (round(a1, 5), round(a2, 5)) == (0.76918, 0.3186)
    assert a3 == pytest.approx(0.48124, abs=1e-4)
    assert a4 == pytest.approx(2.62729, abs=1e-4)
    assert a5 == 0.0
    assert a6 == pytest.approx(0.89032, abs=1e-4)


def test_study2_mean_shift_matches_mahalanobis_gap():
    a1, a2 = solve_study2_constants(DELTA, RHO)[:2]
    prec = np.linalg.inv(np.array([[1, RHO], [RHO, 1]]))
    for v in (np.array([a1, a1]), np.array([a2, -a2])):
        assert 0.5 * v @ prec @ v == pytest.approx(DELTA, abs=1e-12)


@given(st.floats(1e-3, 2.0), st.floats(-0.9, 0.9))
def test_study2_back_substitution(delta, rho):
    a = solve_study2_constants(delta, rho)
    assert a[2] < 1 < a[3] and a[5] > rho
    assert abs(variance_gap(a[2]) - delta) < 1e-9
    assert abs(variance_gap(a[3]) - delta) < 1e-9
    assert abs(correlation_gap(a[5], rho) - delta) < 1e-9


def test_study2_small_delta_limit():
    a = solve_study2_constants(1e-10, 0.5)
    assert a[0] < 1e-4 and a[1] < 1e-4
    assert a[2] == pytest.approx(1, abs=1e-4) and a[3] == pytest.approx(1, abs=1e-4)
    assert a[5] == pytest.approx(0.5, abs=1e-4)


def test_study2_invalid_inputs():
    with pytest.raises(ValueError):
        solve_study2_constants(0.0, 0.5)
    with pytest.raises(ValueError):
        solve_study2_constants(0.3, 1.0)


def test_no_root_error():
    from mvscore.studies import _root

    with pytest.raises(NoRoot):
        _root(lambda a: a * a + 1, -1.0, 1.0)


def test_peak_model_q0_collapses(rng):
    x = sample_peak_model(PeakModelSpec(1, 3, 0.0), M14, rng)
    assert np.all(np.abs(x.mean(axis=0)) < 4 / math.sqrt(M14))


def test_peak_model_peak_frequency(rng):
    x = sample_peak_model(PeakModelSpec(1, 3, 5.0), M14, rng)
    freq = (x > 2.5).mean(axis=0)
    np.testing.assert_allclose(freq, 1 / 3, atol=0.02)


def test_peak_model_8_moments(rng):
    x = sample_peak_model(PeakModelSpec(8, 3, 5.0), M14, rng)
    np.testing.assert_allclose(np.cov(x.T), peak_covariance(3, 5.0), atol=0.15)
    true = sample_peak_model(PeakModelSpec(1, 3, 5.0), M14, rng)
    np.testing.assert_allclose(np.cov(true.T), peak_covariance(3, 5.0), atol=0.15)
    np.testing.assert_allclose(x.mean(axis=0), 5 / 3, atol=0.08)


def test_peak_models_rolling_and_fixed(rng):
    x = sample_peak_model(PeakModelSpec(5, 3, 5.0), 4000, rng, window=5)
    assert np.argmax(x.mean(axis=0)) == 1  # 1 + (5-1) mod 3 = 2nd coordinate
    x = sample_peak_model(PeakModelSpec(4, 3, 5.0), 4000, rng)
    assert np.argmax(x.mean(axis=0)) == 0


def test_mixture_model_marginal_matches_true(rng):
    from scipy import stats

    a = sample_peak_model(PeakModelSpec(6, 3, 5.0), 5000, rng)[:, 2]
    b = sample_peak_model(PeakModelSpec(1, 3, 5.0), 5000, rng)[:, 2]
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_unknown_model():
    with pytest.raises(UnknownModel):
        PeakModelSpec(9)


def test_five_numbers_ignores_nan():
    s = five_numbers([1.0, np.nan, 3.0, 2.0])
    assert (s["min"], s["median"], s["max"], s["mean"]) == (1.0, 2.0, 3.0, 2.0)
    assert math.isnan(five_numbers([np.nan])["median"])


def _tiny(study, **kw):
    base = dict(m=64, n=8, l=2)
    base.update(kw)
    return study_config(study, **base)


def test_sens1_diagonal_cells_are_null_like():
    cfg = _tiny("sens1", rho_true_grid=(0.0, 0.6), rho_fcst_grid=(0.0, 0.6, 1.0), m=256, n=16)
    res = run_sensitivity_study_1(cfg)
    assert len(res.rows) == 2 * 3 * len(SCORES) * 3
    for rt in ("0", "0.6"):
        cell = f"rho_true={rt};rho_fcst={rt}"
        assert abs(res.lookup(cell, "ES", "dm_stat")) < 3
        assert abs(res.lookup(cell, "ES", "relch")) < 0.05
    # the degenerate forecast line makes DSS undefined, not an error
    assert math.isnan(res.lookup("rho_true=0;rho_fcst=1", "DSS", "dm_stat"))


def test_sens2_reports_all_settings():
    res = run_sensitivity_study_2(_tiny("sens2"))
    assert set(res.summary) >= {"constants", "true", "cor larger"}
    assert res.summary["constants"]["a3"] == pytest.approx(0.48124, abs=1e-4)


def test_peak_and_ensemble_size_shapes():
    res = run_random_peak_study(_tiny("peak"))
    assert len({c for c, *_ in res.rows}) == 7
    es = run_ensemble_size_study(study_config("ensemble-size", n=4, l=1, m_grid=(16, 32), h_grid=(3,)))
    assert {c for c, *_ in es.rows} == {f"H=3;M={m};model={k}" for m in (16, 32) for k in range(2, 9)}


def test_studies_are_thread_count_invariant(tmp_path):
    outs = []
    for threads in (1, 3):
        cfg = _tiny("peak", threads=threads)
        paths = write_result(run_random_peak_study(cfg), tmp_path / str(threads), cfg)
        outs.append([p.read_bytes() for p in paths])
    assert outs[0] == outs[1]


def test_config_validation():
    with pytest.raises(ValueError):
        study_config("peak", m=1)
    with pytest.raises(ValueError):
        study_config("sens1", rho_fcst_grid=(2.0,))
    with pytest.raises(ValueError):
        study_config("nope")
    full = study_config("peak", "paper")
    assert (full.m, full.n, full.l) == (2**14, 2**5, 2**6)
