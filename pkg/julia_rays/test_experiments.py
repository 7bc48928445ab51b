from fractions import Fraction

import pytest

from models.report import CREMER_STATEMENT, ExperimentReport, Measurement, Outcome, aggregate
from services.experiments import (
    EXPERIMENTS,
    _best_pairing,
    exp_chebyshev_oracle,
    SIEGEL_DEPTH,
    SIEGEL_SUBSTEPS,
    exp_golden_siegel,
    exp_preimage_cluster,
    golden_critical_angle,
    golden_siegel_map,
    run_experiment,
    verify_all,
)


def _labels(report: ExperimentReport, outcome: Outcome) -> list[str]:
    return [m.label for m in report.measurements if m.outcome == outcome]


def test_aggregate_prefers_failure_then_undecided():
    assert aggregate([Outcome.passed, Outcome.passed]) == Outcome.passed
    assert aggregate([Outcome.passed, Outcome.undecided]) == Outcome.undecided
    assert aggregate([Outcome.undecided, Outcome.failed]) == Outcome.failed


def test_report_overall_is_derived_and_checked():
    report = ExperimentReport(
        name="x", c=(0.0, 0.0),
        measurements=[Measurement(label="a", outcome=Outcome.passed)],
    )
    assert report.overall == Outcome.passed
    assert ExperimentReport(name="empty", c=(0.0, 0.0)).overall == Outcome.failed
    with pytest.raises(ValueError):
        ExperimentReport(
            name="x", c=(0.0, 0.0), overall=Outcome.passed,
            measurements=[Measurement(label="a", outcome=Outcome.undecided)],
        )


def test_chebyshev_experiment_passes():
    report = exp_chebyshev_oracle()
    assert report.overall == Outcome.passed, _labels(report, Outcome.failed)
    assert report.c == (-2.0, 0.0)
    assert any(m.label.startswith("psi oracle") for m in report.measurements)


def test_shallow_chebyshev_landings_are_undecided():
    report = exp_chebyshev_oracle(depth=6)
    landings = [m for m in report.measurements if m.label.startswith("landing")]
    assert len(landings) == 6
    assert all(m.outcome == Outcome.undecided for m in landings)
    assert report.overall != Outcome.passed


def test_golden_map_and_critical_angle():
    qmap = golden_siegel_map()
    assert abs(qmap.c_complex - complex(-0.390541, -0.586788)) < 1e-6
    approx = golden_critical_angle(48)
    assert approx.error_bound <= Fraction(1, 2**56)
    assert abs(float(approx.value) - 0.3549) < 5e-4


def test_golden_siegel_report_shape():
    report = exp_golden_siegel(depth=12)
    assert report.name == "golden-siegel"
    assert report.inputs["depth"] == 12
    by_label = {m.label: m for m in report.measurements}
    assert by_label["critical angle error bound"].outcome == Outcome.passed
    assert by_label["tau symmetry"].outcome == Outcome.passed
    assert report.overall == aggregate([m.outcome for m in report.measurements])



def test_golden_siegel_passes_at_its_defaults():
    report = run_experiment("golden-siegel")
    assert report.overall == Outcome.passed, _labels(report, Outcome.failed)
    assert (report.inputs["depth"], report.inputs["substeps"]) == (SIEGEL_DEPTH, SIEGEL_SUBSTEPS)
    assert SIEGEL_DEPTH * SIEGEL_SUBSTEPS >= 120
    by_label = {m.label: m for m in report.measurements}
    assert by_label["R_t* deepest distance to 0"].value <= 5e-2
    assert by_label["R_t*+1/2 deepest distance to 0"].value <= 5e-2
    assert by_label["R_2t* deepest distance to c"].value <= 5e-2


def test_golden_siegel_too_shallow_fails():
    # 30 doublings leave R_t* about 0.17 from the critical point
    report = exp_golden_siegel(depth=30, m=4)
    assert report.overall == Outcome.failed
    assert "R_t* deepest distance to 0" in _labels(report, Outcome.failed)


def test_best_pairing():
    points = [1 + 0.01j, -1, 1, -1 - 0.02j]
    pairing, intra, inter = _best_pairing(points)
    assert pairing == [(0, 2), (1, 3)]
    assert intra == pytest.approx(0.02)
    assert inter == pytest.approx(2, abs=0.02)


def test_run_experiment_rejects_unknown_names():
    assert set(EXPERIMENTS) == {"chebyshev", "golden-siegel", "preimage-cluster"}
    with pytest.raises(KeyError):
        run_experiment("mandelbrot")


def test_preimage_cluster_passes():
    report = exp_preimage_cluster()
    assert report.name == "preimage-cluster"
    assert len(report.inputs["angles"]) == 4
    assert report.overall == Outcome.passed, _labels(report, Outcome.failed)
    by_label = {m.label: m for m in report.measurements}
    assert by_label["cluster 0 doubled angles"].outcome == Outcome.passed
    assert by_label["cluster 1 doubled angles"].outcome == Outcome.passed
    assert by_label["centers are negatives"].value <= 5e-2


def test_verify_all_bundles_reports():
    suite = verify_all(depth=8)
    assert [r.name for r in suite.reports] == list(EXPERIMENTS)
    assert suite.overall == aggregate([r.overall for r in suite.reports])
    assert suite.cremer_statement == CREMER_STATEMENT
