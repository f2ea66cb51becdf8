"""
Desk-scale reproductions for the modular group; run with `pytest --runslow`
"""
import numpy as np
import pytest

from scripts.hypangles import main
from src.correlation.angle_records import AngleTable
from src.correlation.pair_correlation import empirical_R2
from src.evaluation.metrics import CurveEvaluator
from src.geometry.group_element import T
from src.lattices.enumeration import count_vs_asymptotic, enumerate_psl2z
from src.reporting.commands import EXIT_OK
from src.theory.lattice_sums import theory_curve, theory_enumeration
from src.utils.helpers import read_table
from src.volumes.monte_carlo import check_volume
from src.volumes.region import RegionSpec

pytestmark = pytest.mark.slow

GRID = 0.05 * np.arange(1, 81)


def test_ball_count_matches_area(psl2z):
    errors = [abs(count_vs_asymptotic(enumerate_psl2z(Q), psl2z) - 1.0) for Q in (200.0, 500.0, 1000.0)]
    assert errors[0] <= 0.05
    assert errors[0] > errors[1] > errors[2]


@pytest.fixture(scope="module")
def paircorr_gaps(psl2z):
    evaluator = CurveEvaluator(tolerance=0.10)
    theory_enum = theory_enumeration(psl2z, float(GRID.max()))
    theory = theory_curve(GRID, theory_enum, psl2z)
    gaps = {}
    for Q in (500.0, 1000.0):
        table = AngleTable.from_enumeration(enumerate_psl2z(Q))
        curve = empirical_R2(table, Q, GRID, psl2z.covolume)
        gaps[Q] = evaluator.calculate_metrics(GRID, curve.R2_emp, theory.R2)["max_relative_gap"]
    return gaps


def test_pair_correlation_within_tolerance(paircorr_gaps):
    assert paircorr_gaps[500.0] <= 0.10


def test_pair_correlation_gap_shrinks(paircorr_gaps):
    assert paircorr_gaps[1000.0] <= paircorr_gaps[500.0]


def test_volume_check_at_full_sample_size():
    for Q in (50.0, 100.0, 200.0):
        check = check_volume(RegionSpec(T, Q, 1.0), 10_000_000, seed=12345, slack=5.0)
        assert check.passed
        assert check.estimate.stderr / check.closed_form < 0.005


def test_volcheck_reports_shrinking_quadrature_gap(tmp_path):
    code = main(["volcheck", "--M", "T", "--q-values", "50,100,200", "--xi-values", "1",
                 "--samples", "10000000", "--seed", "12345", "--out", str(tmp_path)])
    assert code == EXIT_OK
    table = read_table(tmp_path / "volcheck.csv")
    gaps = np.abs(table["quad_volume"] - table["closed_form"]) / table["closed_form"]
    assert np.all(np.diff(gaps.to_numpy()) < 0)
