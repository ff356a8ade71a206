"""Test the rate accounting of distributed compression."""
import math

from pydantic import ValidationError
import pytest

from mutual_independence.common.errors import PreconditionError
from mutual_independence.compression.rates import (
    RatePoint,
    converse_bounds,
    corner_points,
    multipartite_decomposed,
    multipartite_rate_sum,
    rate_pair_exact,
    rate_region_report,
    rate_sum_identity_check,
    rate_sum_theorem,
)
from mutual_independence.mindep.exact import LabelSplit
from mutual_independence.mindep.private_states import make_pdit, plant_exact_mi, random_controlled_twist
from mutual_independence.quantum.entropy import j_quantity
from mutual_independence.quantum.state import ghz_state, maximally_entangled, maximally_mixed

CUT = (("A",), ("B",))
PBIT_CUT = (("A", "A'"), ("B", "B'"))


def test_rate_sum_of_maximally_entangled_pair():
    """Phi+: J/2 = 1 and I_ind = 1 give a zero rate sum."""
    phi = maximally_entangled(2)
    assert rate_sum_theorem(phi, 1.0, CUT) == pytest.approx(0.0, abs=1e-12)
    assert rate_sum_theorem(phi, 0.0, CUT) == pytest.approx(1.0)


def test_rate_sum_of_maximally_mixed_state():
    """Uncorrelated qubits cost their full entropy."""
    assert rate_sum_theorem(maximally_mixed([("A", 2), ("B", 2)]), 0.0, CUT) == pytest.approx(2.0)


@pytest.mark.parametrize("iind", [-0.1, 1.5])
def test_rate_sum_rejects_out_of_range_iind(iind):
    """I_ind must lie in [0, I(A:B)/2]."""
    with pytest.raises(PreconditionError):
        rate_sum_theorem(maximally_entangled(2), iind, CUT)


def test_corner_points_sum_to_half_j():
    """Both unassisted corners sum to J(A:B)/2."""
    state = make_pdit(2)
    half_j = 0.5 * j_quantity(state, list(PBIT_CUT))
    for point in corner_points(state, PBIT_CUT):
        assert point.rate_sum == pytest.approx(half_j)


@pytest.mark.parametrize("state", [
    make_pdit(2),
    make_pdit(3, twist=random_controlled_twist(3, 2, seed=1)),
    plant_exact_mi(seed=2),
])
def test_rate_sum_identity(state):
    """Redistribution pairs sum to J/2 - I(alpha:beta)/2 in both orders."""
    split = LabelSplit()
    identity = rate_sum_identity_check(state, split)
    assert identity.gap <= 1e-8
    a_first = rate_pair_exact(state, split, "a-first")
    b_first = rate_pair_exact(state, split, "b-first")
    assert a_first.rate_sum == pytest.approx(b_first.rate_sum, abs=1e-8)
    assert a_first.assumptions.endswith("sends a first")


def test_rate_pair_requires_independent_key():
    """Keys correlated with the reference are rejected."""
    state = maximally_mixed([("A", 2), ("B", 2), ("A'", 2), ("B'", 2)])
    with pytest.raises(PreconditionError):
        rate_pair_exact(state, LabelSplit())


def test_multipartite_ghz():
    """GHZ on three qubits: J/2 = 3/2 and the fully independent split costs nothing."""
    ghz = ghz_state(["A", "B", "C"])
    parts = [["A"], ["B"], ["C"]]
    assert multipartite_rate_sum(ghz, parts, 1.5) == pytest.approx(0.0, abs=1e-12)
    decomposed = multipartite_decomposed(ghz, parts, parts)
    assert decomposed.rate_sum == pytest.approx(0.0, abs=1e-12)
    assert decomposed.residual_independence == pytest.approx(0.0, abs=1e-12)
    trivial = multipartite_decomposed(ghz, parts, [[], [], []])
    assert trivial.rate_sum == pytest.approx(1.5)
    with pytest.raises(PreconditionError):
        multipartite_rate_sum(ghz, parts, 2.0)


def test_multipartite_alpha_must_be_inside_party():
    """Independent parts are subsets of their parties."""
    with pytest.raises(PreconditionError):
        multipartite_decomposed(ghz_state(["A", "B"]), [["A"], ["B"]], [["B"], ["A"]])


def test_converse_bounds_of_maximally_entangled_pair():
    """Pure states need no merging; the sum bound is J/2 - E_sq."""
    bounds = converse_bounds(maximally_entangled(2), 1.0, CUT)
    assert bounds.R_A_min == pytest.approx(0.0, abs=1e-12)
    assert bounds.sum_min == pytest.approx(0.0, abs=1e-12)


def test_rate_region_report():
    """The report carries corners, conjectural corners, the optimal sum and the identity."""
    state = make_pdit(2)
    report = rate_region_report(state, 1.0, PBIT_CUT, split=LabelSplit(), iind_value=0.5, iind_provenance="exact")
    assert len(report.achievable) == 4
    assert len(report.conjectural) == 2
    assert report.identity.gap <= 1e-8
    assert report.optimal_rate_sum == pytest.approx(0.5 * j_quantity(state, list(PBIT_CUT)) - 0.5)
    lines = report.to_csv().split("\n")
    assert lines[0] == "R_A,R_B,formula,assumptions"
    assert len([line for line in lines if line]) == 7
    assert "\r" not in report.to_csv()


def test_report_rejects_points_below_converse():
    """A converse larger than every achievable sum is inconsistent."""
    with pytest.raises(ValidationError, match="converse"):
        rate_region_report(maximally_entangled(2), -5.0, CUT)


def test_rate_point_must_be_finite():
    """Rates are finite numbers."""
    with pytest.raises(ValidationError):
        RatePoint(R_A=math.inf, R_B=0.0, formula="f")
