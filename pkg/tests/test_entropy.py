"""Test entropic functionals."""
import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from mutual_independence.common.errors import PreconditionError
from mutual_independence.quantum.entropy import (
    af_bound,
    binary_entropy,
    coherent_info,
    cond_mutual_info,
    entropic_report,
    j_quantity,
    multi_info,
    mutual_info,
    relative_entropy,
    vn_entropy,
)
from mutual_independence.quantum.sampling import random_density
from mutual_independence.quantum.state import (
    MultipartiteState,
    ghz_state,
    ket,
    maximally_entangled,
    maximally_mixed,
    partial_transpose,
)

seeds = st.integers(min_value=0, max_value=2**32)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_maximally_entangled_values(d):
    """Phi_d has S(A) = log d, I(A:B) = 2 log d and I(A>B) = log d."""
    phi = maximally_entangled(d)
    assert vn_entropy(phi, "A") == pytest.approx(math.log2(d))
    assert vn_entropy(phi) == 0.0
    assert mutual_info(phi, "A", "B") == pytest.approx(2 * math.log2(d))
    assert coherent_info(phi, "A", "B") == pytest.approx(math.log2(d))
    assert j_quantity(phi, ["A", "B"]) == pytest.approx(2 * math.log2(d))


def test_empty_labels_have_zero_entropy():
    """The entropy of no subsystem is zero."""
    assert vn_entropy(maximally_mixed([("A", 3)]), []) == 0.0


def test_operator_states_are_rejected():
    """Entropies need a density or a pure vector."""
    with pytest.raises(PreconditionError):
        vn_entropy(partial_transpose(maximally_entangled(2), "B"))


def test_overlapping_parts_are_rejected():
    """Mutual information needs disjoint parts."""
    with pytest.raises(PreconditionError):
        mutual_info(maximally_entangled(2), ["A"], ["A", "B"])
    with pytest.raises(PreconditionError):
        multi_info(ghz_state(["A", "B"]), [["A"], ["A"]])


def test_ghz_report():
    """GHZ on three qubits: one bit per party, zero joint, multi-information 3."""
    values = entropic_report(ghz_state(["A", "B", "C"])).values
    assert values["S(A)"] == pytest.approx(1.0)
    assert values["S(ABC)"] == pytest.approx(0.0, abs=1e-12)
    assert values["I(A:B)"] == pytest.approx(1.0)
    assert values["I(A>B)"] == pytest.approx(0.0, abs=1e-12)
    assert values["J(A:B:C)"] == pytest.approx(3.0)
    assert values["I(A:B:C)"] == pytest.approx(3.0)


def test_report_with_grouped_parts():
    """Parties may group several subsystems."""
    values = entropic_report(ghz_state(["A", "B", "C"]), parts=[["A", "B"], ["C"]]).values
    assert values["S(AB)"] == pytest.approx(1.0)
    assert values["I(AB:C)"] == pytest.approx(2.0)


def test_report_table_lists_every_value():
    """The table has a header and one line per value."""
    report = entropic_report(maximally_entangled(2))
    lines = report.to_table().splitlines()
    assert lines[0].startswith("quantity")
    assert len(lines) == len(report.values) + 1


def test_relative_entropy_support_mismatch():
    """S(rho || sigma) is infinite when rho leaves the support of sigma."""
    mixed = maximally_mixed([("A", 2)])
    zero = ket([0], [("A", 2)]).as_density()
    assert relative_entropy(mixed, zero) == math.inf
    assert relative_entropy(zero, mixed) == pytest.approx(1.0)
    assert relative_entropy(mixed, mixed) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("p,expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.25, 0.8112781244591328)])
def test_binary_entropy(p, expected):
    """Binary entropy at reference points."""
    assert binary_entropy(p) == pytest.approx(expected)


def test_binary_entropy_range():
    """Probabilities outside [0, 1] are rejected."""
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_af_bound_is_monotone():
    """The continuity bound vanishes at zero and grows with epsilon."""
    values = [af_bound(eps, 4) for eps in np.linspace(0.0, 1.0, 11)]
    assert values[0] == 0.0
    assert all(b >= a for a, b in zip(values, values[1:], strict=False))
    with pytest.raises(ValueError):
        af_bound(-0.1, 2)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_strong_subadditivity(seed):
    """I(A:B|C) >= 0 on random three-qubit states."""
    rho = random_density([("A", 2), ("B", 2), ("C", 2)], seed=seed)
    assert cond_mutual_info(rho, "A", "B", "C") >= -1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds, rank=st.integers(1, 6))
def test_araki_lieb_and_subadditivity(seed, rank):
    """|S(A) - S(B)| <= S(AB) <= S(A) + S(B)."""
    rho = random_density([("A", 2), ("B", 3)], rank=rank, seed=seed)
    s_a, s_b, s_ab = vn_entropy(rho, "A"), vn_entropy(rho, "B"), vn_entropy(rho)
    assert abs(s_a - s_b) <= s_ab + 1e-9
    assert s_ab <= s_a + s_b + 1e-9


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_entropy_bounded_by_log_dimension(seed):
    """0 <= S(rho) <= log2 dim."""
    rho: MultipartiteState = random_density([("A", 3)], seed=seed)
    assert -1e-12 <= vn_entropy(rho) <= math.log2(3) + 1e-12
