"""Test the constant-expectation operator condition."""
import numpy as np
import pytest

from mutual_independence.common.errors import DimensionError
from mutual_independence.conjectures.operators import (
    OperatorPair,
    build_local_eve_state,
    local_eve_bipartite,
    operator_check,
    operator_conjecture_test,
    operator_search,
    traceless_basis,
)
from mutual_independence.mindep.hashing import bell_diagonal_mixture
from mutual_independence.quantum.state import maximally_entangled, maximally_mixed, partial_trace

Z = np.diag([1.0, -1.0])
X = np.array([[0.0, 1.0], [1.0, 0.0]])


def test_zz_pair_on_maximally_correlated_state():
    """Z (x) Z is constant on the span of |00> and |11>."""
    check = operator_check(bell_diagonal_mixture(0.25), Z, Z)
    assert check.holds
    assert check.c == pytest.approx(0.5)
    assert check.residual == pytest.approx(0.0, abs=1e-12)


def test_xx_pair_fails_on_mixture():
    """X (x) X separates Phi+ from Phi- inside the support."""
    assert not operator_check(bell_diagonal_mixture(0.25), X, X).holds


def test_identity_is_trivial():
    """Operators in span{1} never satisfy the condition."""
    check = operator_check(bell_diagonal_mixture(0.25), np.eye(2), Z)
    assert not check.holds
    assert check.margin_a == pytest.approx(0.0)


def test_check_is_invariant_under_rescaling():
    """A -> uA + v1 leaves the decision and the constant unchanged."""
    state = bell_diagonal_mixture(0.25)
    plain = operator_check(state, Z, Z)
    shifted = operator_check(state, 3 * Z + 2 * np.eye(2), Z - np.eye(2))
    assert shifted.holds == plain.holds
    assert shifted.c == pytest.approx(plain.c)


def test_check_dimension_mismatch():
    """Operators must match the local dimensions."""
    with pytest.raises(DimensionError):
        operator_check(bell_diagonal_mixture(0.25), np.eye(3), Z)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_traceless_basis(d):
    """The basis is orthonormal, traceless and Hermitian."""
    basis = traceless_basis(d)
    assert len(basis) == d * d - 1
    assert len(traceless_basis(d, diagonal=True)) == d - 1
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(len(basis)))
    for g in basis:
        assert abs(np.trace(g)) < 1e-12
        assert np.allclose(g, g.conj().T)


def test_diagonal_search_finds_zz():
    """The diagonal search recovers Z (x) Z on a maximally correlated state."""
    result = operator_search(bell_diagonal_mixture(0.25), seed=0, restarts=2, diagonal=True)
    assert result.pair is not None
    assert result.pair.residual <= 1e-8
    assert result.diagonal


def test_pure_state_always_has_pair():
    """On a one-dimensional support every expectation is constant."""
    result = operator_search(maximally_entangled(2), seed=1, restarts=1)
    assert result.pair is not None


def test_full_rank_state_has_no_pair():
    """On the full space A (x) B = c 1 forces trivial operators."""
    result = operator_search(maximally_mixed([("A", 2), ("B", 2)]), seed=0, restarts=2)
    assert result.pair is None
    assert result.best_residual > 1e-3


def test_pair_serialization():
    """Pairs survive a JSON round trip."""
    pair = OperatorPair(dims=(2, 2), a_op=Z / np.sqrt(2), b_op=Z / np.sqrt(2), c=0.5, residual=0.0)
    loaded = OperatorPair.model_validate_json(pair.model_dump_json())
    assert np.allclose(loaded.a_op, pair.a_op)


def test_local_eve_states():
    """The classical and the purified local-Eve states are consistent."""
    p_matrix = np.eye(2) / 2
    classical = build_local_eve_state(p_matrix, 0.5, 2)
    assert classical.labels == ("A", "B", "E1", "E2")
    assert np.trace(classical.matrix).real == pytest.approx(1.0)
    bipartite = local_eve_bipartite(p_matrix, 0.5, 2)
    assert bipartite.labels == ("A", "A'", "B", "B'")
    assert np.allclose(
        np.diag(partial_trace(bipartite, ("A", "B")).matrix), np.diag(partial_trace(classical, ("A", "B")).matrix)
    )


def test_local_eve_has_diagonal_pair():
    """Z on the key symbols is constant on the support of the purified local-Eve state."""
    state = local_eve_bipartite(np.eye(2) / 2, 0.5, 2)
    a_op = np.kron(Z, np.eye(2))
    check = operator_check(state, a_op, a_op, cut=(("A", "A'"), ("B", "B'")))
    assert check.holds


def test_conjecture_test_without_certificate():
    """Without certification there is no lower bound and no verdict."""
    report = operator_conjecture_test(bell_diagonal_mixture(0.25), seed=0, restarts=1, diagonal=True)
    assert report.lower_bound is None
    assert not report.violation


def test_conjecture_test_certified_on_uncorrelated_state():
    """Zero certified independence never counts as a violation."""
    report = operator_conjecture_test(maximally_mixed([("A", 2), ("B", 2)]), seed=0, restarts=1, certify=True)
    assert report.lower_bound == pytest.approx(0.0, abs=1e-6)
    assert not report.violation
