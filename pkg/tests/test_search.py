"""Test the single-copy split search."""
from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from mutual_independence.common.errors import DimensionError
from mutual_independence.mindep.private_states import make_pbit
from mutual_independence.mindep.search import SplitDims, givens_parameter_count, givens_unitary, split_search_lower
from mutual_independence.quantum.entropy import mutual_info
from mutual_independence.quantum.sampling import random_density
from mutual_independence.quantum.state import maximally_entangled, maximally_mixed

PBIT_CUT = (("A", "A'"), ("B", "B'"))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_givens_unitary(d):
    """Zero parameters give the identity; random ones a unitary."""
    assert np.allclose(givens_unitary(np.zeros(givens_parameter_count(d)), d), np.eye(d))
    u = givens_unitary(np.random.default_rng(0).uniform(-3, 3, givens_parameter_count(d)), d)
    assert np.allclose(u.conj().T @ u, np.eye(d))


def test_pure_state_split():
    """A maximally entangled pair splits trivially with I/2 = 1."""
    result = split_search_lower(maximally_entangled(2), SplitDims(alpha=2, beta=2), cut=("A", "B"))
    assert result.report.lower_bound == pytest.approx(1.0)
    assert result.report.residual_independence <= 1e-6


def test_pbit_split_reaches_key():
    """The identity start already separates the pbit key from its shield."""
    result = split_search_lower(make_pbit(), SplitDims(alpha=2, a=2, beta=2, b=2), cut=PBIT_CUT, restarts=1, seed=0)
    assert result.report.lower_bound >= 0.5 - 1e-9
    assert result.report.residual_independence <= 1e-6


def test_uncorrelated_state_has_no_lower_bound():
    """Nothing in the maximally mixed state is product with R and correlated."""
    result = split_search_lower(maximally_mixed([("A", 2), ("B", 2)]), SplitDims(alpha=2, beta=2), cut=("A", "B"))
    assert result.report.lower_bound == 0.0


def test_dimensions_must_factor():
    """Split dims must multiply to the local dimensions."""
    with pytest.raises(DimensionError):
        split_search_lower(make_pbit(), SplitDims(alpha=3, beta=2), cut=PBIT_CUT)


def test_search_is_seed_deterministic():
    """Same seed, same best split."""
    kwargs = {"cut": PBIT_CUT, "restarts": 2, "seed": 5}
    first = split_search_lower(make_pbit(), SplitDims(alpha=2, a=2, beta=2, b=2), **kwargs)
    second = split_search_lower(make_pbit(), SplitDims(alpha=2, a=2, beta=2, b=2), **kwargs)
    assert first.report.lower_bound == second.report.lower_bound
    assert np.array_equal(first.best.u_a, second.best.u_a)


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), rank=st.integers(1, 2))
def test_search_never_exceeds_half_mutual_information(seed, rank):
    """A certified split of a random low-rank state stays below I(A:B) / 2."""
    rho = random_density([("A", 2), ("A'", 2), ("B", 2)], rank=rank, seed=seed)
    cut = (("A", "A'"), ("B",))
    result = split_search_lower(rho, SplitDims(alpha=2, a=2, beta=2, b=1), cut=cut, restarts=2, seed=seed % 1000)
    assert result.report.lower_bound <= 0.5 * mutual_info(rho, ("A", "A'"), "B") + 1e-9
