"""Test the hashing bound of maximally correlated states."""
from hypothesis import given, settings, strategies as st
import numpy as np
import pytest
from scipy.stats import entropy as shannon

from mutual_independence.common.errors import PreconditionError
from mutual_independence.mindep.hashing import bell_diagonal_mixture, is_maximally_correlated, maxcorr_hashing_bound
from mutual_independence.quantum.entropy import binary_entropy, vn_entropy
from mutual_independence.quantum.sampling import random_density
from mutual_independence.quantum.state import density_state, maximally_entangled, maximally_mixed


@pytest.mark.parametrize("epsilon", np.linspace(0.0, 0.5, 11))
def test_hashing_bound_on_bell_mixtures(epsilon):
    """The bound is max(0, 1 - h(eps)) / 2 and the ccq audit agrees."""
    result = maxcorr_hashing_bound(bell_diagonal_mixture(float(epsilon)))
    expected = max(0.0, 1.0 - binary_entropy(float(epsilon))) / 2
    assert result.bound == pytest.approx(expected, abs=1e-10)
    assert result.audit_gap <= 1e-9


def test_reference_value():
    """eps = 1/4 gives 0.0943609377704336."""
    assert maxcorr_hashing_bound(bell_diagonal_mixture(0.25)).bound == pytest.approx(0.0943609377704336)


def test_maximally_correlated_detection():
    """Bell mixtures are maximally correlated, the maximally mixed state is not."""
    assert is_maximally_correlated(maximally_entangled(3).as_density())
    assert not is_maximally_correlated(maximally_mixed([("A", 2), ("B", 2)]))
    with pytest.raises(PreconditionError):
        maxcorr_hashing_bound(maximally_mixed([("A", 2), ("B", 2)]))


def test_epsilon_range():
    """The mixing weight is a probability."""
    with pytest.raises(ValueError):
        bell_diagonal_mixture(-0.1)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), d=st.sampled_from([2, 3, 4]))
def test_hashing_bound_on_random_maximally_correlated_states(seed, d):
    """On sum_ij a_ij |ii><jj| the bound is (H(diag a) - S(a)) / 2 and the ccq audit agrees."""
    core = random_density(d, seed=seed)
    a = core.density_matrix
    diagonal = [i * d + i for i in range(d)]
    rho = np.zeros((d * d, d * d), dtype=complex)
    rho[np.ix_(diagonal, diagonal)] = a
    result = maxcorr_hashing_bound(density_state(rho, [("A", d), ("B", d)]))
    expected = max(0.0, 0.5 * (shannon(np.real(np.diag(a)), base=2) - vn_entropy(core)))
    assert result.bound == pytest.approx(expected, abs=1e-9)
    assert result.audit_gap <= 1e-9
