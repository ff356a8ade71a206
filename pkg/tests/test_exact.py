"""Test the exact mutual-independence check and the twisting isometry."""
from hypothesis import given, settings, strategies as st
import numpy as np
from pydantic import ValidationError
import pytest

from mutual_independence.common.errors import DecompositionError, LabelError, PreconditionError
from mutual_independence.common.settings import reset_settings, use_settings
from mutual_independence.mindep.exact import LabelSplit, check_exact_mi, extract_twisting, independence_residual
from mutual_independence.mindep.private_states import (
    ebit_with_junk,
    make_pbit,
    make_pdit,
    plant_exact_mi,
    random_controlled_twist,
)
from mutual_independence.quantum.sampling import random_density
from mutual_independence.quantum.state import apply_isometry, maximally_mixed, partial_trace, permute, purify


def test_label_split_roles():
    """Roles combine into Alice's, Bob's, key and shield labels."""
    split = LabelSplit()
    assert split.alice == ("A", "A'")
    assert split.bob == ("B", "B'")
    assert split.key == ("A", "B")
    assert split.shield == ("A'", "B'")


def test_label_split_rejects_shared_labels():
    """A label cannot play two roles."""
    with pytest.raises(ValidationError):
        LabelSplit(alpha=("A",), a=("A",), beta=("B",), b=())


def test_split_must_cover_state():
    """The split must name exactly the labels of the state."""
    with pytest.raises(LabelError):
        LabelSplit().check(maximally_mixed([("A", 2), ("B", 2)]))
    with pytest.raises(LabelError):
        LabelSplit(a=(), b=()).check(make_pbit())


@pytest.mark.parametrize("d,expected", [(2, 0.5), (3, 0.7924812503605781), (4, 1.0)])
def test_pdit_is_exact(d, expected):
    """The key of a pdit is independent of the reference; I/2 = log2(d) / 2."""
    check = check_exact_mi(make_pdit(d, twist=random_controlled_twist(d, 2, seed=d)))
    assert check.is_exact
    assert check.residual <= 1e-8
    assert check.mi_half == pytest.approx(expected)


def test_ebit_key_gives_full_bit():
    """With an ebit key, I(A:B)/2 is one bit."""
    check = check_exact_mi(make_pbit(key="ebit"))
    assert check.is_exact
    assert check.mi_half == pytest.approx(1.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ebit_with_junk_and_planted_states_are_exact(seed):
    """Junk next to an ebit and planted instances pass the check."""
    assert check_exact_mi(ebit_with_junk(seed=seed)).is_exact
    assert check_exact_mi(plant_exact_mi(seed=seed)).is_exact


def test_maximally_mixed_is_not_exact():
    """Uncorrelated keys fail the check even though they are product with R."""
    state = maximally_mixed([("A", 2), ("B", 2), ("A'", 2), ("B'", 2)])
    check = check_exact_mi(state)
    assert not check.is_exact
    assert check.mi_half == pytest.approx(0.0, abs=1e-12)


def test_independence_residual_of_empty_key():
    """The empty key is trivially independent."""
    psi = purify(make_pbit())
    assert independence_residual(psi, (), "R") == 0.0


def test_twisting_reconstructs_normal_form():
    """The shield isometry brings a twisted pbit to psi (x) rho_D."""
    state = make_pbit(twist=random_controlled_twist(2, 2, seed=7))
    result = extract_twisting(state)
    assert result.reconstruction_error <= 1e-7
    assert result.isometry.in_labels == ("A'", "B'")
    ordered = permute(state, ("A", "B", "A'", "B'"))
    twisted = apply_isometry(ordered, result.isometry)
    key_c = partial_trace(twisted, ("A", "B") + result.isometry.out_labels[:1])
    assert np.allclose(key_c.density_matrix, result.psi_abc.density_matrix, atol=1e-6)


def test_twisting_requires_exactness():
    """States without exact mutual independence cannot be twisted."""
    with pytest.raises(PreconditionError):
        extract_twisting(maximally_mixed([("A", 2), ("B", 2), ("A'", 2), ("B'", 2)]))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), d=st.sampled_from([2, 3]))
def test_twisting_round_trip_on_random_pdits(seed, d):
    """Randomly twisted pdits with random shield noise come back to psi (x) rho_D."""
    noise = random_density([("D", 2)], seed=seed)
    state = make_pdit(d, twist=random_controlled_twist(d, 2, seed=seed), noise=noise)
    result = extract_twisting(state)
    assert result.reconstruction_error <= 1e-7
    assert np.isclose(np.trace(result.rho_d.density_matrix).real, 1.0)


def test_twisting_above_tolerance_is_an_error():
    """A normal form reconstructed outside twist_tol is rejected, not returned."""
    state = make_pbit(twist=random_controlled_twist(2, 2, seed=11))
    try:
        use_settings(twist_tol=1e-300)
        with pytest.raises(DecompositionError, match="twisting reconstruction error"):
            extract_twisting(state)
    finally:
        reset_settings()
