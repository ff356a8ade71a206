"""Test the constructors of private states."""
import numpy as np
import pytest

from mutual_independence.common.errors import DimensionError
from mutual_independence.mindep.private_states import (
    controlled_twist,
    ebit_with_junk,
    key_state,
    make_pbit,
    make_pdit,
    plant_exact_mi,
)
from mutual_independence.quantum.entropy import mutual_info, vn_entropy
from mutual_independence.quantum.state import density_state, maximally_entangled, partial_trace


def test_key_state_kinds():
    """GHZ keys are classically correlated, ebit keys maximally entangled."""
    ghz = key_state(2, "ghz")
    assert ghz.labels == ("A", "B", "C")
    assert mutual_info(ghz, "A", "B") == pytest.approx(1.0)
    ebit = key_state(2, "ebit")
    assert ebit.shape == (2, 2, 1)
    assert mutual_info(ebit, "A", "B") == pytest.approx(2.0)
    with pytest.raises(ValueError):
        key_state(2, "bell")


def test_pdit_labels_and_dims():
    """Pdits live on A, B, A', B' with a qubit B' by default."""
    state = make_pdit(3)
    assert state.labels == ("A", "B", "A'", "B'")
    assert state.shape == (3, 3, 3, 2)
    assert np.trace(state.density_matrix).real == pytest.approx(1.0)


def test_pdit_rejects_trivial_key():
    """The key needs at least two values."""
    with pytest.raises(DimensionError):
        make_pdit(1)


def test_twist_keeps_key_marginal():
    """A controlled twist on the shield leaves rho_AB unchanged."""
    twist = controlled_twist([np.eye(2), np.array([[0, 1], [1, 0]])])
    plain, twisted = make_pbit(), make_pbit(twist=twist)
    assert np.allclose(partial_trace(plain, ("A", "B")).matrix, partial_trace(twisted, ("A", "B")).matrix)


def test_noise_sets_shield_entropy():
    """The B' marginal of an untwisted pbit is the given noise."""
    noise = density_state(np.diag([0.75, 0.25]), [("N", 2)])
    state = make_pbit(noise=noise)
    assert vn_entropy(state, "B'") == pytest.approx(0.8112781244591328)


def test_ebit_with_junk_keeps_ebit():
    """The A, B marginal is the maximally entangled state."""
    state = ebit_with_junk(seed=3)
    assert np.allclose(partial_trace(state, ("A", "B")).matrix, maximally_entangled(2).density_matrix)
    with pytest.raises(DimensionError):
        ebit_with_junk(junk=density_state(np.eye(2) / 2, [("J", 2)]))


def test_planted_state_is_seeded():
    """Same seed, same state."""
    assert np.array_equal(plant_exact_mi(seed=4).matrix, plant_exact_mi(seed=4).matrix)
    assert plant_exact_mi(da=3, dd=3, seed=1).shape == (3, 2, 2, 3)
