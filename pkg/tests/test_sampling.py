"""Test seeded Haar sampling."""
import numpy as np
import pytest

from mutual_independence.common.errors import DimensionError
from mutual_independence.quantum.sampling import haar_isometry, haar_unitary, random_density, random_pure, stream


def test_streams_are_reproducible_and_distinct():
    """Same path, same numbers; different paths, different numbers."""
    assert stream(5, 1).random() == stream(5, 1).random()
    assert stream(5, 1).random() != stream(5, 2).random()
    assert stream(5).random() != stream(6).random()


@pytest.mark.parametrize("dim", [1, 2, 5])
def test_haar_unitary_is_unitary(dim):
    """Sampled matrices are unitary."""
    u = haar_unitary(dim, 3)
    assert np.allclose(u.conj().T @ u, np.eye(dim))


def test_haar_unitary_rejects_empty_dimension():
    """Dimension zero is an error."""
    with pytest.raises(DimensionError):
        haar_unitary(0, 1)


def test_haar_isometry_shapes():
    """Isometries keep the requested labels and orthonormal columns."""
    v = haar_isometry([("A", 2)], [("X", 2), ("G", 3)], 11)
    assert v.in_labels == ("A",)
    assert v.out_labels == ("X", "G")
    assert v.matrix.shape == (6, 2)
    with pytest.raises(DimensionError):
        haar_isometry(4, 2, 0)


@pytest.mark.parametrize("rank", [1, 2, 4])
def test_random_density_rank(rank):
    """The sampled density has the requested rank and unit trace."""
    rho = random_density([("A", 2), ("B", 2)], rank=rank, seed=2)
    assert np.trace(rho.matrix).real == pytest.approx(1.0)
    assert int(np.sum(rho.spectrum() > 1e-10)) == rank


def test_random_density_rank_out_of_range():
    """Ranks outside [1, dim] are rejected."""
    with pytest.raises(DimensionError):
        random_density(2, rank=3)


def test_random_pure_is_normalized():
    """Random pure states have unit norm."""
    psi = random_pure([("A", 3)], 8)
    assert np.linalg.norm(psi.matrix) == pytest.approx(1.0)
