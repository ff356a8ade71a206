"""Test labeled states, isometries and the tensor operations."""
from hypothesis import given, settings, strategies as st
import numpy as np
from pydantic import ValidationError
import pytest

from mutual_independence.common.errors import DimensionError, LabelError
from mutual_independence.quantum.sampling import random_density, random_pure
from mutual_independence.quantum.state import (
    Isometry,
    MultipartiteState,
    apply_isometry,
    apply_unitary,
    bell_state,
    density_state,
    dephase,
    fresh_label,
    ghz_state,
    group_subsystems,
    ket,
    maximally_entangled,
    maximally_mixed,
    mixture,
    pad_subsystem,
    partial_trace,
    partial_transpose,
    permute,
    pure_state,
    purify,
    relabel,
    tensor_product,
    trace_distance,
    trace_norm,
)


@pytest.mark.parametrize("matrix,invariant", [
    ([[1, 1], [0, 0]], "hermitian"),
    ([[1, 0], [0, 1]], "unit-trace"),
    ([[1.5, 0], [0, -0.5]], "psd"),
    ([[1, 0, 0], [0, 0, 0], [0, 0, 0]], "dims-product"),
])
def test_density_invariants(matrix, invariant):
    """Broken invariants are reported by name."""
    with pytest.raises(ValidationError, match=invariant):
        density_state(matrix, [("A", 2)])


def test_duplicate_labels_rejected():
    """Labels must be unique."""
    with pytest.raises(ValidationError, match="labels-unique"):
        density_state(np.eye(4) / 4, [("A", 2), ("A", 2)])


def test_pure_vector_norm():
    """Pure vectors must have unit norm unless normalization is requested."""
    with pytest.raises(ValidationError, match="unit-norm"):
        pure_state([1, 1], [("A", 2)])
    state = pure_state([1, 1], [("A", 2)], normalize=True)
    assert np.allclose(state.density_matrix, np.full((2, 2), 0.5))


def test_operator_kind_allows_negative_eigenvalues():
    """Operator-kind states skip the positivity check."""
    state = MultipartiteState(dims=[{"label": "A", "dim": 2}], kind="operator", matrix=[[1.5, 0], [0, -0.5]])
    assert state.spectrum() == pytest.approx([-0.5, 1.5])


def test_json_round_trip_preserves_state():
    """The [re, im] encoding restores the matrix exactly."""
    state = random_density([("A", 2), ("B", 3)], seed=4)
    loaded = MultipartiteState.model_validate_json(state.model_dump_json())
    assert loaded.dims == state.dims
    assert np.array_equal(loaded.matrix, state.matrix)


def test_labels_shape_and_lookup():
    """Properties follow tensor order; unknown labels raise."""
    state = maximally_mixed([("X", 2), ("A", 3)])
    assert state.labels == ("X", "A")
    assert state.shape == (2, 3)
    assert state.total_dim == 6
    assert state.dim_of(["X", "A"]) == 6
    with pytest.raises(LabelError):
        state.subsystem("B")


def test_partial_trace_of_bell_state_is_maximally_mixed():
    """Each half of a Bell state is maximally mixed."""
    reduced = partial_trace(bell_state("psi-"), "B")
    assert reduced.labels == ("A",)
    assert np.allclose(reduced.matrix, np.eye(2) / 2)


def test_partial_trace_keeps_original_order():
    """Kept subsystems stay in tensor order whatever order they are requested in."""
    state = tensor_product(ket([0], [("A", 2)]), ket([1], [("B", 3)]), ket([1], [("C", 2)]))
    reduced = partial_trace(state, ["C", "A"])
    assert reduced.labels == ("A", "C")
    expected = np.zeros((4, 4))
    expected[1, 1] = 1
    assert np.allclose(reduced.matrix, expected)


def test_partial_trace_must_keep_something():
    """Tracing out everything is an error."""
    with pytest.raises(LabelError):
        partial_trace(bell_state("phi+"), [])


def test_tensor_product_label_collision():
    """Factors must carry disjoint labels."""
    with pytest.raises(LabelError):
        tensor_product(bell_state("phi+"), bell_state("phi-"))


def test_tensor_product_kinds():
    """Pure factors stay pure; a mixed factor makes the product a density."""
    pure = tensor_product(ket([0], [("A", 2)]), ket([1], [("B", 2)]))
    assert pure.kind == "pure-vector"
    mixed = tensor_product(ket([0], [("A", 2)]), maximally_mixed([("B", 2)]))
    assert mixed.kind == "density"
    assert mixed.labels == ("A", "B")


def test_partial_transpose_is_involution():
    """Flipping the same subsystem twice restores the state."""
    state = random_density([("A", 2), ("B", 2)], seed=1)
    once = partial_transpose(state, "B")
    assert once.kind == "operator"
    assert np.allclose(partial_transpose(once, "B").matrix, state.matrix)


def test_partial_transpose_of_phi_plus_has_negative_eigenvalue():
    """The partial transpose of a maximally entangled qubit pair is the swap over two."""
    spectrum = partial_transpose(maximally_entangled(2), "B").spectrum()
    assert spectrum == pytest.approx([-0.5, 0.5, 0.5, 0.5])


def test_purify_reproduces_state():
    """Tracing the purifier gives back the input."""
    state = random_density([("A", 2), ("B", 2)], rank=3, seed=9)
    psi = purify(state)
    assert psi.labels == ("A", "B", "R")
    assert psi.subsystem("R").dim == 3
    assert np.allclose(partial_trace(psi, ["A", "B"]).matrix, state.matrix)


def test_purify_is_deterministic_with_ties():
    """Degenerate spectra still give one canonical purification."""
    state = maximally_mixed([("A", 2), ("B", 2)])
    assert np.array_equal(purify(state).matrix, purify(state).matrix)


def test_purify_label_collision():
    """The purifier label must be new."""
    with pytest.raises(LabelError):
        purify(maximally_mixed([("R", 2)]))


def test_isometry_checks():
    """Non-isometric matrices and shrinking maps are rejected."""
    with pytest.raises(ValidationError):
        Isometry(in_dims=[{"label": "A", "dim": 2}], out_dims=[{"label": "B", "dim": 2}], matrix=[[1, 1], [0, 1]])
    with pytest.raises(ValidationError):
        Isometry(in_dims=[{"label": "A", "dim": 2}], out_dims=[{"label": "B", "dim": 1}], matrix=[[1, 0]])


def test_swap_isometry_exchanges_subsystems():
    """Applying the swap moves the excitation and the label."""
    state = tensor_product(ket([1], [("A", 2)]), ket([0], [("B", 3)]))
    swapped = apply_isometry(state, Isometry.swap(state.subsystem("A"), state.subsystem("B")))
    assert swapped.labels == ("B", "A")
    assert np.allclose(swapped.density_matrix, ket([0, 1], [("B", 3), ("A", 2)]).density_matrix)


def test_apply_isometry_needs_contiguous_run():
    """Isometry inputs must be adjacent subsystems of the state."""
    state = tensor_product(ket([0], [("A", 2)]), ket([0], [("B", 2)]), ket([0], [("C", 2)]))
    with pytest.raises(DimensionError):
        apply_isometry(state, Isometry.identity([("A", 2), ("C", 2)]))


def test_apply_unitary_on_density():
    """A bit flip maps |0><0| to |1><1|."""
    flipped = apply_unitary(maximally_mixed([("A", 2)]), np.array([[0, 1], [1, 0]]), "A")
    assert np.allclose(flipped.matrix, np.eye(2) / 2)
    excited = apply_unitary(ket([0], [("A", 2)]), np.array([[0, 1], [1, 0]]), "A")
    assert np.allclose(excited.density_matrix, np.diag([0, 1]))


def test_permute_and_group():
    """Permutation reorders labels; grouping merges them into parties."""
    state = ghz_state(["A", "B", "C"])
    assert permute(state, ["C", "A", "B"]).labels == ("C", "A", "B")
    grouped = group_subsystems(state, {"AC": ["A", "C"], "B": ["B"]})
    assert grouped.labels == ("AC", "B")
    assert grouped.shape == (4, 2)
    with pytest.raises(LabelError):
        permute(state, ["A", "B"])


def test_relabel_and_fresh_label():
    """Renaming keeps the matrix; fresh labels avoid existing ones."""
    state = relabel(maximally_entangled(2), {"B": "A'"})
    assert state.labels == ("A", "A'")
    assert fresh_label(state, "A") == "A''"
    assert fresh_label(state, "R") == "R"
    with pytest.raises(LabelError):
        relabel(state, {"A'": "A"})


def test_mixture_and_dephase():
    """Mixing Bell states and dephasing both give classical correlations."""
    mixed = mixture([0.5, 0.5], [bell_state("phi+"), bell_state("phi-")])
    assert np.allclose(mixed.matrix, dephase(bell_state("phi+"), ["A"]).matrix)
    assert np.allclose(np.diag(mixed.matrix).real, [0.5, 0, 0, 0.5])


def test_mixture_dimension_mismatch():
    """Components must share their subsystems."""
    with pytest.raises(DimensionError):
        mixture([0.5, 0.5], [maximally_mixed([("A", 2)]), maximally_mixed([("A", 3)])])


def test_trace_norm_and_distance():
    """Orthogonal pure states are at distance one."""
    assert trace_norm(np.diag([0.5, -0.5])) == pytest.approx(1.0)
    assert trace_distance(bell_state("phi+"), bell_state("psi+")) == pytest.approx(1.0)
    with pytest.raises(DimensionError):
        trace_distance(maximally_mixed([("A", 2)]), maximally_mixed([("A", 3)]))


def test_pad_subsystem_embeds_without_weight():
    """Padding keeps the populated block and adds zeros."""
    padded = pad_subsystem(maximally_entangled(2), "B", 3)
    assert padded.shape == (2, 3)
    assert np.allclose(partial_trace(padded, "A").matrix, np.eye(2) / 2)
    with pytest.raises(DimensionError):
        pad_subsystem(maximally_entangled(3), "B", 2)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), da=st.integers(1, 3), db=st.integers(1, 3))
def test_random_pure_reductions_share_spectrum(seed, da, db):
    """Both halves of a pure state have the same nonzero spectrum."""
    psi = random_pure([("A", da), ("B", db)], seed)
    spec_a = np.sort(partial_trace(psi, "A").spectrum())[::-1][: min(da, db)]
    spec_b = np.sort(partial_trace(psi, "B").spectrum())[::-1][: min(da, db)]
    assert np.allclose(spec_a, spec_b, atol=1e-10)
