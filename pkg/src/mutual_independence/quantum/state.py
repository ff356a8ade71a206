"""Labeled multipartite states and isometries, with the tensor arithmetic acting on them."""
from collections.abc import Iterable, Mapping, Sequence
from functools import reduce
from math import prod
from typing import Any, Literal

import numpy as np
from numpy.typing import NDArray
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationInfo,
    field_serializer,
    field_validator,
    model_validator,
)

from mutual_independence.common.encoding import decode_complex, encode_complex
from mutual_independence.common.errors import DimensionError, InvariantViolation, LabelError
from mutual_independence.common.settings import get_settings


Kind = Literal["density", "pure-vector", "operator"]
Labels = str | Iterable[str]


def as_labels(labels: Labels) -> tuple[str, ...]:
    """Normalize a single label or an iterable of labels to a tuple."""
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


class Subsystem(BaseModel):
    """One tensor factor: a label and its Hilbert-space dimension."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1, description="Unique name of the subsystem")
    dim: int = Field(..., ge=1, description="Hilbert-space dimension")


def subsystems(dims: Sequence[Subsystem | tuple[str, int] | Mapping[str, Any]]) -> tuple[Subsystem, ...]:
    """
    Build subsystems from ``(label, dim)`` pairs, mappings or ready instances.

    :param Sequence dims: Subsystem descriptions in tensor order

    :return: Subsystems in the same order
    :rtype: tuple[Subsystem, ...]
    """
    out: list[Subsystem] = []
    for item in dims:
        if isinstance(item, Subsystem):
            out.append(item)
        elif isinstance(item, Mapping):
            out.append(Subsystem.model_validate(item))
        else:
            label, dim = item
            out.append(Subsystem(label=label, dim=dim))
    return tuple(out)


def _hermiticity_gap(m: NDArray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def _freeze(array: NDArray) -> NDArray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


class MultipartiteState(BaseModel):
    """
    A state (or unit-trace Hermitian operator) on an ordered list of labeled subsystems.

    Index linearization is row-major over ``dims``: the first subsystem is the most significant
    digit. ``kind`` is ``density`` for density matrices, ``pure-vector`` for state vectors and
    ``operator`` for unit-trace Hermitian operators that need not be positive (partial transposes).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: tuple[Subsystem, ...] = Field(..., min_length=1, description="Ordered labeled subsystems")
    kind: Kind = Field(default="density", description="Representation of the matrix field")
    matrix: np.ndarray = Field(..., description="Square matrix, or vector for pure-vector states")

    @field_validator("matrix", mode="before")
    @classmethod
    def _decode_matrix(cls, value: Any, info: ValidationInfo) -> NDArray:
        """Decode ``[re, im]`` pairs into an array shaped by ``dims`` and ``kind``."""
        if "dims" not in info.data:
            raise ValueError("dims: cannot shape the matrix without valid dims")
        total = prod(s.dim for s in info.data["dims"])
        kind = info.data.get("kind", "density")
        shape = (total,) if kind == "pure-vector" else (total, total)
        if isinstance(value, np.ndarray) and value.shape != shape:
            raise InvariantViolation(
                "dims-product", f"matrix shape {value.shape} does not match product of dims {shape}"
            )
        try:
            decoded = decode_complex(value, shape)
        except InvariantViolation as exc:
            raise InvariantViolation("dims-product", exc.detail) from exc
        return _freeze(decoded)

    @field_serializer("matrix")
    def _encode_matrix(self, matrix: NDArray) -> list[list[float]]:
        return encode_complex(matrix)

    @model_validator(mode="after")
    def _check_invariants(self) -> "MultipartiteState":
        """Check label uniqueness, Hermiticity, positivity and normalization."""
        labels = [s.label for s in self.dims]
        if len(set(labels)) != len(labels):
            raise LabelError(f"labels-unique: duplicated labels in {labels}")
        settings = get_settings()
        m = self.matrix
        if self.kind == "pure-vector":
            norm = float(np.vdot(m, m).real)
            if abs(norm - 1.0) > settings.trace_tol:
                raise InvariantViolation("unit-norm", f"squared norm is {norm!r}, expected 1")
            return self
        gap = _hermiticity_gap(m)
        if gap > settings.herm_tol:
            raise InvariantViolation("hermitian", f"max |M - M^dagger| entry is {gap:.3e} > {settings.herm_tol:g}")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > settings.trace_tol:
            raise InvariantViolation("unit-trace", f"trace is {trace.real!r}, expected 1")
        if self.kind == "density":
            smallest = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
            if smallest < -settings.psd_tol:
                raise InvariantViolation("psd", f"smallest eigenvalue is {smallest:.3e}")
        return self

    @classmethod
    def trusted(cls, matrix: NDArray, dims: Sequence[Subsystem], kind: Kind = "density") -> "MultipartiteState":
        """
        Wrap a matrix produced by an operation that preserves every invariant, skipping validation.

        :param NDArray matrix: Matrix or vector
        :param Sequence dims: Subsystems
        :param str kind: Representation

        :return: Unvalidated state
        :rtype: MultipartiteState
        """
        return cls.model_construct(dims=tuple(dims), kind=kind, matrix=_freeze(matrix))

    @property
    def labels(self) -> tuple[str, ...]:
        """Subsystem labels in tensor order."""
        return tuple(s.label for s in self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        """Subsystem dimensions in tensor order."""
        return tuple(s.dim for s in self.dims)

    @property
    def total_dim(self) -> int:
        """Product of all subsystem dimensions."""
        return prod(self.shape)

    @property
    def density_matrix(self) -> NDArray[np.complex128]:
        """Density matrix; the outer product for pure-vector states."""
        if self.kind == "pure-vector":
            return np.outer(self.matrix, self.matrix.conj())
        return self.matrix

    def dim_of(self, labels: Labels) -> int:
        """Joint dimension of ``labels``."""
        return prod(self.subsystem(label).dim for label in as_labels(labels))

    def subsystem(self, label: str) -> Subsystem:
        """Return the subsystem called ``label``."""
        for s in self.dims:
            if s.label == label:
                return s
        raise LabelError(f"unknown label {label!r}, state has {list(self.labels)}")

    def require(self, labels: Labels) -> tuple[str, ...]:
        """Return ``labels`` as a tuple after checking each exists."""
        labels = as_labels(labels)
        for label in labels:
            self.subsystem(label)
        return labels

    def as_density(self) -> "MultipartiteState":
        """Return the density-kind version of this state, validating positivity for operators."""
        if self.kind == "density":
            return self
        if self.kind == "pure-vector":
            return MultipartiteState.trusted(self.density_matrix, self.dims)
        return MultipartiteState(dims=self.dims, kind="density", matrix=self.matrix)

    def spectrum(self) -> NDArray[np.float64]:
        """Eigenvalues of the Hermitian part, ascending."""
        m = self.density_matrix
        return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


class Isometry(BaseModel):
    """A linear isometry between labeled spaces: ``V^dagger V = 1`` on the input space."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    in_dims: tuple[Subsystem, ...] = Field(..., min_length=1, description="Input subsystems")
    out_dims: tuple[Subsystem, ...] = Field(..., min_length=1, description="Output subsystems")
    matrix: np.ndarray = Field(..., description="Matrix of shape (output dim, input dim)")

    @field_validator("matrix", mode="before")
    @classmethod
    def _decode_matrix(cls, value: Any, info: ValidationInfo) -> NDArray:
        if "in_dims" not in info.data or "out_dims" not in info.data:
            raise ValueError("dims: cannot shape the matrix without valid in_dims and out_dims")
        shape = (prod(s.dim for s in info.data["out_dims"]), prod(s.dim for s in info.data["in_dims"]))
        if isinstance(value, np.ndarray) and value.shape != shape:
            raise InvariantViolation("dims-product", f"matrix shape {value.shape} does not match {shape}")
        return _freeze(decode_complex(value, shape))

    @field_serializer("matrix")
    def _encode_matrix(self, matrix: NDArray) -> list[list[float]]:
        return encode_complex(matrix)

    @model_validator(mode="after")
    def _check_isometry(self) -> "Isometry":
        dout, din = self.matrix.shape
        if dout < din:
            raise DimensionError(f"output dimension {dout} is smaller than input dimension {din}")
        for group in (self.in_dims, self.out_dims):
            labels = [s.label for s in group]
            if len(set(labels)) != len(labels):
                raise LabelError(f"labels-unique: duplicated labels in {labels}")
        gap = float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(din))))
        if gap > get_settings().herm_tol:
            raise InvariantViolation("isometry", f"max |V^dagger V - 1| entry is {gap:.3e}")
        return self

    @property
    def in_labels(self) -> tuple[str, ...]:
        """Input labels in tensor order."""
        return tuple(s.label for s in self.in_dims)

    @property
    def out_labels(self) -> tuple[str, ...]:
        """Output labels in tensor order."""
        return tuple(s.label for s in self.out_dims)

    @classmethod
    def identity(cls, dims: Sequence[Subsystem | tuple[str, int]]) -> "Isometry":
        """Identity map on ``dims``."""
        dims = subsystems(dims)
        return cls(in_dims=dims, out_dims=dims, matrix=np.eye(prod(s.dim for s in dims)))

    @classmethod
    def swap(cls, first: Subsystem, second: Subsystem) -> "Isometry":
        """Unitary exchanging two subsystems: ``|i>|j> -> |j>|i>``."""
        d1, d2 = first.dim, second.dim
        matrix = np.zeros((d1 * d2, d1 * d2))
        for i in range(d1):
            for j in range(d2):
                matrix[j * d1 + i, i * d2 + j] = 1.0
        return cls(in_dims=(first, second), out_dims=(second, first), matrix=matrix)


# ---------------------------------------------------------------------------------------------
# constructors


def density_state(matrix: Any, dims: Sequence[Subsystem | tuple[str, int]]) -> MultipartiteState:
    """Validated density-kind state."""
    return MultipartiteState(dims=subsystems(dims), kind="density", matrix=np.asarray(matrix, dtype=complex))


def pure_state(vector: Any, dims: Sequence[Subsystem | tuple[str, int]], normalize: bool = False) -> MultipartiteState:
    """
    Validated pure-vector state.

    :param vector: Amplitudes, row-major over ``dims``
    :param Sequence dims: Subsystems
    :param bool normalize: Rescale the vector to unit norm first

    :return: Pure state
    :rtype: MultipartiteState
    """
    vector = np.asarray(vector, dtype=complex).reshape(-1)
    if normalize:
        vector = vector / np.linalg.norm(vector)
    return MultipartiteState(dims=subsystems(dims), kind="pure-vector", matrix=vector)


def ket(indices: Sequence[int], dims: Sequence[Subsystem | tuple[str, int]]) -> MultipartiteState:
    """Computational basis state ``|i_1 ... i_n>``."""
    dims = subsystems(dims)
    vector = np.zeros(prod(s.dim for s in dims), dtype=complex)
    vector[np.ravel_multi_index(tuple(indices), tuple(s.dim for s in dims))] = 1.0
    return MultipartiteState.trusted(vector, dims, "pure-vector")


def maximally_mixed(dims: Sequence[Subsystem | tuple[str, int]]) -> MultipartiteState:
    """The normalized identity on ``dims``."""
    dims = subsystems(dims)
    d = prod(s.dim for s in dims)
    return MultipartiteState.trusted(np.eye(d) / d, dims)


def maximally_entangled(d: int, labels: tuple[str, str] = ("A", "B")) -> MultipartiteState:
    """Pure state ``sum_i |ii> / sqrt(d)``."""
    vector = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return MultipartiteState.trusted(vector, subsystems([(labels[0], d), (labels[1], d)]), "pure-vector")


def ghz_state(labels: Sequence[str], d: int = 2) -> MultipartiteState:
    """Pure state ``sum_i |i...i> / sqrt(d)`` on the given labels."""
    dims = subsystems([(label, d) for label in labels])
    vector = np.zeros(d ** len(labels), dtype=complex)
    for i in range(d):
        vector[np.ravel_multi_index((i,) * len(labels), (d,) * len(labels))] = 1.0 / np.sqrt(d)
    return MultipartiteState.trusted(vector, dims, "pure-vector")


BELL_VECTORS = {
    "phi+": np.array([1, 0, 0, 1]) / np.sqrt(2),
    "phi-": np.array([1, 0, 0, -1]) / np.sqrt(2),
    "psi+": np.array([0, 1, 1, 0]) / np.sqrt(2),
    "psi-": np.array([0, 1, -1, 0]) / np.sqrt(2),
}


def bell_state(name: str, labels: tuple[str, str] = ("A", "B")) -> MultipartiteState:
    """One of the four two-qubit Bell states, named ``phi+``, ``phi-``, ``psi+`` or ``psi-``."""
    try:
        vector = BELL_VECTORS[name]
    except KeyError as exc:
        raise ValueError(f"unknown Bell state {name!r}, expected one of {sorted(BELL_VECTORS)}") from exc
    return MultipartiteState.trusted(vector.astype(complex), subsystems([(labels[0], 2), (labels[1], 2)]), "pure-vector")


def mixture(weights: Sequence[float], states: Sequence[MultipartiteState]) -> MultipartiteState:
    """Convex combination of states sharing the same subsystems."""
    dims = states[0].dims
    for s in states[1:]:
        if s.dims != dims:
            raise DimensionError("mixture components must share their subsystems")
    matrix = sum(w * s.density_matrix for w, s in zip(weights, states, strict=True))
    return density_state(matrix, dims)


# ---------------------------------------------------------------------------------------------
# operations


def tensor_product(*states: MultipartiteState) -> MultipartiteState:
    """
    Kronecker product of states on disjoint labels, dims concatenated in argument order.

    Two pure vectors give a pure vector, anything else a density-kind (or operator-kind) state.

    :param MultipartiteState states: Factors

    :return: Product state
    :rtype: MultipartiteState
    :raises LabelError: If two factors share a label
    """

    def _pair(a: MultipartiteState, b: MultipartiteState) -> MultipartiteState:
        collision = set(a.labels) & set(b.labels)
        if collision:
            raise LabelError(f"label collision in tensor product: {sorted(collision)}")
        dims = a.dims + b.dims
        if a.kind == b.kind == "pure-vector":
            return MultipartiteState.trusted(np.kron(a.matrix, b.matrix), dims, "pure-vector")
        kind: Kind = "operator" if "operator" in (a.kind, b.kind) else "density"
        return MultipartiteState.trusted(np.kron(a.density_matrix, b.density_matrix), dims, kind)

    return reduce(_pair, states)


def _positions(state: MultipartiteState, labels: Iterable[str]) -> list[int]:
    wanted = set(state.require(labels))
    return [i for i, label in enumerate(state.labels) if label in wanted]


def partial_trace(state: MultipartiteState, keep: Labels) -> MultipartiteState:
    """
    Trace out every subsystem not in ``keep``; kept subsystems stay in their original order.

    :param MultipartiteState state: Input state of any kind
    :param keep: Labels to keep

    :return: Reduced state (density kind unless the input is an operator)
    :rtype: MultipartiteState
    :raises LabelError: If a label is unknown
    """
    keep_idx = _positions(state, as_labels(keep))
    trace_idx = [i for i in range(len(state.dims)) if i not in keep_idx]
    dims = state.shape
    dk = prod(dims[i] for i in keep_idx)
    dt = prod(dims[i] for i in trace_idx)
    kept = tuple(state.dims[i] for i in keep_idx)
    if not keep_idx:
        raise LabelError("partial trace must keep at least one subsystem")
    if state.kind == "pure-vector":
        psi = state.matrix.reshape(dims).transpose(keep_idx + trace_idx).reshape(dk, dt)
        return MultipartiteState.trusted(psi @ psi.conj().T, kept)
    n = len(dims)
    tensor = state.matrix.reshape(dims + dims)
    perm = keep_idx + trace_idx + [n + i for i in keep_idx] + [n + i for i in trace_idx]
    reduced = np.einsum("ijkj->ik", tensor.transpose(perm).reshape(dk, dt, dk, dt))
    return MultipartiteState.trusted(reduced, kept, state.kind)


def partial_transpose_matrix(m: NDArray, shape: Sequence[int], positions: Iterable[int]) -> NDArray:
    """Transpose the tensor factors at ``positions`` of a matrix on ``shape``."""
    shape = tuple(shape)
    n = len(shape)
    axes = list(range(2 * n))
    for i in positions:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return m.reshape(shape + shape).transpose(axes).reshape(m.shape)


def partial_transpose(state: MultipartiteState, flip: Labels) -> MultipartiteState:
    """
    Transpose the subsystems in ``flip``; the result is an operator-kind state.

    Applying the same flip twice restores the input matrix.

    :param MultipartiteState state: Density or operator state
    :param flip: Labels to transpose

    :return: Partially transposed operator
    :rtype: MultipartiteState
    """
    flipped = partial_transpose_matrix(state.density_matrix, state.shape, _positions(state, as_labels(flip)))
    return MultipartiteState.trusted(flipped, state.dims, "operator")


def fresh_label(state: MultipartiteState, base: str) -> str:
    """Return ``base``, primed as often as needed to avoid the labels of ``state``."""
    label = base
    while label in state.labels:
        label += "'"
    return label


def hermitian_eigh(m: NDArray) -> tuple[NDArray[np.float64], NDArray[np.complex128]]:
    """Eigendecomposition of the Hermitian part ``(M + M^dagger) / 2``, ascending."""
    return np.linalg.eigh(0.5 * (m + m.conj().T))


def _canonical_eigenbasis(values: NDArray, vectors: NDArray, tie_tol: float) -> tuple[NDArray, NDArray]:
    """Sort eigenpairs by descending eigenvalue, ties by the lexicographic order of phase-fixed vectors."""
    columns = []
    for k in range(vectors.shape[1]):
        v = vectors[:, k]
        pivot = int(np.argmax(np.abs(v) > 1e-12))
        v = v * (abs(v[pivot]) / v[pivot])
        columns.append(v)
    order = sorted(range(len(values)), key=lambda k: -values[k])
    result: list[int] = []
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and values[order[start]] - values[order[stop]] <= tie_tol:
            stop += 1
        group = order[start:stop]
        group.sort(key=lambda k: tuple(x for z in columns[k] for x in (round(z.real, 12), round(z.imag, 12))))
        result.extend(group)
        start = stop
    return values[result], np.stack([columns[k] for k in result], axis=1)


def purify(state: MultipartiteState, purifier_label: str = "R") -> MultipartiteState:
    """
    Canonical purification ``sum_i sqrt(lambda_i) |v_i>|i>`` on the original subsystems plus a purifier.

    The purifier dimension is the numerical rank at the rank cutoff; eigenpairs are sorted by
    descending eigenvalue with ties broken by the lexicographic order of the phase-fixed eigenvectors.

    :param MultipartiteState state: Density state
    :param str purifier_label: Label of the new subsystem

    :return: Pure-vector state on ``state.dims + (purifier,)``
    :rtype: MultipartiteState
    :raises LabelError: If the purifier label is already used
    :raises InvariantViolation: If the input is not positive semidefinite
    """
    if purifier_label in state.labels:
        raise LabelError(f"purifier label {purifier_label!r} already used")
    settings = get_settings()
    values, vectors = hermitian_eigh(state.density_matrix)
    if values[0] < -settings.psd_tol:
        raise InvariantViolation("psd", f"cannot purify, smallest eigenvalue is {values[0]:.3e}")
    support = values > settings.rank_cutoff
    values, vectors = _canonical_eigenbasis(values[support], vectors[:, support], settings.rank_cutoff)
    psi = (vectors * np.sqrt(values)).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    dims = state.dims + (Subsystem(label=purifier_label, dim=len(values)),)
    return MultipartiteState.trusted(psi, dims, "pure-vector")


def apply_isometry(state: MultipartiteState, isometry: Isometry) -> MultipartiteState:
    """
    Apply ``1_L (x) V (x) 1_R`` where ``V`` acts on a contiguous run of labels.

    :param MultipartiteState state: Input state of any kind
    :param Isometry isometry: Map whose input labels and dims match a contiguous run of ``state``

    :return: Transformed state with the input run replaced by the output subsystems
    :rtype: MultipartiteState
    :raises DimensionError: If the input run is not found or its dims differ
    """
    labels = state.labels
    run = isometry.in_labels
    try:
        start = labels.index(run[0])
    except ValueError as exc:
        raise LabelError(f"isometry input {run[0]!r} not in state labels {list(labels)}") from exc
    if labels[start : start + len(run)] != run:
        raise DimensionError(f"isometry inputs {list(run)} are not a contiguous run of {list(labels)}")
    if state.dims[start : start + len(run)] != isometry.in_dims:
        raise DimensionError("isometry input dims do not match the state's subsystems")
    left, right = state.dims[:start], state.dims[start + len(run) :]
    collision = {s.label for s in left + right} & set(isometry.out_labels)
    if collision:
        raise LabelError(f"isometry output labels collide with {sorted(collision)}")
    dl, dr = prod(s.dim for s in left), prod(s.dim for s in right)
    v = isometry.matrix
    dout, din = v.shape
    dims = left + isometry.out_dims + right
    if state.kind == "pure-vector":
        psi = np.einsum("oi,lir->lor", v, state.matrix.reshape(dl, din, dr))
        return MultipartiteState.trusted(psi.reshape(-1), dims, "pure-vector")
    t = state.matrix.reshape(dl, din, dr, dl, din, dr)
    out = np.einsum("oi,lirmjs,pj->lormps", v, t, v.conj())
    return MultipartiteState.trusted(out.reshape(dl * dout * dr, dl * dout * dr), dims, state.kind)


def apply_unitary(state: MultipartiteState, unitary: NDArray, labels: Labels) -> MultipartiteState:
    """Apply a square matrix acting on the contiguous run ``labels``, keeping labels unchanged."""
    run = tuple(state.subsystem(label) for label in as_labels(labels))
    return apply_isometry(state, Isometry(in_dims=run, out_dims=run, matrix=unitary))


def permute(state: MultipartiteState, order: Sequence[str]) -> MultipartiteState:
    """Reorder subsystems so that labels appear as in ``order`` (a permutation of the labels)."""
    order = tuple(order)
    if sorted(order) != sorted(state.labels):
        raise LabelError(f"{list(order)} is not a permutation of {list(state.labels)}")
    perm = [state.labels.index(label) for label in order]
    dims = tuple(state.dims[i] for i in perm)
    shape = state.shape
    if state.kind == "pure-vector":
        return MultipartiteState.trusted(state.matrix.reshape(shape).transpose(perm).reshape(-1), dims, state.kind)
    n = len(shape)
    axes = perm + [n + i for i in perm]
    matrix = state.matrix.reshape(shape + shape).transpose(axes).reshape(state.matrix.shape)
    return MultipartiteState.trusted(matrix, dims, state.kind)


def group_subsystems(state: MultipartiteState, groups: Mapping[str, Sequence[str]]) -> MultipartiteState:
    """
    Merge subsystems into parties, e.g. ``{"XA": ["X", "A"], "B": ["B"]}``.

    Groups must partition the labels; the result has one subsystem per group, in mapping order.
    """
    order = [label for members in groups.values() for label in members]
    state = permute(state, order)
    dims = tuple(Subsystem(label=name, dim=state.dim_of(members)) for name, members in groups.items())
    return MultipartiteState.trusted(state.matrix, dims, state.kind)


def relabel(state: MultipartiteState, mapping: Mapping[str, str]) -> MultipartiteState:
    """Rename subsystems; labels absent from ``mapping`` are unchanged."""
    state.require(mapping.keys())
    dims = tuple(Subsystem(label=mapping.get(s.label, s.label), dim=s.dim) for s in state.dims)
    labels = [s.label for s in dims]
    if len(set(labels)) != len(labels):
        raise LabelError(f"relabeling produces duplicated labels {labels}")
    return MultipartiteState.trusted(state.matrix, dims, state.kind)


def dephase(state: MultipartiteState, labels: Labels) -> MultipartiteState:
    """Measure ``labels`` in the computational basis, keeping the outcome classical."""
    m = state.density_matrix
    shape = state.shape
    mask = np.ones(shape + shape, dtype=bool)
    n = len(shape)
    for i in _positions(state, as_labels(labels)):
        eye_shape = [1] * (2 * n)
        eye_shape[i] = shape[i]
        eye_shape[n + i] = shape[i]
        mask &= np.eye(shape[i], dtype=bool).reshape(eye_shape)
    return MultipartiteState.trusted(np.where(mask.reshape(m.shape), m, 0.0), state.dims)


def _as_matrix(value: MultipartiteState | NDArray) -> NDArray:
    return value.density_matrix if isinstance(value, MultipartiteState) else np.asarray(value)


def trace_norm(value: MultipartiteState | NDArray) -> float:
    """
    Sum of singular values ``||M||_1 = Tr|M|``.

    :param value: Square matrix or state

    :return: Trace norm
    :rtype: float
    """
    m = _as_matrix(value)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"trace norm needs a square matrix, got shape {m.shape}")
    return float(np.linalg.svd(m, compute_uv=False).sum())


def trace_distance(a: MultipartiteState | NDArray, b: MultipartiteState | NDArray) -> float:
    """Half the trace norm of the difference; both states must share their subsystems."""
    if isinstance(a, MultipartiteState) and isinstance(b, MultipartiteState) and a.dims != b.dims:
        raise DimensionError(f"trace distance between {a.dims} and {b.dims}")
    return 0.5 * trace_norm(_as_matrix(a) - _as_matrix(b))


def pad_subsystem(state: MultipartiteState, label: str, dim: int) -> MultipartiteState:
    """
    Embed subsystem ``label`` into a space of dimension ``dim``; the new basis states carry no weight.

    :param MultipartiteState state: State of any kind
    :param str label: Subsystem to enlarge
    :param int dim: New dimension, at least the current one

    :return: Embedded state
    :rtype: MultipartiteState
    """
    i = state.labels.index(state.subsystem(label).label)
    shape = state.shape
    if dim < shape[i]:
        raise DimensionError(f"cannot shrink {label!r} from {shape[i]} to {dim}")
    dims = tuple(Subsystem(label=s.label, dim=dim) if k == i else s for k, s in enumerate(state.dims))
    new_shape = tuple(s.dim for s in dims)
    n = len(shape)
    if state.kind == "pure-vector":
        widths = [(0, 0)] * n
        widths[i] = (0, dim - shape[i])
        return MultipartiteState.trusted(np.pad(state.matrix.reshape(shape), widths).reshape(-1), dims, state.kind)
    widths = [(0, 0)] * (2 * n)
    widths[i] = widths[n + i] = (0, dim - shape[i])
    total = prod(new_shape)
    padded = np.pad(state.matrix.reshape(shape + shape), widths).reshape(total, total)
    return MultipartiteState.trusted(padded, dims, state.kind)
