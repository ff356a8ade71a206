"""
Redundant decomposition of a classical source ``XY`` relative to a reference ``Z``.

Support points of ``XY`` are grouped into classes with proportional likelihood vectors
``z -> P(xy, z)``: within a class ``P(xy | z)`` factors as a ``z``-dependent class weight times a
``z``-independent position weight. Classes of the same co-support component and the same position
weights form a block ``l`` whose classes are indexed by ``j`` and positions by ``k``, so that
``P(xy | z) = q(l | z) P(j | z, l) P(k | l)``. ``K`` is redundant and ``H(LJ)`` is the optimal rate.
"""
import csv
import io

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import entropy as shannon

from mutual_independence.classical.distribution import JointDistribution, slepian_wolf_sum
from mutual_independence.common.errors import DecompositionError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.quantum.state import Labels, as_labels


class TableEntry(BaseModel):
    """One row of the identification ``tau: xy -> (l, j, k)``."""

    model_config = ConfigDict(frozen=True)

    xy: tuple[int, ...] = Field(..., description="Symbols of the source variables")
    block: int = Field(..., ge=0)
    j: int = Field(..., ge=0)
    k: int = Field(..., ge=0)


class Block(BaseModel):
    """Factors of one block ``l``."""

    model_config = ConfigDict(frozen=True)

    component: int = Field(..., ge=0, description="Co-support component of the block")
    p_k: list[float] = Field(..., description="z-independent position weights P(k | l)")
    q_given_z: list[float] = Field(..., description="q(l | z) for every z")
    p_j_given_z: list[list[float]] = Field(..., description="P(j | z, l), indexed [j][z]")


class RedundantDecomposition(BaseModel):
    """Identification table, block factors, reconstruction error and ``H(LJ)``."""

    model_config = ConfigDict(frozen=True)

    source: tuple[str, ...]
    reference: tuple[str, ...]
    table: list[TableEntry]
    blocks: list[Block]
    reconstruction_error: float = Field(..., ge=0.0)
    h_lj: float = Field(..., ge=0.0, description="Entropy of the non-redundant part LJ")

    @model_validator(mode="after")
    def _bijection(self) -> "RedundantDecomposition":
        """``tau`` is one-to-one on the support."""
        images = [(e.block, e.j, e.k) for e in self.table]
        if len(set(images)) != len(images) or len({e.xy for e in self.table}) != len(self.table):
            raise ValueError("bijection: the identification table is not one-to-one")
        return self

    def class_of(self, entry: TableEntry) -> tuple[int, int]:
        """Non-redundant label ``(l, j)`` of a table entry."""
        return entry.block, entry.j

    def to_csv(self) -> str:
        """Identification table as CSV: source symbols, ``block, j, k`` and ``P(k | l)``."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(list(self.source) + ["block", "j", "k", "p_k"])
        for e in self.table:
            writer.writerow(list(e.xy) + [e.block, e.j, e.k, repr(self.blocks[e.block].p_k[e.k])])
        return buffer.getvalue()


def _proportional(u: NDArray, v: NDArray, zero: float, tol: float) -> bool:
    """Whether two likelihood vectors have the same support and a constant log-ratio."""
    support = u > zero
    if not np.array_equal(support, v > zero):
        return False
    ratios = np.log(u[support]) - np.log(v[support])
    return float(ratios.max() - ratios.min()) <= tol


def _likelihood_classes(likelihoods: NDArray, points: list[int], zero: float, tol: float) -> list[list[int]]:
    """
    Partition ``points`` by proportional likelihood vectors.

    Points are scanned in lexicographic order; each joins the first class whose representative
    it is proportional to, or opens a new class. Proportionality is an equivalence relation, so
    one scan reaches the fixed point.
    """
    classes: list[list[int]] = []
    for s in points:
        for members in classes:
            if _proportional(likelihoods[s], likelihoods[members[0]], zero, tol):
                members.append(s)
                break
        else:
            classes.append([s])
    return classes


def _components(likelihoods: NDArray, points: list[int], zero: float) -> NDArray:
    """Co-support components: points sharing a ``z`` of positive probability are connected."""
    n_xy, n_z = likelihoods.shape
    support = likelihoods > zero
    adjacency = np.zeros((n_xy + n_z, n_xy + n_z), dtype=bool)
    adjacency[:n_xy, n_xy:] = support
    adjacency[n_xy:, :n_xy] = support.T
    _, labels = connected_components(csr_matrix(adjacency), directed=False)
    return labels[:n_xy]


def ki_decompose(dist: JointDistribution, source: Labels = ("X", "Y"), reference: Labels | None = None) -> RedundantDecomposition:
    """
    Finest redundant decomposition of ``source`` relative to the reference.

    :param JointDistribution dist: Distribution
    :param source: Variables to compress, ``XY`` by default
    :param reference: Reference variables whose correlations with the source are preserved, all others by default

    :return: Decomposition with its reconstruction error
    :rtype: RedundantDecomposition
    :raises DecompositionError: If the factors do not reconstruct ``P(xy | z)`` within tolerance
    """
    settings = get_settings()
    zero = settings.structural_zero
    source = as_labels(source)
    reference = tuple(l for l in dist.labels if l not in source) if reference is None else as_labels(reference)
    source_shape = tuple(dist.alphabets[i].size for i in dist.axes(source))
    likelihoods = dist.matrix(source, reference) if reference else dist.marginal(source).probs.reshape(-1, 1)
    p_z = likelihoods.sum(axis=0)

    points = [s for s in range(likelihoods.shape[0]) if likelihoods[s].sum() > zero]
    classes = _likelihood_classes(likelihoods, points, zero, settings.ratio_tol)
    components = _components(likelihoods, points, zero)

    # classes sharing a component and their sorted position weights form one block
    block_keys: list[tuple[int, NDArray]] = []
    block_classes: list[list[list[int]]] = []
    for members in classes:
        weights = likelihoods[members].sum(axis=1)
        order = sorted(range(len(members)), key=lambda i: (-weights[i], members[i]))
        members = [members[i] for i in order]
        shape = weights[order] / weights.sum()
        component = int(components[members[0]])
        for index, (comp, key_shape) in enumerate(block_keys):
            if comp == component and len(key_shape) == len(shape) and np.allclose(key_shape, shape, rtol=0, atol=settings.decomposition_tol):
                block_classes[index].append(members)
                break
        else:
            block_keys.append((component, shape))
            block_classes.append([members])

    table: list[TableEntry] = []
    blocks: list[Block] = []
    reconstruction = np.zeros_like(likelihoods)
    conditional = np.divide(likelihoods, p_z, out=np.zeros_like(likelihoods), where=p_z > 0)
    class_probs: list[float] = []
    for l, ((component, shape), members_list) in enumerate(zip(block_keys, block_classes, strict=True)):
        class_mass = np.array([conditional[members].sum(axis=0) for members in members_list])
        q = class_mass.sum(axis=0)
        p_j = np.divide(class_mass, q, out=np.zeros_like(class_mass), where=q > 0)
        blocks.append(
            Block(component=component, p_k=shape.tolist(), q_given_z=q.tolist(), p_j_given_z=p_j.tolist())
        )
        for j, members in enumerate(members_list):
            class_probs.append(float(likelihoods[members].sum()))
            for k, s in enumerate(members):
                table.append(TableEntry(xy=tuple(int(i) for i in np.unravel_index(s, source_shape)), block=l, j=j, k=k))
                reconstruction[s] = q * p_j[j] * shape[k]

    error = float(np.max(np.abs(reconstruction - conditional))) if conditional.size else 0.0
    if error > settings.decomposition_tol:
        raise DecompositionError(f"reconstruction error {error:.3e} exceeds {settings.decomposition_tol:g}")
    table.sort(key=lambda e: e.xy)
    probs = np.array(class_probs)
    probs = probs[probs > zero]
    h_lj = float(shannon(probs, base=2)) if probs.size > 1 else 0.0
    logger.debug(f"🧮 Decomposition: {len(classes)} classes in {len(blocks)} blocks, H(LJ) = {h_lj:.9f}")
    return RedundantDecomposition(
        source=source, reference=reference, table=table, blocks=blocks, reconstruction_error=error, h_lj=h_lj
    )


def optimal_rate_hlj(dist: JointDistribution, source: Labels = ("X", "Y"), reference: Labels | None = None) -> float:
    """Optimal rate ``H(LJ)`` of compressing ``source`` while preserving its correlations with ``reference``."""
    return ki_decompose(dist, source, reference).h_lj


def lj_marginal(dist: JointDistribution, decomposition: RedundantDecomposition) -> JointDistribution:
    """
    Distribution of the non-redundant label ``LJ`` (one symbol per class) jointly with the reference.

    :param JointDistribution dist: Distribution the decomposition was computed from
    :param RedundantDecomposition decomposition: Its decomposition

    :return: Distribution on ``LJ`` and the reference variables
    :rtype: JointDistribution
    """
    classes = sorted({decomposition.class_of(e) for e in decomposition.table})
    index = {c: i for i, c in enumerate(classes)}
    reference = decomposition.reference
    source_shape = tuple(dist.alphabets[i].size for i in dist.axes(decomposition.source))
    likelihoods = dist.matrix(decomposition.source, reference) if reference else dist.marginal(decomposition.source).probs.reshape(-1, 1)
    merged = np.zeros((len(classes), likelihoods.shape[1]))
    for e in decomposition.table:
        merged[index[decomposition.class_of(e)]] += likelihoods[np.ravel_multi_index(e.xy, source_shape)]
    reference_shape = tuple(dist.alphabets[i].size for i in dist.axes(reference))
    return JointDistribution.from_array(merged.reshape((len(classes),) + reference_shape), ("LJ",) + reference)


class ClassicalRates(BaseModel):
    """Unassisted and redundancy-aware compression rates of a source."""

    model_config = ConfigDict(frozen=True)

    slepian_wolf_sum: float = Field(..., ge=0.0, description="H(XY)")
    optimal_rate_hlj: float = Field(..., ge=0.0, description="H(LJ)")
    redundancy: float = Field(..., description="H(XY) - H(LJ), the entropy of the redundant part")


def classical_rates(dist: JointDistribution, source: Labels = ("X", "Y"), reference: Labels | None = None) -> ClassicalRates:
    """``H(XY)``, ``H(LJ)`` and their difference."""
    h_xy = slepian_wolf_sum(dist, source)
    h_lj = optimal_rate_hlj(dist, source, reference)
    return ClassicalRates(slepian_wolf_sum=h_xy, optimal_rate_hlj=h_lj, redundancy=h_xy - h_lj)
