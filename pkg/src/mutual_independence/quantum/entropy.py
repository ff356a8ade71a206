"""Entropic functionals in bits: von Neumann and relative entropies, mutual informations, continuity bounds."""
from collections.abc import Sequence
from itertools import combinations
import math

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.stats import entropy as shannon

from mutual_independence.common.errors import DimensionError, PreconditionError
from mutual_independence.common.settings import get_settings
from mutual_independence.quantum.state import Labels, MultipartiteState, as_labels, hermitian_eigh, partial_trace


NEGATIVE_SLACK = 1e-9


class EntropicReport(BaseModel):
    """Named entropic quantities in bits, e.g. ``S(A)``, ``I(A:B)``, ``I(A>B)``, ``J(A:B)``."""

    model_config = ConfigDict(frozen=True)

    values: dict[str, float] = Field(default_factory=dict, description="Functional name to value in bits")

    @field_validator("values")
    @classmethod
    def _nonnegative(cls, values: dict[str, float]) -> dict[str, float]:
        """Entropies and mutual informations of density inputs cannot be negative."""
        for name, value in values.items():
            if name.startswith(("S(", "I(", "J(")) and ">" not in name and value < -NEGATIVE_SLACK:
                raise ValueError(f"nonnegativity: {name} = {value!r}")
        return values

    def to_table(self) -> str:
        """Two-column plain-text table."""
        width = max((len(name) for name in self.values), default=8)
        lines = [f"{'quantity':<{width}}  value"]
        lines += [f"{name:<{width}}  {value:.12g}" for name, value in self.values.items()]
        return "\n".join(lines) + "\n"


def spectrum_entropy(eigenvalues: NDArray) -> float:
    """Shannon entropy in bits of an eigenvalue list, dropping eigenvalues at or below the rank cutoff."""
    support = eigenvalues[eigenvalues > get_settings().rank_cutoff]
    if support.size <= 1:
        return 0.0
    return float(shannon(support, base=2))


def matrix_entropy(m: NDArray) -> float:
    """Von Neumann entropy of a density matrix given as an array."""
    return spectrum_entropy(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))


def _check_density(state: MultipartiteState) -> None:
    if state.kind == "operator":
        raise PreconditionError("entropies are defined on density or pure-vector states, got an operator")


def vn_entropy(state: MultipartiteState, labels: Labels | None = None) -> float:
    """
    Von Neumann entropy ``-Tr rho log2 rho`` of the state, or of its marginal on ``labels``.

    :param MultipartiteState state: Density or pure-vector state
    :param labels: Marginal to evaluate, defaults to the whole state

    :return: Entropy in bits
    :rtype: float
    """
    _check_density(state)
    labels = state.labels if labels is None else state.require(labels)
    if not labels:
        return 0.0
    if set(labels) == set(state.labels):
        if state.kind == "pure-vector":
            return 0.0
        return matrix_entropy(state.matrix)
    return matrix_entropy(partial_trace(state, labels).matrix)


def relative_entropy_matrix(rho: NDArray, sigma: NDArray) -> float:
    """``Tr rho (log2 rho - log2 sigma)`` on arrays; ``inf`` when ``supp rho`` is not inside ``supp sigma``."""
    cutoff = get_settings().rank_cutoff
    values, vectors = hermitian_eigh(sigma)
    support = values > cutoff
    weights = np.einsum("ik,ij,jk->k", vectors.conj(), rho, vectors).real
    if weights[~support].sum() > cutoff:
        return math.inf
    cross = float(np.dot(weights[support], np.log2(values[support])))
    return -matrix_entropy(rho) - cross


def relative_entropy(rho: MultipartiteState, sigma: MultipartiteState) -> float:
    """
    Quantum relative entropy ``S(rho || sigma)`` in bits.

    :param MultipartiteState rho: First state
    :param MultipartiteState sigma: Second state, same dimensions

    :return: Relative entropy, ``math.inf`` on a support mismatch
    :rtype: float
    :raises DimensionError: If the dimensions differ
    """
    if rho.shape != sigma.shape:
        raise DimensionError(f"relative entropy between dims {rho.shape} and {sigma.shape}")
    return relative_entropy_matrix(rho.density_matrix, sigma.density_matrix)


def mutual_info(state: MultipartiteState, a: Labels, b: Labels) -> float:
    """``I(A:B) = S(A) + S(B) - S(AB)`` for disjoint label sets; other subsystems are traced out."""
    a, b = state.require(a), state.require(b)
    if set(a) & set(b):
        raise PreconditionError(f"mutual information needs disjoint parts, got {a} and {b}")
    return vn_entropy(state, a) + vn_entropy(state, b) - vn_entropy(state, a + b)


def multi_info(state: MultipartiteState, parts: Sequence[Labels]) -> float:
    """Multi-information ``sum_i S(A_i) - S(A_1 ... A_N)``."""
    parts = [state.require(p) for p in parts]
    joint = tuple(label for p in parts for label in p)
    if len(set(joint)) != len(joint):
        raise PreconditionError("multi-information needs disjoint parts")
    return sum(vn_entropy(state, p) for p in parts) - vn_entropy(state, joint)


def cond_mutual_info(state: MultipartiteState, a: Labels, b: Labels, e: Labels = ()) -> float:
    """``I(A:B|E) = S(AE) + S(BE) - S(ABE) - S(E)``; an empty ``E`` gives ``I(A:B)``."""
    a, b, e = state.require(a), state.require(b), state.require(e)
    if not e:
        return mutual_info(state, a, b)
    return vn_entropy(state, a + e) + vn_entropy(state, b + e) - vn_entropy(state, a + b + e) - vn_entropy(state, e)


def coherent_info(state: MultipartiteState, a: Labels, b: Labels) -> float:
    """Coherent information ``I(A>B) = S(B) - S(AB)``; may be negative."""
    a, b = state.require(a), state.require(b)
    return vn_entropy(state, b) - vn_entropy(state, a + b)


def j_quantity(state: MultipartiteState, parts: Sequence[Labels]) -> float:
    """``J(A_1:...:A_N) = S(A_1) + ... + S(A_N) + S(A_1 ... A_N)``."""
    parts = [state.require(p) for p in parts]
    joint = tuple(label for p in parts for label in p)
    return sum(vn_entropy(state, p) for p in parts) + vn_entropy(state, joint)


def binary_entropy(p: float) -> float:
    """
    Binary entropy ``H2(p)`` in bits.

    :param float p: Probability in [0, 1]

    :return: ``-p log2 p - (1-p) log2 (1-p)``
    :rtype: float
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    return float(shannon([p, 1.0 - p], base=2))


def af_bound(epsilon: float, dim_a: int) -> float:
    """
    Continuity bound of conditional entropies: ``2 eps log2 dA + (1 + eps) H2(eps / (1 + eps))``.

    :param float epsilon: Trace-distance parameter in [0, 1]
    :param int dim_a: Dimension of the conditioned system

    :return: Bound in bits, nondecreasing in ``epsilon``
    :rtype: float
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if dim_a < 1:
        raise ValueError(f"dimension must be positive, got {dim_a}")
    return 2 * epsilon * math.log2(dim_a) + (1 + epsilon) * binary_entropy(epsilon / (1 + epsilon))


def _name(part: Sequence[str]) -> str:
    return "".join(part)


def entropic_report(state: MultipartiteState, parts: Sequence[Labels] | None = None) -> EntropicReport:
    """
    Entropies of every part and of the whole, pairwise ``I``, ``I(>)`` and ``J``, and the multi-information.

    :param MultipartiteState state: Density or pure-vector state
    :param parts: Parties, defaults to one per subsystem

    :return: Report of named values
    :rtype: EntropicReport
    """
    parts = [as_labels(p) for p in parts] if parts is not None else [(label,) for label in state.labels]
    joint = tuple(label for p in parts for label in p)
    values: dict[str, float] = {}
    for part in parts:
        values[f"S({_name(part)})"] = vn_entropy(state, part)
    if len(parts) > 1:
        values[f"S({_name(joint)})"] = vn_entropy(state, joint)
    for p, q in combinations(parts, 2):
        values[f"I({_name(p)}:{_name(q)})"] = mutual_info(state, p, q)
        values[f"I({_name(p)}>{_name(q)})"] = coherent_info(state, p, q)
        values[f"I({_name(q)}>{_name(p)})"] = coherent_info(state, q, p)
    if len(parts) > 1:
        names = ":".join(_name(p) for p in parts)
        values[f"J({names})"] = j_quantity(state, parts)
    if len(parts) > 2:
        values[f"I({':'.join(_name(p) for p in parts)})"] = multi_info(state, parts)
    return EntropicReport(values=values)
