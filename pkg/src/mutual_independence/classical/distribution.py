"""Joint distributions over labeled finite alphabets and their Shannon quantities."""
from collections.abc import Sequence
from itertools import combinations
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_serializer, field_validator, model_validator
from scipy.stats import entropy as shannon

from mutual_independence.common.errors import InvariantViolation, LabelError
from mutual_independence.common.settings import get_settings
from mutual_independence.quantum.entropy import EntropicReport
from mutual_independence.quantum.state import Labels, as_labels


NORMALIZATION_TOL = 1e-12


class Alphabet(BaseModel):
    """A random variable: its label and alphabet size."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    size: int = Field(..., ge=1)


class JointDistribution(BaseModel):
    """
    Nonnegative tensor over labeled alphabets, stored row-major in the file format
    ``{"alphabets": [{"label": "X", "size": 2}, ...], "probs": [...]}``.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alphabets: tuple[Alphabet, ...] = Field(..., min_length=1)
    probs: np.ndarray = Field(..., description="Probabilities shaped by the alphabet sizes")

    @field_validator("probs", mode="before")
    @classmethod
    def _shape_probs(cls, value: Any, info: ValidationInfo) -> NDArray[np.float64]:
        if "alphabets" not in info.data:
            raise ValueError("alphabets: cannot shape the probabilities without valid alphabets")
        shape = tuple(a.size for a in info.data["alphabets"])
        probs = np.asarray(value, dtype=float)
        if probs.size != int(np.prod(shape)):
            raise InvariantViolation("dimensions", f"probs has {probs.size} entries, alphabets need {int(np.prod(shape))}")
        probs = np.array(probs.reshape(shape))
        probs.setflags(write=False)
        return probs

    @field_serializer("probs")
    def _flatten(self, probs: NDArray) -> list[float]:
        return [float(p) for p in probs.reshape(-1)]

    @model_validator(mode="after")
    def _check_invariants(self) -> "JointDistribution":
        """Unique labels, nonnegative entries, unit total."""
        labels = [a.label for a in self.alphabets]
        if len(set(labels)) != len(labels):
            raise InvariantViolation("labels-unique", f"duplicate labels in {labels}")
        if np.any(self.probs < 0):
            raise InvariantViolation("nonnegative", f"smallest probability is {float(self.probs.min())!r}")
        total = float(self.probs.sum())
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvariantViolation("normalized", f"probabilities sum to {total!r}")
        return self

    @classmethod
    def from_array(cls, probs: Any, labels: Sequence[str]) -> "JointDistribution":
        """Distribution on ``labels`` whose alphabet sizes are the axes of ``probs``."""
        probs = np.asarray(probs, dtype=float)
        if probs.ndim != len(labels):
            raise InvariantViolation("dimensions", f"{probs.ndim} axes for labels {list(labels)}")
        return cls(alphabets=tuple(Alphabet(label=l, size=s) for l, s in zip(labels, probs.shape, strict=True)), probs=probs)

    @property
    def labels(self) -> tuple[str, ...]:
        """Variable labels in axis order."""
        return tuple(a.label for a in self.alphabets)

    def axes(self, labels: Labels) -> tuple[int, ...]:
        """Axis positions of ``labels``."""
        labels = as_labels(labels)
        unknown = [l for l in labels if l not in self.labels]
        if unknown:
            raise LabelError(f"unknown variables {unknown}, distribution has {list(self.labels)}")
        return tuple(self.labels.index(l) for l in labels)

    def marginal(self, labels: Labels) -> "JointDistribution":
        """Marginal on ``labels``, axes in the requested order."""
        axes = self.axes(labels)
        others = tuple(i for i in range(len(self.alphabets)) if i not in axes)
        summed = self.probs.sum(axis=others)
        kept = sorted(axes)
        order = [kept.index(i) for i in axes]
        return JointDistribution.from_array(np.transpose(summed, order), [self.labels[i] for i in axes])

    def entropy(self, labels: Labels | None = None) -> float:
        """Shannon entropy in bits of the marginal on ``labels`` (all variables by default)."""
        labels = self.labels if labels is None else as_labels(labels)
        if not labels:
            return 0.0
        flat = self.marginal(labels).probs.reshape(-1)
        flat = flat[flat > get_settings().structural_zero]
        return float(shannon(flat, base=2)) if flat.size > 1 else 0.0

    def matrix(self, rows: Labels, cols: Labels) -> NDArray[np.float64]:
        """Marginal on ``rows + cols`` reshaped to a matrix, row and column indices row-major."""
        rows, cols = as_labels(rows), as_labels(cols)
        m = self.marginal(rows + cols).probs
        n_rows = int(np.prod([self.alphabets[i].size for i in self.axes(rows)]))
        return m.reshape(n_rows, -1)


def classical_mi(dist: JointDistribution, a: Labels, b: Labels) -> float:
    """``I(A:B) = H(A) + H(B) - H(AB)``."""
    a, b = as_labels(a), as_labels(b)
    return dist.entropy(a) + dist.entropy(b) - dist.entropy(a + b)


def classical_cmi(dist: JointDistribution, a: Labels, b: Labels, z: Labels) -> float:
    """``I(A:B|Z) = H(AZ) + H(BZ) - H(ABZ) - H(Z)``."""
    a, b, z = as_labels(a), as_labels(b), as_labels(z)
    return dist.entropy(a + z) + dist.entropy(b + z) - dist.entropy(a + b + z) - dist.entropy(z)


def conditional_entropy(dist: JointDistribution, a: Labels, given: Labels) -> float:
    """``H(A|Z) = H(AZ) - H(Z)``."""
    a, given = as_labels(a), as_labels(given)
    return dist.entropy(a + given) - dist.entropy(given)


def shannon_entropies(dist: JointDistribution, parts: Sequence[Labels] | None = None) -> EntropicReport:
    """
    Entropy of every part and of their union, pairwise mutual informations and the multi-information.

    :param JointDistribution dist: Distribution
    :param parts: Groups of variables, one per variable by default

    :return: Report with keys ``H(X)``, ``H(XY)``, ``I(X:Y)``, ...
    :rtype: EntropicReport
    """
    parts = [as_labels(p) for p in parts] if parts is not None else [(label,) for label in dist.labels]
    joint = tuple(label for p in parts for label in p)
    values = {f"H({''.join(p)})": dist.entropy(p) for p in parts}
    if len(parts) > 1:
        values[f"H({''.join(joint)})"] = dist.entropy(joint)
    for p, q in combinations(parts, 2):
        values[f"I({''.join(p)}:{''.join(q)})"] = classical_mi(dist, p, q)
    if len(parts) > 2:
        values[f"I({':'.join(''.join(p) for p in parts)})"] = sum(dist.entropy(p) for p in parts) - dist.entropy(joint)
    return EntropicReport(values=values)


def slepian_wolf_sum(dist: JointDistribution, parts: Labels = ("X", "Y")) -> float:
    """Optimal rate sum ``H(XY)`` of separate lossless encoding with joint decoding."""
    return dist.entropy(parts)


def make_corr_anticorr(p: float) -> JointDistribution:
    """
    Correlated or anticorrelated bits with a label telling which: ``P(00c) = P(11c) = p/2`` and
    ``P(01a) = P(10a) = (1-p)/2``, with ``Z = 0`` for ``c`` and ``Z = 1`` for ``a``.

    :param float p: Probability of the correlated branch
    :return: Distribution on ``X, Y, Z``
    :rtype: JointDistribution
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    probs = np.zeros((2, 2, 2))
    probs[0, 0, 0] = probs[1, 1, 0] = p / 2
    probs[0, 1, 1] = probs[1, 0, 1] = (1 - p) / 2
    return JointDistribution.from_array(probs, ("X", "Y", "Z"))
