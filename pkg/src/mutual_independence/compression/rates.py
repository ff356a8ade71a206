"""Rate accounting of entanglement-assisted distributed compression."""
from collections.abc import Sequence
import csv
import io
import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mutual_independence.common.errors import PreconditionError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.mindep.exact import LabelSplit, independence_residual
from mutual_independence.quantum.entropy import j_quantity, multi_info, mutual_info, vn_entropy
from mutual_independence.quantum.measures import Cut, bipartition
from mutual_independence.quantum.state import Labels, MultipartiteState, as_labels, fresh_label, group_subsystems, purify


RATE_SLACK = 1e-9
Order = Literal["a-first", "b-first"]


class RatePoint(BaseModel):
    """A rate pair in qubits per copy and the formula it comes from."""

    model_config = ConfigDict(frozen=True)

    R_A: float = Field(..., description="Alice's rate")
    R_B: float = Field(..., description="Bob's rate")
    formula: str = Field(..., description="Formula the rates were evaluated from")
    assumptions: str = Field(default="", description="Conditions under which the point is valid")

    @field_validator("R_A", "R_B")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError(f"finite-rate: {value!r}")
        return value

    @property
    def rate_sum(self) -> float:
        """``R_A + R_B``."""
        return self.R_A + self.R_B


class ConverseBounds(BaseModel):
    """Lower bounds every achievable rate pair satisfies."""

    model_config = ConfigDict(frozen=True)

    R_A_min: float = Field(..., description="I(A:R) / 2")
    R_B_min: float = Field(..., description="I(B:R) / 2")
    sum_min: float = Field(..., description="J(A:B) / 2 minus the squashed-entanglement bound")


class RateIdentity(BaseModel):
    """Both sides of the rate-sum identity for a split with an independent key."""

    model_config = ConfigDict(frozen=True)

    lhs: float = Field(..., description="R_A + R_B from the state-redistribution pair")
    rhs: float = Field(..., description="J(A:B) / 2 - I(alpha:beta) / 2")
    gap: float = Field(..., ge=0.0, description="|lhs - rhs|")


class MultipartiteDecomposition(BaseModel):
    """Optimal multipartite rate sum split into a classical-like part and a quantum correction."""

    model_config = ConfigDict(frozen=True)

    S_total: float = Field(..., description="S(A_1 ... A_N)")
    quantum_correction: float = Field(..., description="[I(A_1:...:A_N) - I(alpha_1:...:alpha_N)] / 2")
    rate_sum: float = Field(..., description="S_total + quantum_correction")
    residual_independence: float = Field(..., description="I(alpha_1 ... alpha_N : R)")


class RateRegionReport(BaseModel):
    """Achievable points, conjectural corners, converse bounds and the optimal rate sum."""

    model_config = ConfigDict(frozen=True)

    achievable: list[RatePoint] = Field(default_factory=list)
    conjectural: list[RatePoint] = Field(default_factory=list, description="Corners whose achievability is open")
    converse: ConverseBounds
    optimal_rate_sum: float | None = Field(default=None, description="J/2 - I_ind for the supplied I_ind")
    iind_value: float | None = Field(default=None, description="I_ind value plugged into the optimal sum")
    iind_provenance: str = Field(default="", description="Where the I_ind value comes from")
    identity: RateIdentity | None = Field(default=None, description="Rate-sum identity check of the split")

    @model_validator(mode="after")
    def _above_converse(self) -> "RateRegionReport":
        """Achievable rate sums respect the converse bound."""
        for point in self.achievable:
            if point.rate_sum < self.converse.sum_min - RATE_SLACK:
                raise ValueError(f"converse: {point.formula} sums to {point.rate_sum!r} < {self.converse.sum_min!r}")
        return self

    def to_csv(self) -> str:
        """One row per point: ``R_A, R_B, formula, assumptions``, LF line endings."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["R_A", "R_B", "formula", "assumptions"])
        for point in self.achievable + self.conjectural:
            writer.writerow([repr(point.R_A), repr(point.R_B), point.formula, point.assumptions])
        return buffer.getvalue()


def _purified(state: MultipartiteState, cut: Cut) -> MultipartiteState:
    """Purification of ``state`` grouped into parties ``A, B`` with reference ``R``."""
    a, b = bipartition(state, cut)
    return purify(group_subsystems(state, {"A": a, "B": b}).as_density(), "R")


def rate_sum_theorem(state: MultipartiteState, iind_value: float, cut: Cut = ("A", "B")) -> float:
    """
    Optimal rate sum ``J(A:B) / 2 - I_ind`` for a supplied value of the mutual independence.

    :param MultipartiteState state: Bipartite state
    :param float iind_value: Certified value of the mutual independence
    :param tuple cut: Alice's and Bob's labels

    :return: Rate sum in qubits per copy
    :rtype: float
    :raises PreconditionError: If ``iind_value`` lies outside ``[0, I(A:B)/2]``
    """
    a, b = bipartition(state, cut)
    half_mi = 0.5 * mutual_info(state, a, b)
    if not 0.0 <= iind_value <= half_mi + RATE_SLACK:
        raise PreconditionError(f"I_ind value {iind_value!r} outside [0, I(A:B)/2 = {half_mi!r}]")
    return 0.5 * j_quantity(state, [a, b]) - iind_value


def _split_state(state: MultipartiteState, split: LabelSplit) -> MultipartiteState:
    """Purify ``state`` after checking that its key is product with the reference."""
    split.check(state)
    psi = purify(state.as_density(), fresh_label(state, "R"))
    residual = independence_residual(psi, split.key, psi.labels[-1])
    tol = get_settings().exact_mi_tol
    if residual > tol:
        raise PreconditionError(f"key {split.key} is not product with the reference: residual {residual:.3e} > {tol:g}")
    return psi


def rate_pair_exact(state: MultipartiteState, split: LabelSplit, order: Order = "a-first") -> RatePoint:
    """
    State-redistribution rate pair of a split whose key ``alpha beta`` is product with the reference.

    With ``a`` sent first, ``R_A = (S(a) + S(A) - S(alpha)) / 2`` and
    ``R_B = (S(ab) + S(RA) - S(beta) - S(a)) / 2``; ``b-first`` swaps the roles.

    :param MultipartiteState state: State on the labels of ``split``
    :param LabelSplit split: Roles of the labels
    :param str order: Which shield part is sent first

    :return: Rate pair
    :rtype: RatePoint
    :raises PreconditionError: If the key is not product with the reference
    """
    psi = _split_state(state, split)
    r = psi.labels[-1]

    def s(*groups: Sequence[str]) -> float:
        return vn_entropy(psi, tuple(label for group in groups for label in group))

    shield = s(split.a, split.b)
    if order == "a-first":
        r_a = 0.5 * (s(split.a) + s(split.alice) - s(split.alpha))
        r_b = 0.5 * (shield + s((r,), split.alice) - s(split.beta) - s(split.a))
        formula = "R_A = (S(a)+S(A)-S(alpha))/2, R_B = (S(ab)+S(RA)-S(beta)-S(a))/2"
    else:
        r_b = 0.5 * (s(split.b) + s(split.bob) - s(split.beta))
        r_a = 0.5 * (shield + s((r,), split.bob) - s(split.alpha) - s(split.b))
        formula = "R_B = (S(b)+S(B)-S(beta))/2, R_A = (S(ab)+S(RB)-S(alpha)-S(b))/2"
    return RatePoint(R_A=r_a, R_B=r_b, formula=formula, assumptions=f"state redistribution, sends {order[0]} first")


def rate_sum_identity_check(state: MultipartiteState, split: LabelSplit) -> RateIdentity:
    """
    Compare the state-redistribution rate sum with ``J(A:B)/2 - I(alpha:beta)/2``.

    :param MultipartiteState state: State on the labels of ``split``
    :param LabelSplit split: Split with an independent key

    :return: Both sides and their gap
    :rtype: RateIdentity
    """
    lhs = rate_pair_exact(state, split).rate_sum
    key_mi = mutual_info(state, split.alpha, split.beta) if split.alpha and split.beta else 0.0
    rhs = 0.5 * j_quantity(state, [split.alice, split.bob]) - 0.5 * key_mi
    gap = abs(lhs - rhs)
    logger.debug(f"🧮 Rate-sum identity: lhs {lhs:.12f}, rhs {rhs:.12f}, gap {gap:.2e}")
    return RateIdentity(lhs=lhs, rhs=rhs, gap=gap)


def corner_points(state: MultipartiteState, cut: Cut = ("A", "B")) -> list[RatePoint]:
    """
    Unassisted corners ``(I(A:R)/2, S(B))`` and ``(S(A), I(B:R)/2)``, each summing to ``J(A:B)/2``.

    :param MultipartiteState state: Bipartite state
    :param tuple cut: Alice's and Bob's labels

    :return: Both corner points
    :rtype: list[RatePoint]
    """
    psi = _purified(state, cut)
    return [
        RatePoint(
            R_A=0.5 * mutual_info(psi, "A", "R"),
            R_B=vn_entropy(psi, "B"),
            formula="R_A = I(A:R)/2, R_B = S(B)",
            assumptions="B compressed by Schumacher coding, A merged",
        ),
        RatePoint(
            R_A=vn_entropy(psi, "A"),
            R_B=0.5 * mutual_info(psi, "B", "R"),
            formula="R_A = S(A), R_B = I(B:R)/2",
            assumptions="A compressed by Schumacher coding, B merged",
        ),
    ]


def conjectural_corner_points(state: MultipartiteState, iind_value: float, cut: Cut = ("A", "B")) -> list[RatePoint]:
    """Corners with ``I_ind`` subtracted from the Schumacher-coded party; achievability open."""
    corners = corner_points(state, cut)
    return [
        RatePoint(
            R_A=corners[0].R_A,
            R_B=corners[0].R_B - iind_value,
            formula="R_A = I(A:R)/2, R_B = S(B) - I_ind",
            assumptions="achievability open",
        ),
        RatePoint(
            R_A=corners[1].R_A - iind_value,
            R_B=corners[1].R_B,
            formula="R_A = S(A) - I_ind, R_B = I(B:R)/2",
            assumptions="achievability open",
        ),
    ]


def converse_bounds(state: MultipartiteState, esq_value: float, cut: Cut = ("A", "B")) -> ConverseBounds:
    """
    Converse ``R_A >= I(A:R)/2``, ``R_B >= I(B:R)/2`` and ``R_A + R_B >= J(A:B)/2 - E_sq``.

    :param MultipartiteState state: Bipartite state
    :param float esq_value: Upper bound on the squashed entanglement
    :param tuple cut: Alice's and Bob's labels

    :return: Converse bounds
    :rtype: ConverseBounds
    """
    psi = _purified(state, cut)
    return ConverseBounds(
        R_A_min=0.5 * mutual_info(psi, "A", "R"),
        R_B_min=0.5 * mutual_info(psi, "B", "R"),
        sum_min=0.5 * j_quantity(psi, ["A", "B"]) - esq_value,
    )


def multipartite_rate_sum(state: MultipartiteState, parts: Sequence[Labels], iind_value: float) -> float:
    """
    Optimal multipartite rate sum ``J(A_1:...:A_N)/2 - I_ind``.

    :param MultipartiteState state: State
    :param Sequence parts: Parties
    :param float iind_value: Certified multipartite mutual independence

    :return: Rate sum
    :rtype: float
    :raises PreconditionError: If ``iind_value`` lies outside ``[0, I(A_1:...:A_N)/2]``
    """
    parts = [as_labels(p) for p in parts]
    half_multi = 0.5 * multi_info(state, parts)
    if not 0.0 <= iind_value <= half_multi + RATE_SLACK:
        raise PreconditionError(f"I_ind value {iind_value!r} outside [0, multi-information/2 = {half_multi!r}]")
    return 0.5 * j_quantity(state, parts) - iind_value


def multipartite_decomposed(
    state: MultipartiteState, parts: Sequence[Labels], alphas: Sequence[Labels]
) -> MultipartiteDecomposition:
    """
    Rate sum ``S(A_1...A_N) + [I(A_1:...:A_N) - I(alpha_1:...:alpha_N)] / 2`` of an exact split.

    :param MultipartiteState state: State
    :param Sequence parts: Parties ``A_i``
    :param Sequence alphas: Independent part ``alpha_i`` of each party, a subset of its labels

    :return: Total entropy, quantum correction and residual independence of the split
    :rtype: MultipartiteDecomposition
    """
    parts = [as_labels(p) for p in parts]
    alphas = [as_labels(alpha) for alpha in alphas]
    for part, alpha in zip(parts, alphas, strict=True):
        if not set(alpha) <= set(part):
            raise PreconditionError(f"independent part {alpha} is not inside party {part}")
    joint = tuple(label for p in parts for label in p)
    s_total = vn_entropy(state, joint)
    nonempty = [alpha for alpha in alphas if alpha]
    alpha_multi = multi_info(state, nonempty) if len(nonempty) > 1 else 0.0
    correction = 0.5 * (multi_info(state, parts) - alpha_multi)
    psi = purify(state.as_density(), fresh_label(state, "R"))
    key = tuple(label for alpha in alphas for label in alpha)
    residual = mutual_info(psi, key, psi.labels[-1]) if key else 0.0
    return MultipartiteDecomposition(
        S_total=s_total,
        quantum_correction=correction,
        rate_sum=s_total + correction,
        residual_independence=residual,
    )


def rate_region_report(
    state: MultipartiteState,
    esq_value: float,
    cut: Cut = ("A", "B"),
    split: LabelSplit | None = None,
    iind_value: float | None = None,
    iind_provenance: str = "",
) -> RateRegionReport:
    """
    Collect corner points, redistribution pairs of an exact split, converse bounds and the optimal sum.

    :param MultipartiteState state: State
    :param float esq_value: Squashed-entanglement upper bound used by the converse
    :param tuple cut: Alice's and Bob's labels
    :param LabelSplit split: Optional split with an independent key
    :param float iind_value: Optional certified mutual independence
    :param str iind_provenance: Where ``iind_value`` comes from

    :return: Report
    :rtype: RateRegionReport
    """
    achievable = corner_points(state, cut)
    identity = None
    if split is not None:
        achievable += [rate_pair_exact(state, split, order) for order in ("a-first", "b-first")]
        identity = rate_sum_identity_check(state, split)
    conjectural: list[RatePoint] = []
    optimal = None
    if iind_value is not None:
        optimal = rate_sum_theorem(state, iind_value, cut)
        conjectural = conjectural_corner_points(state, iind_value, cut)
    return RateRegionReport(
        achievable=achievable,
        conjectural=conjectural,
        converse=converse_bounds(state, esq_value, cut),
        optimal_rate_sum=optimal,
        iind_value=iind_value,
        iind_provenance=iind_provenance,
        identity=identity,
    )
