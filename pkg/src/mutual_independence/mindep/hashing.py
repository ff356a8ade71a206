"""Hashing lower bound for maximally correlated states."""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from mutual_independence.common.errors import PreconditionError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.quantum.entropy import coherent_info, mutual_info
from mutual_independence.quantum.measures import Cut, bipartition
from mutual_independence.quantum.state import (
    MultipartiteState,
    bell_state,
    dephase,
    fresh_label,
    group_subsystems,
    mixture,
    purify,
)


class MaxCorrBound(BaseModel):
    """Hashing lower bound of a maximally correlated state with its classical-quantum audit."""

    model_config = ConfigDict(frozen=True)

    bound: float = Field(..., ge=0.0, description="max(0, I(A>B) / 2)")
    coherent_info: float = Field(..., description="S(B) - S(AB)")
    ccq_audit: float = Field(..., description="I(A:B) - I(A:R) after dephasing A and B of the purification")

    @property
    def audit_gap(self) -> float:
        """Disagreement between the two evaluations of the key rate."""
        return abs(self.coherent_info - self.ccq_audit)


def bell_diagonal_mixture(epsilon: float) -> MultipartiteState:
    """Rank-two Bell mixture ``(1 - eps) Phi+ + eps Phi-``."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    return mixture([1 - epsilon, epsilon], [bell_state("phi+"), bell_state("phi-")])


def is_maximally_correlated(state: MultipartiteState, tol: float | None = None) -> bool:
    """Whether a ``d x d`` bipartite state has the form ``sum_ij a_ij |ii><jj|``."""
    tol = get_settings().herm_tol if tol is None else tol
    if len(state.dims) != 2 or state.shape[0] != state.shape[1]:
        return False
    d = state.shape[0]
    diagonal_pairs = np.zeros(d * d, dtype=bool)
    diagonal_pairs[[i * d + i for i in range(d)]] = True
    outside = ~np.outer(diagonal_pairs, diagonal_pairs)
    return float(np.max(np.abs(state.density_matrix[outside]), initial=0.0)) <= tol


def maxcorr_hashing_bound(state: MultipartiteState, cut: Cut = ("A", "B")) -> MaxCorrBound:
    """
    Hashing lower bound ``max(0, (S(B) - S(AB)) / 2)`` of a maximally correlated state.

    The key rate is audited on the classical-classical-quantum state obtained by dephasing A and B of the
    purification, where it reads ``I(A:B) - I(A:R)``.

    :param MultipartiteState state: Maximally correlated bipartite state
    :param tuple cut: Bipartition of the labels

    :return: Bound and audit values
    :rtype: MaxCorrBound
    :raises PreconditionError: If the state is not maximally correlated
    """
    a, b = bipartition(state, cut)
    grouped = group_subsystems(state, {"A": a, "B": b}).as_density()
    if not is_maximally_correlated(grouped):
        raise PreconditionError("state is not maximally correlated: weight outside span{|ii><jj|}")
    coherent = coherent_info(grouped, "A", "B")
    psi = purify(grouped, fresh_label(grouped, "R"))
    ccq = dephase(psi, ("A", "B"))
    audit = mutual_info(ccq, "A", "B") - mutual_info(ccq, "A", psi.labels[-1])
    logger.debug(f"🧮 Hashing bound: I(A>B) = {coherent:.10f}, ccq audit = {audit:.10f}")
    return MaxCorrBound(bound=max(0.0, 0.5 * coherent), coherent_info=coherent, ccq_audit=audit)
