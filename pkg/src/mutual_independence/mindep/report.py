"""Report of certified bounds on mutual independence."""
from pydantic import BaseModel, ConfigDict, Field, model_validator


SANDWICH_SLACK = 1e-6
ER_PPT_CONDITION = "conditional on the no-locking conjecture"


class IndependenceReport(BaseModel):
    """
    Lower and upper bounds on the mutual independence of a bipartite state, with their provenance.

    The lower bound is certified by a feasible construction. ``upper_esq`` is an unconditional upper
    bound, ``upper_er_ppt_conjectural`` an upper bound only if logarithmic negativity cannot be locked
    by product marginals.
    """

    model_config = ConfigDict(frozen=True)

    lower_bound: float = Field(..., ge=0.0, description="Certified lower bound in bits")
    lower_method: str = Field(..., description="Route that produced the lower bound")
    residual_independence: float = Field(..., description="I(alpha beta:R) at the reporting split")
    mi_half: float = Field(..., description="I(alpha:beta) / 2 at the reporting split")
    trace_residual: float | None = Field(default=None, description="|| rho_alphabetaR - rho_alphabeta (x) rho_R ||_1")
    upper_esq: float | None = Field(default=None, description="Squashed-entanglement heuristic upper bound")
    upper_er_ppt_conjectural: float | None = Field(default=None, description="E_r-PPT, see er_ppt_condition")
    er_ppt_condition: str = Field(default=ER_PPT_CONDITION, description="Validity flag of the E_r-PPT bound")
    provenance: dict[str, str] = Field(default_factory=dict, description="Method of every reported value")

    @model_validator(mode="after")
    def _sandwich(self) -> "IndependenceReport":
        """The certified lower bound cannot exceed a valid upper bound."""
        if self.residual_independence < -1e-9:
            raise ValueError(f"residual-nonnegative: I(alpha beta:R) = {self.residual_independence!r}")
        if self.upper_esq is not None and self.lower_bound > self.upper_esq + SANDWICH_SLACK:
            raise ValueError(f"sandwich: lower bound {self.lower_bound!r} exceeds upper bound {self.upper_esq!r}")
        return self
