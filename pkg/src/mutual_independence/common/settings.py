"""Centralized numerical defaults, overridable through ``MUTIND_*`` environment variables."""
from functools import lru_cache
from typing import Any

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Every tolerance, restart count and iteration cap used by the toolkit.

    Values are read once from the environment (prefix ``MUTIND_``) and printed in every CLI
    report header so that a run can be reproduced from its own output.
    """

    model_config = SettingsConfigDict(env_prefix="MUTIND_", frozen=True, extra="forbid")

    # tensor-core
    herm_tol: float = Field(default=1e-10, gt=0, description="Max |M - M^dagger| entry for Hermitian inputs")
    psd_tol: float = Field(default=1e-10, gt=0, description="Most negative admissible eigenvalue (absolute)")
    trace_tol: float = Field(default=1e-10, gt=0, description="Admissible deviation of the trace from 1")
    rank_cutoff: float = Field(default=1e-12, gt=0, description="Eigenvalues at or below are treated as zero")

    # mindep
    exact_mi_tol: float = Field(default=1e-8, gt=0, description="Residual and MI threshold of the exact check")
    twist_tol: float = Field(default=1e-7, gt=0, description="Max reconstruction error of the twisting isometry")
    split_tol: float = Field(default=1e-6, gt=0, description="Feasibility threshold on I(alpha beta:R)")
    split_penalty: float = Field(default=10.0, gt=0, description="Initial penalty weight mu of the split search")
    split_restarts: int = Field(default=6, ge=1, description="Restarts of the split search")
    split_max_iters: int = Field(default=4000, ge=1, description="Nelder-Mead iteration cap per restart")

    # ent-measures
    ppt_restarts: int = Field(default=8, ge=0, description="Random PPT starting points besides the maximally mixed one")
    ppt_max_iters: int = Field(default=5000, ge=1, description="Iteration cap of the PPT descent")
    ppt_rel_tol: float = Field(default=1e-9, gt=0, description="Relative objective change that stops the descent")
    ppt_cert_tol: float = Field(default=1e-8, gt=0, description="Most negative admissible eigenvalue of sigma^Gamma")
    ext_dim: int = Field(default=2, ge=1, description="Extension dimension of the squashed-entanglement heuristic")
    esq_trials: int = Field(default=32, ge=0, description="Haar-sampled extensions of the squashed heuristic")

    # conjectures
    violation_tol: float = Field(default=1e-7, gt=0, description="Slack below minus this value is a violation")
    nontrivial_margin: float = Field(default=1e-6, gt=0, description="Minimal distance of an operator from span{1}")
    operator_tol: float = Field(default=1e-8, gt=0, description="Residual threshold of the operator condition")
    operator_restarts: int = Field(default=8, ge=1, description="Random restarts of the operator search")

    # classical
    structural_zero: float = Field(default=1e-12, gt=0, description="Probabilities at or below are structural zeros")
    ratio_tol: float = Field(default=1e-9, gt=0, description="Log-ratio tolerance of the redundancy refinement")
    decomposition_tol: float = Field(default=1e-9, gt=0, description="Max reconstruction error of a decomposition")

    # runtime
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed of every random stream")
    jobs: int = Field(default=1, ge=1, description="Worker processes used by searches and campaigns")
    log_level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")


_OVERRIDE: list[Settings] = []


@lru_cache(maxsize=1)
def _environment_settings() -> Settings:
    return Settings()


def get_settings() -> Settings:
    """
    Return the active settings: the last installed override, or the environment defaults.

    :return: Active settings
    :rtype: Settings
    """
    if _OVERRIDE:
        return _OVERRIDE[-1]
    return _environment_settings()


def use_settings(settings: Settings | None = None, **overrides: Any) -> Settings:
    """
    Install process-wide settings, built from ``settings`` (or the current ones) plus ``overrides``.

    :param Settings settings: Base settings, defaults to the active ones
    :param overrides: Field values to replace

    :return: The installed settings
    :rtype: Settings
    """
    base = settings if settings is not None else get_settings()
    installed = Settings(**{**base.model_dump(), **overrides})
    _OVERRIDE.clear()
    _OVERRIDE.append(installed)
    return installed


def reset_settings() -> None:
    """Drop any installed override and fall back to the environment defaults."""
    _OVERRIDE.clear()
