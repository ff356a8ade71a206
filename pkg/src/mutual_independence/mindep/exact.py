"""Exact mutual independence: the product-with-reference check and the constructive twisting isometry."""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mutual_independence.common.errors import DecompositionError, LabelError, PreconditionError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.quantum.entropy import mutual_info
from mutual_independence.quantum.state import (
    Isometry,
    MultipartiteState,
    apply_isometry,
    fresh_label,
    pad_subsystem,
    partial_trace,
    permute,
    purify,
    tensor_product,
    trace_distance,
    trace_norm,
)


class LabelSplit(BaseModel):
    """
    Assignment of subsystem labels to the four roles of a local split.

    Alice holds ``alpha + a``, Bob holds ``beta + b``; ``alpha`` and ``beta`` are the parts meant to be
    correlated with each other and product with the reference (the key of a private state), ``a`` and
    ``b`` the rest (its shield).
    """

    model_config = ConfigDict(frozen=True)

    alpha: tuple[str, ...] = Field(default=("A",), description="Alice's independent part")
    a: tuple[str, ...] = Field(default=("A'",), description="Alice's remaining part")
    beta: tuple[str, ...] = Field(default=("B",), description="Bob's independent part")
    b: tuple[str, ...] = Field(default=("B'",), description="Bob's remaining part")

    @model_validator(mode="after")
    def _disjoint(self) -> "LabelSplit":
        labels = self.alpha + self.a + self.beta + self.b
        if len(set(labels)) != len(labels):
            raise LabelError(f"split roles share labels: {labels}")
        return self

    @property
    def alice(self) -> tuple[str, ...]:
        """Every label held by Alice."""
        return self.alpha + self.a

    @property
    def bob(self) -> tuple[str, ...]:
        """Every label held by Bob."""
        return self.beta + self.b

    @property
    def key(self) -> tuple[str, ...]:
        """The ``alpha beta`` labels."""
        return self.alpha + self.beta

    @property
    def shield(self) -> tuple[str, ...]:
        """The ``a b`` labels."""
        return self.a + self.b

    def check(self, state: MultipartiteState) -> None:
        """Raise ``LabelError`` unless the split covers exactly the labels of ``state``."""
        state.require(self.alice + self.bob)
        if set(self.alice + self.bob) != set(state.labels):
            raise LabelError(f"split {self.alice + self.bob} does not cover the labels {list(state.labels)}")


class ExactMICheck(BaseModel):
    """Outcome of the exact mutual-independence test."""

    model_config = ConfigDict(frozen=True)

    is_exact: bool = Field(..., description="Key is product with the reference and correlated")
    residual: float = Field(..., ge=0.0, description="|| rho_keyR - rho_key (x) rho_R ||_1")
    mi_half: float = Field(..., description="I(alpha:beta) / 2")


def independence_residual(psi: MultipartiteState, key: tuple[str, ...], reference: str) -> float:
    """
    Trace-norm distance of ``rho_{key R}`` from ``rho_key (x) rho_R``; 0 for an empty key.

    :param MultipartiteState psi: State containing ``key`` and ``reference``
    :param tuple key: Labels of the key part
    :param str reference: Label of the reference system

    :return: Residual
    :rtype: float
    """
    if not key:
        return 0.0
    joint = partial_trace(psi, key + (reference,))
    ordered_key = tuple(label for label in joint.labels if label != reference)
    product = tensor_product(partial_trace(psi, ordered_key), partial_trace(psi, reference))
    product = permute(product, joint.labels)
    return trace_norm(joint.density_matrix - product.density_matrix)


def check_exact_mi(state: MultipartiteState, split: LabelSplit | None = None) -> ExactMICheck:
    """
    Test whether the key ``alpha beta`` of ``state`` is product with the purifying reference and correlated.

    :param MultipartiteState state: State on the labels of ``split`` (``A, B, A', B'`` by default)
    :param LabelSplit split: Roles of the labels

    :return: Exactness flag, residual and half mutual information
    :rtype: ExactMICheck
    :raises LabelError: If labels are missing
    """
    split = split or LabelSplit()
    split.check(state)
    tol = get_settings().exact_mi_tol
    psi = purify(state.as_density(), fresh_label(state, "R"))
    residual = independence_residual(psi, split.key, psi.labels[-1])
    mi = mutual_info(psi, split.alpha, split.beta) if split.alpha and split.beta else 0.0
    is_exact = residual <= tol and mi > tol
    logger.debug(f"🧮 Exact-MI check: residual {residual:.3e}, I/2 = {mi / 2:.10f}, exact={is_exact}")
    return ExactMICheck(is_exact=is_exact, residual=residual, mi_half=0.5 * mi)


class TwistingResult(BaseModel):
    """Isometry on the shield bringing a state to the normal form ``psi_{key C} (x) rho_D``."""

    model_config = ConfigDict(frozen=True)

    isometry: Isometry = Field(..., description="Map from the shield labels to C, D")
    psi_abc: MultipartiteState = Field(..., description="Pure state on the key and C")
    rho_d: MultipartiteState = Field(..., description="Density state on D")
    reconstruction_error: float = Field(..., ge=0.0, description="Trace distance to the normal form")


def extract_twisting(state: MultipartiteState, split: LabelSplit | None = None) -> TwistingResult:
    """
    Construct the shield isometry ``U: ab -> CD`` with ``(1 (x) U) rho (1 (x) U)^dagger ~ psi_{alpha beta C} (x) rho_D``.

    Two purifications of ``rho_{alpha beta R}`` are matched across the ``alpha beta R : rest`` cut:
    the purification of the input, and ``psi_{alpha beta C} (x) phi_{RD}``. The best isometry between
    their rest spaces solves an orthogonal Procrustes problem, read off an SVD.

    :param MultipartiteState state: State with exact mutual independence in the key
    :param LabelSplit split: Roles of the labels

    :return: Isometry, normal-form factors and reconstruction error
    :rtype: TwistingResult
    :raises PreconditionError: If the key is not exactly independent of the reference
    :raises DecompositionError: If the normal form is reconstructed with an error above ``twist_tol``
    """
    split = split or LabelSplit()
    check = check_exact_mi(state, split)
    if not check.is_exact:
        raise PreconditionError(
            f"exact mutual independence required, residual {check.residual:.3e}, I/2 = {check.mi_half:.3e}"
        )
    settings = get_settings()
    ordered = permute(state.as_density(), split.key + split.shield)
    r_label = fresh_label(ordered, "R")
    psi1 = purify(ordered, r_label)
    c_label, d_label = fresh_label(psi1, "C"), fresh_label(psi1, "D")

    psi_key_c = purify(partial_trace(psi1, split.key), c_label)
    phi_rd = purify(partial_trace(psi1, r_label), d_label)
    d_shield = ordered.dim_of(split.shield)
    d_c = psi_key_c.dim_of(c_label)
    phi_rd = pad_subsystem(phi_rd, d_label, max(phi_rd.dim_of(d_label), -(-d_shield // d_c)))
    psi2 = permute(tensor_product(psi_key_c, phi_rd), split.key + (r_label, c_label, d_label))

    d_kr = ordered.dim_of(split.key) * psi1.dim_of(r_label)
    m1 = permute(psi1, split.key + (r_label,) + split.shield).matrix.reshape(d_kr, d_shield)
    m2 = psi2.matrix.reshape(d_kr, -1)
    w, _, zh = np.linalg.svd(m1.conj().T @ m2, full_matrices=False)
    u = (w @ zh).T

    shield_dims = tuple(ordered.subsystem(label) for label in split.shield)
    out_dims = (psi2.subsystem(c_label), psi2.subsystem(d_label))
    isometry = Isometry(in_dims=shield_dims, out_dims=out_dims, matrix=u)
    rho_d = partial_trace(phi_rd, d_label)
    twisted = apply_isometry(ordered, isometry)
    target = tensor_product(psi_key_c, rho_d)
    error = trace_distance(twisted.density_matrix, target.density_matrix)
    if error > settings.twist_tol:
        raise DecompositionError(f"twisting reconstruction error {error:.3e} exceeds {settings.twist_tol:g}")
    logger.debug(f"🧮 Twisting reconstructed with error {error:.3e}")
    return TwistingResult(isometry=isometry, psi_abc=psi_key_c, rho_d=rho_d, reconstruction_error=error)

