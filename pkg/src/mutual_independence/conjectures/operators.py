"""Constant-expectation operator condition: checker, alternating least-squares search and the local-Eve example."""
from typing import Any

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_serializer, field_validator

from mutual_independence.classical.privacy import local_eve_distribution
from mutual_independence.common.encoding import decode_complex, encode_complex
from mutual_independence.common.errors import DimensionError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.mindep.bounds import mi_bounds
from mutual_independence.quantum.measures import Cut, bipartition
from mutual_independence.quantum.sampling import stream
from mutual_independence.quantum.state import MultipartiteState, group_subsystems, hermitian_eigh, subsystems


class OperatorCheck(BaseModel):
    """Outcome of the support-projector test ``Pi (A (x) B) Pi = c Pi``."""

    model_config = ConfigDict(frozen=True)

    holds: bool
    c: float = Field(..., description="Constant expectation of the normalized traceless parts")
    residual: float = Field(..., ge=0.0, description="|| Pi (A (x) B) Pi - c Pi ||_F")
    margin_a: float = Field(..., ge=0.0, description="Frobenius distance of A from span{1}")
    margin_b: float = Field(..., ge=0.0, description="Frobenius distance of B from span{1}")


class OperatorPair(BaseModel):
    """Nontrivial local operators with constant expectation on the support of a state."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: tuple[int, int] = Field(..., description="Local dimensions of A and B")
    a_op: np.ndarray = Field(..., description="Traceless unit-norm operator on A")
    b_op: np.ndarray = Field(..., description="Traceless unit-norm operator on B")
    c: float
    residual: float = Field(..., ge=0.0)

    @field_validator("a_op", "b_op", mode="before")
    @classmethod
    def _decode(cls, value: Any, info: ValidationInfo) -> NDArray:
        if "dims" not in info.data:
            raise ValueError("dims: cannot shape the operators without valid dims")
        d = info.data["dims"][0 if info.field_name == "a_op" else 1]
        m = np.array(decode_complex(value, (d, d), field=info.field_name))
        m.setflags(write=False)
        return m

    @field_serializer("a_op", "b_op")
    def _encode(self, m: NDArray) -> list[list[float]]:
        return encode_complex(m)


class OperatorSearchResult(BaseModel):
    """Accepted pair, if any, and the best residual over all restarts."""

    model_config = ConfigDict(frozen=True)

    pair: OperatorPair | None = None
    best_residual: float = Field(..., ge=0.0)
    restarts: int = Field(..., ge=1)
    diagonal: bool = False


def _support_projector(rho: NDArray) -> NDArray:
    values, vectors = hermitian_eigh(rho)
    support = vectors[:, values > get_settings().rank_cutoff]
    return support @ support.conj().T


def _traceless(op: NDArray) -> tuple[NDArray, float]:
    """Identity-free part of ``op`` and its Frobenius norm, the distance of ``op`` from span{1}."""
    d = op.shape[0]
    part = op - np.trace(op) / d * np.eye(d)
    return part, float(np.linalg.norm(part))


def _grouped(state: MultipartiteState, cut: Cut) -> tuple[NDArray, int, int]:
    a, b = bipartition(state, cut)
    grouped = group_subsystems(state, {"A": a, "B": b})
    da, db = grouped.shape
    return grouped.density_matrix, da, db


def _constant_part(m: NDArray, projector: NDArray) -> tuple[float, float]:
    """Constant ``c = Tr(Pi M Pi) / rank`` and the residual ``|| Pi M Pi - c Pi ||_F``."""
    rank = max(round(float(np.trace(projector).real)), 1)
    sandwiched = projector @ m @ projector
    c = np.trace(sandwiched) / rank
    return float(c.real), float(np.linalg.norm(sandwiched - c * projector))


def operator_check(
    state: MultipartiteState, a_op: NDArray, b_op: NDArray, tol: float | None = None, cut: Cut = ("A", "B")
) -> OperatorCheck:
    """
    Test whether ``<psi|A (x) B|psi>`` is the same for every vector in the support of the state.

    The test runs on the identity-free, unit-norm parts of both operators, so its decision is unchanged
    under ``A -> uA + v 1``. Operators closer than the non-triviality margin to span{1} never hold.

    :param MultipartiteState state: Bipartite state
    :param NDArray a_op: Operator on Alice's side
    :param NDArray b_op: Operator on Bob's side
    :param float tol: Residual threshold, defaults to the settings value
    :param tuple cut: Alice's and Bob's labels

    :return: Decision, constant, residual and margins
    :rtype: OperatorCheck
    :raises DimensionError: If an operator does not match its local dimension
    """
    settings = get_settings()
    tol = settings.operator_tol if tol is None else tol
    rho, da, db = _grouped(state, cut)
    a_op, b_op = np.asarray(a_op, dtype=complex), np.asarray(b_op, dtype=complex)
    if a_op.shape != (da, da) or b_op.shape != (db, db):
        raise DimensionError(f"operators {a_op.shape} and {b_op.shape} do not match local dims {da}x{db}")
    a_part, margin_a = _traceless(a_op)
    b_part, margin_b = _traceless(b_op)
    nontrivial = min(margin_a, margin_b) >= settings.nontrivial_margin
    if not nontrivial:
        logger.debug(f"🧮 Operator pair rejected as trivial: margins {margin_a:.2e}, {margin_b:.2e}")
        return OperatorCheck(holds=False, c=0.0, residual=0.0, margin_a=margin_a, margin_b=margin_b)
    m = np.kron(a_part / margin_a, b_part / margin_b)
    c, residual = _constant_part(m, _support_projector(rho))
    return OperatorCheck(holds=residual <= tol, c=c, residual=residual, margin_a=margin_a, margin_b=margin_b)


def traceless_basis(d: int, diagonal: bool = False) -> list[NDArray]:
    """
    Frobenius-orthonormal basis of the traceless Hermitian ``d x d`` matrices.

    :param int d: Dimension
    :param bool diagonal: Restrict to matrices diagonal in the standard basis

    :return: ``d - 1`` diagonal elements, followed by ``d (d - 1)`` off-diagonal ones unless ``diagonal``
    :rtype: list[NDArray]
    """
    basis = []
    for level in range(1, d):
        entries = np.zeros(d)
        entries[:level] = 1.0
        entries[level] = -level
        basis.append(np.diag(entries / np.sqrt(level * (level + 1))).astype(complex))
    if diagonal:
        return basis
    for i in range(d):
        for j in range(i + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[i, j] = sym[j, i] = 1 / np.sqrt(2)
            anti = np.zeros((d, d), dtype=complex)
            anti[i, j], anti[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis += [sym, anti]
    return basis


def _best_factor(columns: list[NDArray], projector: NDArray) -> tuple[NDArray, float]:
    """
    Unit coefficient vector minimizing ``|| sum_k x_k M_k - c Pi ||_F`` over ``x`` and ``c``.

    With ``c`` eliminated the problem is the smallest right singular vector of the stacked real system.
    """
    rank = max(float(np.trace(projector).real), 1.0)
    flat_pi = projector.reshape(-1)
    rows = []
    for m in columns:
        v = m.reshape(-1)
        rows.append(v - np.vdot(flat_pi, v) / rank * flat_pi)
    k = np.array(rows).T
    _, singular, vt = np.linalg.svd(np.vstack([k.real, k.imag]), full_matrices=False)
    return vt[-1], float(singular[-1])


def _combine(basis: list[NDArray], x: NDArray) -> NDArray:
    return sum(xk * g for xk, g in zip(x, basis, strict=True))


def operator_search(
    state: MultipartiteState,
    seed: int | None = None,
    restarts: int | None = None,
    diagonal: bool = False,
    cut: Cut = ("A", "B"),
    sweeps: int = 500,
) -> OperatorSearchResult:
    """
    Search nontrivial ``A``, ``B`` with ``Pi (A (x) B) Pi = c Pi`` by alternating least squares.

    Each restart draws a random traceless unit ``B``, then alternately solves for the best ``A`` given
    ``B`` and the best ``B`` given ``A``, both traceless with unit norm.

    :param MultipartiteState state: Bipartite state
    :param int seed: Master seed, defaults to the settings seed
    :param int restarts: Number of random starts, defaults to the settings value
    :param bool diagonal: Only consider operators diagonal in the standard basis
    :param tuple cut: Alice's and Bob's labels
    :param int sweeps: Iteration cap of each restart

    :return: Accepted pair (or ``None``) and the best residual reached
    :rtype: OperatorSearchResult
    """
    settings = get_settings()
    seed = settings.seed if seed is None else seed
    restarts = settings.operator_restarts if restarts is None else restarts
    rho, da, db = _grouped(state, cut)
    projector = _support_projector(rho)
    basis_a, basis_b = traceless_basis(da, diagonal), traceless_basis(db, diagonal)
    if not basis_a or not basis_b:
        raise DimensionError(f"local dims {da}x{db} admit no traceless operator")

    best: tuple[float, NDArray, NDArray] | None = None
    for restart in range(restarts):
        x_b = stream(seed, restart).standard_normal(len(basis_b))
        b_op = _combine(basis_b, x_b / np.linalg.norm(x_b))
        residual = np.inf
        for _ in range(sweeps):
            x_a, _ = _best_factor([projector @ np.kron(g, b_op) @ projector for g in basis_a], projector)
            a_op = _combine(basis_a, x_a)
            x_b, current = _best_factor([projector @ np.kron(a_op, g) @ projector for g in basis_b], projector)
            b_op = _combine(basis_b, x_b)
            converged = residual - current < 1e-15 or current <= settings.operator_tol / 10
            residual = current
            if converged:
                break
        logger.debug(f"🎲 Operator restart {restart}: residual {residual:.3e}")
        if best is None or residual < best[0]:
            best = (residual, a_op, b_op)

    residual, a_op, b_op = best
    check = operator_check(state, a_op, b_op, cut=cut)
    pair = None
    if check.holds:
        pair = OperatorPair(dims=(da, db), a_op=a_op, b_op=b_op, c=check.c, residual=check.residual)
        logger.info(f"🧮 Found a constant-expectation pair, residual {check.residual:.3e}, c {check.c:.6f}")
    return OperatorSearchResult(pair=pair, best_residual=check.residual, restarts=restarts, diagonal=diagonal)


def build_local_eve_state(p_matrix: NDArray, p: float, d: int) -> MultipartiteState:
    """
    Classical state ``sum_ij p_ij |ij><ij| (x) tau_i (x) tau_j`` with ``tau_i = (1 - p) 1/d + p |i><i|``.

    Eve holds ``E1`` and ``E2``, each a noisy copy of one party's symbol.

    :param NDArray p_matrix: Joint distribution ``p_ij`` of Alice's and Bob's symbols
    :param float p: Copy fidelity in ``[0, 1]``
    :param int d: Alphabet size

    :return: Diagonal density state on ``A, B, E1, E2``
    :rtype: MultipartiteState
    """
    probs = local_eve_distribution(p_matrix, p, d).probs.reshape(-1)
    dims = subsystems([("A", d), ("B", d), ("E1", d), ("E2", d)])
    return MultipartiteState.trusted(np.diag(probs).astype(complex), dims)


def local_eve_bipartite(p_matrix: NDArray, p: float, d: int) -> MultipartiteState:
    """
    Alice's and Bob's state when the purification of the local-Eve state is handed to them.

    The global pure state is ``sum_ij sqrt(p_ij) |i>_A |j>_B |phi_i>_{E1 A'} |phi_j>_{E2 B'}`` where
    ``phi_i`` purifies ``tau_i``; Eve's ``E1 E2`` is traced out.

    :param NDArray p_matrix: Joint distribution ``p_ij``
    :param float p: Copy fidelity in ``[0, 1]``
    :param int d: Alphabet size

    :return: Density state on ``A, A', B, B'``; Alice holds ``A, A'`` and Bob ``B, B'``
    :rtype: MultipartiteState
    """
    weights = local_eve_distribution(p_matrix, p, d).marginal(("A", "B")).probs
    tau = (1 - p) / d + p * np.eye(d)
    # phi[i] as a matrix over (E, purifier)
    phi = np.array([np.diag(np.sqrt(tau[i])) for i in range(d)])
    psi = np.einsum("ij,ikx,jly->ijkxly", np.sqrt(weights), phi, phi)
    # order (A, B, E1, A', E2, B') -> (A, A', B, B', E1, E2)
    psi = psi.transpose(0, 3, 1, 5, 2, 4).reshape(d**2 * d**2, d * d)
    dims = subsystems([("A", d), ("A'", d), ("B", d), ("B'", d)])
    return MultipartiteState.trusted(psi @ psi.conj().T, dims)


class OperatorConjectureReport(BaseModel):
    """Operator search, optionally set against a certified lower bound on mutual independence."""

    model_config = ConfigDict(frozen=True)

    search: OperatorSearchResult
    lower_bound: float | None = Field(default=None, description="Certified mutual-independence lower bound")
    violation: bool = Field(default=False, description="Positive certified lower bound but no operator pair")


def operator_conjecture_test(
    state: MultipartiteState,
    seed: int | None = None,
    restarts: int | None = None,
    diagonal: bool = False,
    cut: Cut = ("A", "B"),
    certify: bool = False,
) -> OperatorConjectureReport:
    """
    Search an operator pair and, with ``certify``, flag states with certified mutual independence but no pair.

    :param MultipartiteState state: Bipartite state
    :param int seed: Master seed
    :param int restarts: Random starts of the search
    :param bool diagonal: Only consider operators diagonal in the standard basis
    :param tuple cut: Alice's and Bob's labels
    :param bool certify: Compute a certified lower bound on the mutual independence

    :return: Search outcome and verdict
    :rtype: OperatorConjectureReport
    """
    search = operator_search(state, seed=seed, restarts=restarts, diagonal=diagonal, cut=cut)
    if not certify:
        return OperatorConjectureReport(search=search)
    lower = mi_bounds(state, cut, include_er_ppt=False, seed=seed).lower_bound
    violation = search.pair is None and lower > get_settings().nontrivial_margin
    if violation:
        logger.error(f"🚨 VIOLATION: mutual independence >= {lower:.6f} but no constant-expectation pair found")
    return OperatorConjectureReport(search=search, lower_bound=lower, violation=violation)
