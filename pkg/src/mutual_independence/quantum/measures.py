"""Entanglement measures: logarithmic negativity, isotropic states, PPT relative entropy, squashed heuristic."""
from functools import partial
import math

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.optimize import minimize_scalar
from scipy.special import rel_entr

from mutual_independence.common.errors import DimensionError, LabelError, NonConvergenceError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.jobs.pool import JobPool
from mutual_independence.quantum.entropy import cond_mutual_info, mutual_info, relative_entropy_matrix
from mutual_independence.quantum.sampling import haar_isometry, random_density, stream
from mutual_independence.quantum.state import (
    Labels,
    MultipartiteState,
    apply_isometry,
    as_labels,
    fresh_label,
    group_subsystems,
    hermitian_eigh,
    maximally_entangled,
    partial_trace,
    partial_transpose,
    partial_transpose_matrix,
    purify,
    subsystems,
    trace_norm,
)


Cut = tuple[Labels, Labels]
NEGATIVE_SLACK = 1e-9
ER_PPT_METHOD = "E_r-PPT (lower bounds E_r beyond 2x3)"


class IsotropicParams(BaseModel):
    """Parameters of the isotropic family ``F Phi_d + (1 - F)(1 - Phi_d)/(d^2 - 1)``."""

    model_config = ConfigDict(frozen=True)

    F: float = Field(..., ge=0.0, le=1.0, description="Fidelity with the maximally entangled state")
    d: int = Field(..., ge=2, description="Local dimension")


class PptCertificate(BaseModel):
    """Optimizer state backing an ``E_r-PPT`` value."""

    model_config = ConfigDict(frozen=True)

    sigma: MultipartiteState = Field(..., description="Minimizing PPT state")
    ppt_margin: float = Field(..., description="Smallest eigenvalue of the partial transpose of sigma")
    iterations: int = Field(..., ge=0, description="Iterations of the winning restart")
    restart_values: list[float] = Field(default_factory=list, description="Final value of every restart")
    converged: bool = Field(..., description="Whether the winning restart met the stopping rule")

    @property
    def spread(self) -> float:
        """Largest gap between the best restart and any converged restart."""
        finite = [v for v in self.restart_values if math.isfinite(v)]
        return max(finite) - min(finite) if finite else math.inf


class ExtensionCertificate(BaseModel):
    """Extension achieving a squashed-entanglement heuristic value."""

    model_config = ConfigDict(frozen=True)

    source: str = Field(..., description="trivial, classical-copy or haar")
    trial: int = Field(..., ge=-1, description="Haar trial index, -1 for deterministic extensions")
    ext_dim: int = Field(..., ge=1, description="Dimension of the extension system E")
    trials: int = Field(..., ge=0, description="Number of Haar extensions sampled")


class MeasureResult(BaseModel):
    """A measure value in bits, the method that produced it and an optional certificate."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., description="Value in bits")
    method: str = Field(..., description="Method tag")
    certificate: PptCertificate | ExtensionCertificate | None = Field(default=None)

    @field_validator("value")
    @classmethod
    def _nonnegative(cls, value: float) -> float:
        if value < -NEGATIVE_SLACK:
            raise ValueError(f"nonnegativity: measure value {value!r}")
        return value


def bipartition(state: MultipartiteState, cut: Cut) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """
    Check that ``cut`` splits the labels of ``state`` into two nonempty disjoint parts.

    :param MultipartiteState state: State
    :param tuple cut: ``(A labels, B labels)``

    :return: Both parts as label tuples
    :rtype: tuple
    :raises LabelError: If the cut is not a bipartition
    """
    a, b = state.require(as_labels(cut[0])), state.require(as_labels(cut[1]))
    if not a or not b or set(a) & set(b) or set(a) | set(b) != set(state.labels):
        raise LabelError(f"cut {list(a)}:{list(b)} is not a bipartition of {list(state.labels)}")
    return a, b


def log_negativity(state: MultipartiteState, cut: Cut) -> float:
    """
    Logarithmic negativity ``log2 || rho^Gamma ||_1`` with the transpose on the second part of ``cut``.

    :param MultipartiteState state: Density or pure-vector state
    :param tuple cut: Bipartition of the labels

    :return: Value in bits, 0 for PPT states
    :rtype: float
    """
    _, b = bipartition(state, cut)
    return max(0.0, math.log2(trace_norm(partial_transpose(state, b))))


def ppt_margin(state: MultipartiteState, cut: Cut) -> float:
    """Smallest eigenvalue of the partial transpose across ``cut``; negative means NPT."""
    _, b = bipartition(state, cut)
    return float(partial_transpose(state, b).spectrum()[0])


def _bipartite_dims(state: MultipartiteState) -> tuple[int, int]:
    if len(state.dims) != 2:
        raise DimensionError(f"expected a bipartite state, got subsystems {list(state.labels)}")
    da, db = state.shape
    if da != db:
        raise DimensionError(f"isotropic operations need equal local dims, got {da}x{db}")
    return da, db


def isotropic_state(params: IsotropicParams, labels: tuple[str, str] = ("A", "B")) -> MultipartiteState:
    """
    Isotropic state ``F Phi_d + (1 - F)(1 - Phi_d)/(d^2 - 1)``.

    :param IsotropicParams params: Fidelity and local dimension
    :param tuple labels: Labels of the two parties

    :return: Density state
    :rtype: MultipartiteState
    """
    d = params.d
    phi = maximally_entangled(d, labels).density_matrix
    matrix = params.F * phi + (1 - params.F) * (np.eye(d * d) - phi) / (d * d - 1)
    return MultipartiteState.trusted(matrix, subsystems([(labels[0], d), (labels[1], d)]))


def phi_fidelity(state: MultipartiteState) -> float:
    """Fidelity ``<Phi_d| rho |Phi_d>`` of a ``d x d`` state with the maximally entangled state."""
    d, _ = _bipartite_dims(state)
    phi = maximally_entangled(d).matrix
    return float(np.vdot(phi, state.density_matrix @ phi).real)


def uu_twirl(state: MultipartiteState) -> MultipartiteState:
    """
    Exact ``U (x) U*`` twirl: the isotropic state with the input's fidelity with ``Phi_d``.

    :param MultipartiteState state: Bipartite ``d x d`` state

    :return: Isotropic state on the same labels
    :rtype: MultipartiteState
    """
    d, _ = _bipartite_dims(state)
    fidelity = min(1.0, max(0.0, phi_fidelity(state)))
    return isotropic_state(IsotropicParams(F=fidelity, d=d), (state.labels[0], state.labels[1]))


def isotropic_rel_ent_oracle(fidelity: float, d: int) -> float:
    """
    Relative entropy of an isotropic state to the PPT isotropic states, in bits.

    Both states share an eigenbasis so the value is a binary relative entropy minimized over ``F' <= 1/d``.

    :param float fidelity: Fidelity ``F`` of the isotropic state
    :param int d: Local dimension

    :return: ``min_{F' <= 1/d} D2(F || F')``
    :rtype: float
    """
    if fidelity <= 1.0 / d:
        return 0.0

    def divergence(f_prime: float) -> float:
        return float(rel_entr(fidelity, f_prime) + rel_entr(1 - fidelity, 1 - f_prime)) / math.log(2)

    best = minimize_scalar(divergence, bounds=(0.0, 1.0 / d), method="bounded", options={"xatol": 1e-12})
    return min(float(best.fun), divergence(1.0 / d))


# ---------------------------------------------------------------------------------------------
# relative entropy to the PPT set


def _project_simplex(v: NDArray) -> NDArray:
    """Euclidean projection of a real vector onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, len(v) + 1)
    rho = ks[u - (css - 1) / ks > 0][-1]
    theta = (css[rho - 1] - 1) / rho
    return np.maximum(v - theta, 0.0)


def _project_density(m: NDArray) -> NDArray:
    values, vectors = hermitian_eigh(m)
    return (vectors * _project_simplex(values)) @ vectors.conj().T


def _project_ppt(m: NDArray, shape: tuple[int, ...], flip: tuple[int, ...], iters: int = 200) -> NDArray:
    """Dykstra projection onto the intersection of the density set and its partial transpose."""
    x = m
    p = np.zeros_like(m)
    q = np.zeros_like(m)
    for _ in range(iters):
        y = _project_density(x + p)
        p = x + p - y
        x_next = partial_transpose_matrix(_project_density(partial_transpose_matrix(y + q, shape, flip)), shape, flip)
        q = y + q - x_next
        if np.max(np.abs(x_next - x)) < 1e-13:
            x = x_next
            break
        x = x_next
    return _project_density(x)


def _mix_to_ppt(m: NDArray, shape: tuple[int, ...], flip: tuple[int, ...]) -> NDArray:
    """Smallest admixture of the maximally mixed state making ``m`` PPT."""
    dim = m.shape[0]
    smallest = float(np.linalg.eigvalsh(partial_transpose_matrix(m, shape, flip))[0])
    if smallest >= 0:
        return m
    t = -smallest / (1.0 / dim - smallest)
    return (1 - t) * m + t * np.eye(dim) / dim


def _log_derivative(sigma: NDArray, direction: NDArray) -> NDArray:
    """Frechet derivative of the natural matrix logarithm at ``sigma`` along ``direction``."""
    values, vectors = hermitian_eigh(sigma)
    values = np.maximum(values, 1e-15)
    logs = np.log(values)
    diff = values[:, None] - values[None, :]
    same = np.abs(diff) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = np.where(same, 1.0 / values[:, None], (logs[:, None] - logs[None, :]) / np.where(same, 1.0, diff))
    return vectors @ (kernel * (vectors.conj().T @ direction @ vectors)) @ vectors.conj().T


def _ppt_descent(
    index: int,
    rho: NDArray,
    shape: tuple[int, ...],
    flip: tuple[int, ...],
    seed: int,
    max_iters: int,
    rel_tol: float,
) -> dict:
    """
    One restart of projected gradient descent of ``S(rho || sigma)`` over PPT ``sigma``.

    Restart 0 starts from the maximally mixed state, restart ``k`` from a random density matrix
    mixed with the identity until PPT, drawn from the stream ``(seed, k)``.
    """
    dim = rho.shape[0]
    if index == 0:
        sigma = np.eye(dim, dtype=complex) / dim
    else:
        sample = random_density(dim, seed=stream(seed, index)).matrix
        sigma = _mix_to_ppt(0.5 * sample + 0.5 * np.eye(dim) / dim, shape, flip)
    value = relative_entropy_matrix(rho, sigma)
    step = 0.1
    converged = False
    iteration = 0
    for iteration in range(1, max_iters + 1):
        gradient = -_log_derivative(sigma, rho) / math.log(2)
        accepted = False
        while step > 1e-16:
            candidate = _project_ppt(sigma - step * gradient, shape, flip)
            new_value = relative_entropy_matrix(rho, candidate)
            delta = candidate - sigma
            bound = value + float(np.vdot(gradient, delta).real) + float(np.vdot(delta, delta).real) / (2 * step)
            if math.isfinite(new_value) and new_value <= bound + 1e-15:
                accepted = True
                break
            step /= 2
        if not accepted:
            converged = True
            break
        change = abs(value - new_value)
        sigma, value = candidate, new_value
        step *= 2
        if change <= rel_tol * max(abs(value), 1.0):
            converged = True
            break
    sigma = _mix_to_ppt(_project_density(sigma), shape, flip)
    return {
        "sigma": sigma,
        "value": relative_entropy_matrix(rho, sigma),
        "iterations": iteration,
        "converged": converged,
    }


def rel_ent_ppt(
    state: MultipartiteState,
    cut: Cut,
    restarts: int | None = None,
    max_iters: int | None = None,
    seed: int | None = None,
    pool: JobPool | None = None,
) -> MeasureResult:
    """
    Relative entropy of entanglement relaxed to the PPT set: ``min_{sigma PPT} S(rho || sigma)``.

    The minimum is searched by projected gradient descent with backtracking, from the maximally
    mixed state plus ``restarts`` random PPT points. The certificate holds the winning ``sigma``,
    exactly PPT after a final admixture of the identity. For 2x2 and 2x3 systems the PPT set is
    the separable set, elsewhere the value lower-bounds the separable relative entropy.

    :param MultipartiteState state: Bipartite density state
    :param tuple cut: Bipartition of the labels
    :param int restarts: Random restarts, defaults to settings
    :param int max_iters: Iteration cap per restart, defaults to settings
    :param int seed: Seed of the random restarts, defaults to settings
    :param JobPool pool: Pool running the restarts, defaults to the settings width

    :return: Value with its ``PptCertificate``
    :rtype: MeasureResult
    :raises NonConvergenceError: If no restart met the stopping rule
    """
    settings = get_settings()
    _, b = bipartition(state, cut)
    restarts = settings.ppt_restarts if restarts is None else restarts
    max_iters = settings.ppt_max_iters if max_iters is None else max_iters
    seed = settings.seed if seed is None else seed
    rho = state.density_matrix
    flip = tuple(i for i, label in enumerate(state.labels) if label in b)

    margin = float(np.linalg.eigvalsh(partial_transpose_matrix(rho, state.shape, flip))[0])
    if margin >= -settings.ppt_cert_tol:
        logger.debug("🧮 Input is PPT, relative entropy to the PPT set is 0")
        sigma = _mix_to_ppt(rho, state.shape, flip)
        certificate = PptCertificate(
            sigma=MultipartiteState.trusted(sigma, state.dims),
            ppt_margin=float(np.linalg.eigvalsh(partial_transpose_matrix(sigma, state.shape, flip))[0]),
            iterations=0,
            restart_values=[0.0],
            converged=True,
        )
        return MeasureResult(value=max(0.0, relative_entropy_matrix(rho, sigma)), method=ER_PPT_METHOD, certificate=certificate)

    task = partial(
        _ppt_descent,
        rho=rho,
        shape=state.shape,
        flip=flip,
        seed=seed,
        max_iters=max_iters,
        rel_tol=settings.ppt_rel_tol,
    )
    runs = (pool or JobPool()).map(task, restarts + 1)
    converged = [run for run in runs if run["converged"]]
    best = min(converged or runs, key=lambda run: run["value"])
    sigma = best["sigma"]
    certificate = PptCertificate(
        sigma=MultipartiteState.trusted(sigma, state.dims),
        ppt_margin=float(np.linalg.eigvalsh(partial_transpose_matrix(sigma, state.shape, flip))[0]),
        iterations=best["iterations"],
        restart_values=[run["value"] for run in runs],
        converged=best["converged"],
    )
    result = MeasureResult(value=max(0.0, best["value"]), method=ER_PPT_METHOD, certificate=certificate)
    if not converged:
        raise NonConvergenceError(f"⚠️ no PPT descent restart converged within {max_iters} iterations", partial=result)
    spread = max(run["value"] for run in converged) - best["value"]
    if spread > 1e-4:
        logger.warning(f"⚠️ PPT descent restarts disagree by {spread:.2e} bits")
    logger.debug(f"🧮 E_r-PPT = {result.value:.10f} after {best['iterations']} iterations")
    return result


# ---------------------------------------------------------------------------------------------
# squashed-entanglement heuristic


def _is_product_diagonal(m: NDArray, tol: float) -> bool:
    return float(np.max(np.abs(m - np.diag(np.diagonal(m))))) <= tol


def _classical_copy_value(state: MultipartiteState) -> float:
    """``I(A:B|E) / 2`` for the extension copying the classical value of A into E; it is 0."""
    da, db = state.shape
    probs = np.clip(np.diagonal(state.density_matrix).real, 0.0, None).reshape(da, db)
    extension = np.zeros((da, db, da))
    for a in range(da):
        extension[a, :, a] = probs[a]
    matrix = np.diag(extension.reshape(-1))
    extended = MultipartiteState.trusted(matrix / matrix.trace(), subsystems([("A", da), ("B", db), ("E", da)]))
    return 0.5 * cond_mutual_info(extended, "A", "B", "E")


def _haar_extension_value(index: int, psi: MultipartiteState, ext_dim: int, seed: int) -> float:
    """``I(A:B|E) / 2`` for the extension ``Tr_G W psi W^dagger`` with ``W: P -> E G`` Haar-random."""
    purifier = psi.dims[-1]
    g = -(-purifier.dim // ext_dim)
    w = haar_isometry([purifier], [("E", ext_dim), ("G", g)], stream(seed, index))
    extended = partial_trace(apply_isometry(psi, w), ("A", "B", "E"))
    return 0.5 * cond_mutual_info(extended, "A", "B", "E")


def esq_upper(
    state: MultipartiteState,
    cut: Cut,
    ext_dim: int | None = None,
    trials: int | None = None,
    seed: int | None = None,
    pool: JobPool | None = None,
) -> MeasureResult:
    """
    Upper bound on squashed entanglement: the best ``I(A:B|E) / 2`` over sampled extensions.

    Extensions are the trivial one, the classical copy of A when the state is diagonal in the
    product basis, and ``trials`` Haar isometries from the purifier into ``E (x) G``. Trial ``t``
    uses the stream ``(seed, t)``, so more trials never raise the bound.

    :param MultipartiteState state: Bipartite state
    :param tuple cut: Bipartition of the labels
    :param int ext_dim: Dimension of E, defaults to settings
    :param int trials: Haar extensions, defaults to settings
    :param int seed: Seed, defaults to settings
    :param JobPool pool: Pool running the trials

    :return: Value with its ``ExtensionCertificate``
    :rtype: MeasureResult
    """
    settings = get_settings()
    ext_dim = settings.ext_dim if ext_dim is None else ext_dim
    trials = settings.esq_trials if trials is None else trials
    seed = settings.seed if seed is None else seed
    if ext_dim < 1:
        raise DimensionError(f"extension dimension must be at least 1, got {ext_dim}")
    a, b = bipartition(state, cut)
    grouped = group_subsystems(state, {"A": a, "B": b}).as_density()

    candidates: list[tuple[float, str, int]] = [(0.5 * mutual_info(grouped, "A", "B"), "trivial", -1)]
    if _is_product_diagonal(grouped.matrix, settings.herm_tol):
        candidates.append((_classical_copy_value(grouped), "classical-copy", -1))
    if trials:
        psi = purify(grouped, fresh_label(grouped, "P"))
        task = partial(_haar_extension_value, psi=psi, ext_dim=ext_dim, seed=seed)
        values = (pool or JobPool()).map(task, trials)
        candidates += [(value, "haar", t) for t, value in enumerate(values)]

    value, source, trial = min(candidates, key=lambda c: (c[0], c[2]))
    certificate = ExtensionCertificate(source=source, trial=trial, ext_dim=ext_dim, trials=trials)
    logger.debug(f"🧮 E_sq heuristic = {value:.10f} from the {source} extension")
    return MeasureResult(value=max(0.0, value), method="E_sq-heuristic", certificate=certificate)


class MeasuresReport(BaseModel):
    """Logarithmic negativity, PPT relative entropy and squashed-entanglement heuristic of one cut."""

    model_config = ConfigDict(frozen=True)

    log_negativity: float = Field(..., ge=0.0)
    er_ppt: MeasureResult
    esq: MeasureResult


def measures_report(state: MultipartiteState, cut: Cut, seed: int | None = None, pool: JobPool | None = None) -> MeasuresReport:
    """Evaluate every entanglement measure of the toolkit across ``cut``."""
    return MeasuresReport(
        log_negativity=log_negativity(state, cut),
        er_ppt=rel_ent_ppt(state, cut, seed=seed, pool=pool),
        esq=esq_upper(state, cut, seed=seed, pool=pool),
    )
