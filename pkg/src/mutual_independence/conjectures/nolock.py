"""
Falsification harness for the no-locking conjecture.

For every extension ``rho_XAB`` of a product state ``rho_A (x) rho_B`` the logarithmic negativity
across ``XA:B`` is conjectured not to exceed ``log2 |X|``. Extensions are generated as Haar isometries
on the purifier of ``rho_A (x) rho_B`` (every extension arises this way), optionally followed by a
Nelder-Mead ascent of the negativity over the isometry.
"""
from functools import partial
import math
from pathlib import Path

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import dft, expm
from scipy.optimize import minimize

from mutual_independence.common.errors import DimensionError, GeneratorError
from mutual_independence.common.io import save_model
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.jobs.pool import JobPool
from mutual_independence.quantum.measures import log_negativity
from mutual_independence.quantum.sampling import haar_unitary, random_density, stream
from mutual_independence.quantum.state import (
    Isometry,
    MultipartiteState,
    apply_isometry,
    maximally_entangled,
    mixture,
    partial_trace,
    permute,
    purify,
    subsystems,
    tensor_product,
)


MARGINAL_TOL = 1e-10
NOLOCK_CUT = (("X", "A"), ("B",))


class NoLockParams(BaseModel):
    """Dimensions and search options of a campaign."""

    model_config = ConfigDict(frozen=True)

    dim_x: int = Field(default=2, ge=1, description="|X|, the extension register")
    dim_a: int = Field(default=2, ge=1, le=4, description="|A|")
    dim_b: int = Field(default=2, ge=1, le=4, description="|B|")
    dim_g: int | None = Field(default=None, ge=1, description="|G|, traced-out environment; default |A||B|")
    optimize: bool = Field(default=False, description="Ascend the negativity from the random start")
    max_iters: int = Field(default=400, ge=1, description="Nelder-Mead iteration cap of the ascent")

    @property
    def environment(self) -> int:
        """Dimension of G actually used."""
        return self.dim_g if self.dim_g is not None else self.dim_a * self.dim_b

    @property
    def dims(self) -> tuple[int, int, int, int]:
        """``(|X|, |A|, |B|, |G|)``."""
        return self.dim_x, self.dim_a, self.dim_b, self.environment


class TrialRecord(BaseModel):
    """One trial, recomputable from ``seed``, ``index``, ``dims`` and ``theta``."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0)
    index: int = Field(..., ge=0, description="Trial index, the sub-stream of the seed")
    dims: tuple[int, int, int, int] = Field(..., description="(|X|, |A|, |B|, |G|)")
    log_negativity: float = Field(..., ge=0.0, description="E_N across XA:B")
    slack: float = Field(..., description="log2|X| - E_N")
    start_value: float = Field(..., ge=0.0, description="E_N of the random starting isometry")
    optimized: bool = False
    iterations: int = Field(default=0, ge=0)
    theta: tuple[float, ...] = Field(default=(), description="Hermitian generator of the ascent, empty if none")

    @property
    def violation(self) -> bool:
        """Whether the slack lies below minus the violation threshold."""
        return self.slack < -get_settings().violation_tol


class HistogramBin(BaseModel):
    """Slack histogram bin ``[low, high)``."""

    model_config = ConfigDict(frozen=True)

    low: float
    high: float
    count: int = Field(..., ge=0)


class NoLockSummary(BaseModel):
    """Reduction of a campaign: minimum slack, its trial, histogram, violations and aborted trials."""

    model_config = ConfigDict(frozen=True)

    params: NoLockParams
    seed: int
    trials: int = Field(..., ge=0)
    start: int = Field(default=0, ge=0, description="Index of the first trial")
    min_slack: float | None = None
    argmin: TrialRecord | None = None
    histogram: list[HistogramBin] = Field(default_factory=list)
    violations: list[TrialRecord] = Field(default_factory=list)
    aborted: int = Field(default=0, ge=0, description="Trials stopped by a generator contract failure")

    def to_csv(self) -> str:
        """Histogram as CSV: ``low, high, count``."""
        rows = ["low,high,count"] + [f"{b.low!r},{b.high!r},{b.count}" for b in self.histogram]
        return "\n".join(rows) + "\n"


class ViolationCertificate(BaseModel):
    """Trial whose slack is negative, with the state file and the command that reproduces it."""

    model_config = ConfigDict(frozen=True)

    record: TrialRecord
    state_file: str
    command: str


def hermitian_from_params(theta: NDArray, d: int) -> NDArray[np.complex128]:
    """Hermitian ``d x d`` matrix from ``d^2`` reals: the diagonal, then real and imaginary upper parts."""
    iu = np.triu_indices(d, 1)
    n = len(iu[0])
    h = np.zeros((d, d), dtype=complex)
    h[np.diag_indices(d)] = theta[:d]
    h[iu] = theta[d : d + n] + 1j * theta[d + n : d + 2 * n]
    return h + np.triu(h, 1).conj().T


def gen_product_extension(
    rho_a: MultipartiteState,
    rho_b: MultipartiteState,
    dim_x: int,
    dim_g: int,
    seed: int | np.random.Generator = 0,
    isometry: NDArray | None = None,
) -> MultipartiteState:
    """
    Extension ``rho_XAB`` of ``rho_A (x) rho_B`` from an isometry ``W: P -> X (x) G`` on the purifier.

    :param MultipartiteState rho_a: State on ``A``
    :param MultipartiteState rho_b: State on ``B``
    :param int dim_x: Dimension of ``X``
    :param int dim_g: Dimension of the traced-out ``G``
    :param seed: Seed or generator of the Haar isometry
    :param NDArray isometry: Explicit ``(dim_x dim_g) x rank`` isometry matrix, replaces the Haar draw

    :return: Density state on ``X, A, B``
    :rtype: MultipartiteState
    :raises DimensionError: If ``dim_x * dim_g`` is below the rank of the product
    :raises GeneratorError: If the ``AB`` marginal is not the product within 1e-10
    """
    product = tensor_product(rho_a.as_density(), rho_b.as_density())
    psi = purify(product, "P")
    rank = psi.dim_of("P")
    if dim_x * dim_g < rank:
        raise DimensionError(f"|X||G| = {dim_x * dim_g} is below rank(rho_A (x) rho_B) = {rank}")
    if isometry is None:
        isometry = haar_unitary(dim_x * dim_g, seed)[:, :rank]
    w = Isometry.model_construct(
        in_dims=subsystems([("P", rank)]), out_dims=subsystems([("X", dim_x), ("G", dim_g)]), matrix=isometry
    )
    rho = permute(partial_trace(apply_isometry(psi, w), ("X",) + product.labels), ("X",) + product.labels)
    gap = float(np.max(np.abs(partial_trace(rho, product.labels).matrix - product.matrix)))
    if gap > MARGINAL_TOL:
        raise GeneratorError(f"AB marginal differs from the product by {gap:.3e}")
    return rho


def nolock_slack(state: MultipartiteState) -> tuple[float, float]:
    """
    Negativity across ``XA:B`` and the slack ``log2|X| - E_N`` of a state on ``X, A, B``.

    :param MultipartiteState state: State with subsystems ``X``, ``A`` and ``B``

    :return: ``(E_N, slack)``
    :rtype: tuple[float, float]
    """
    value = log_negativity(state, NOLOCK_CUT)
    return value, math.log2(state.dim_of("X")) - value


def _trial_inputs(params: NoLockParams, seed: int, index: int) -> tuple[MultipartiteState, MultipartiteState, NDArray]:
    """Random marginals and starting unitary of trial ``index``, drawn in a fixed order."""
    rng = stream(seed, index)
    rho_a = random_density([("A", params.dim_a)], seed=rng)
    rho_b = random_density([("B", params.dim_b)], seed=rng)
    return rho_a, rho_b, haar_unitary(params.dim_x * params.environment, rng)


def _rotated(start: NDArray, theta: NDArray, rank: int) -> NDArray:
    if not len(theta):
        return start[:, :rank]
    return expm(1j * hermitian_from_params(theta, start.shape[0])) @ start[:, :rank]


def trial_state(record: TrialRecord) -> MultipartiteState:
    """Rebuild the (possibly ascended) extension of a trial record."""
    dim_x, dim_a, dim_b, dim_g = record.dims
    params = NoLockParams(dim_x=dim_x, dim_a=dim_a, dim_b=dim_b, dim_g=dim_g)
    rho_a, rho_b, start = _trial_inputs(params, record.seed, record.index)
    rank = purify(tensor_product(rho_a, rho_b), "P").dim_of("P")
    return gen_product_extension(rho_a, rho_b, dim_x, dim_g, isometry=_rotated(start, np.array(record.theta), rank))


def nolock_trial(params: NoLockParams, seed: int, index: int = 0) -> TrialRecord:
    """
    Run one trial: draw random marginals and a Haar extension, optionally ascend, record the slack.

    :param NoLockParams params: Dimensions and options
    :param int seed: Master seed
    :param int index: Trial index

    :return: Record of the trial
    :rtype: TrialRecord
    :raises GeneratorError: If an extension breaks the product-marginal contract
    """
    rho_a, rho_b, start = _trial_inputs(params, seed, index)
    dim_x, _, _, dim_g = params.dims
    rank = purify(tensor_product(rho_a, rho_b), "P").dim_of("P")

    def negativity(theta: NDArray) -> float:
        rho = gen_product_extension(rho_a, rho_b, dim_x, dim_g, isometry=_rotated(start, theta, rank))
        return nolock_slack(rho)[0]

    start_value = negativity(np.zeros(0))
    value, theta, iterations = start_value, np.zeros(0), 0
    if params.optimize and dim_x > 1:
        d = start.shape[0]
        x0 = np.zeros(d * d)
        simplex = np.vstack([x0, x0 + 0.2 * np.eye(len(x0))])
        result = minimize(
            lambda t: -negativity(t),
            x0,
            method="Nelder-Mead",
            options={"maxiter": params.max_iters, "initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-12},
        )
        iterations = int(result.nit)
        if -result.fun > value:
            theta = result.x
            value = negativity(theta)
    record = TrialRecord(
        seed=seed,
        index=index,
        dims=params.dims,
        log_negativity=value,
        slack=math.log2(dim_x) - value,
        start_value=start_value,
        optimized=params.optimize,
        iterations=iterations,
        theta=tuple(float(t) for t in theta),
    )
    logger.debug(f"🎲 Trial {index}: E_N {value:.9f}, slack {record.slack:.9f}")
    return record


def _trial_job(offset: int, params: NoLockParams, seed: int, start: int) -> TrialRecord | None:
    index = start + offset
    try:
        return nolock_trial(params, seed, index)
    except GeneratorError as exc:
        logger.error(f"🧪❌ Trial {index} aborted, generator contract broken: {exc}")
        return None


def _histogram(slacks: list[float], bins: int = 20) -> list[HistogramBin]:
    if not slacks:
        return []
    counts, edges = np.histogram(slacks, bins=bins)
    return [HistogramBin(low=float(lo), high=float(hi), count=int(c)) for lo, hi, c in zip(edges[:-1], edges[1:], counts, strict=True)]


def nolock_search(
    params: NoLockParams, trials: int, seed: int | None = None, start: int = 0, pool: JobPool | None = None
) -> NoLockSummary:
    """
    Run ``trials`` independent trials and reduce them to a summary.

    Trial ``k`` uses the stream ``(seed, k)``, so the summary does not depend on the number of workers.

    :param NoLockParams params: Dimensions and options
    :param int trials: Number of trials
    :param int seed: Master seed, defaults to the settings seed
    :param int start: Index of the first trial
    :param JobPool pool: Worker pool, defaults to the settings width

    :return: Summary
    :rtype: NoLockSummary
    """
    seed = get_settings().seed if seed is None else seed
    pool = pool or JobPool()
    logger.info(f"🧪 No-locking campaign: {trials} trials, dims {params.dims}, optimize={params.optimize}")
    outcomes = pool.map(partial(_trial_job, params=params, seed=seed, start=start), trials)
    records = [record for record in outcomes if record is not None]
    argmin = min(records, key=lambda r: (r.slack, r.index), default=None)
    violations = [record for record in records if record.violation]
    for record in violations:
        logger.error(f"🚨 VIOLATION: trial {record.index} has slack {record.slack:.3e}")
    return NoLockSummary(
        params=params,
        seed=seed,
        trials=trials,
        start=start,
        min_slack=None if argmin is None else argmin.slack,
        argmin=argmin,
        histogram=_histogram([record.slack for record in records]),
        violations=violations,
        aborted=len(outcomes) - len(records),
    )


def reproduction_command(params: NoLockParams, record: TrialRecord) -> str:
    """Command line that re-runs exactly the trial of ``record``."""
    dims = ",".join(str(d) for d in record.dims)
    command = f"mutind nolock --dims {dims} --trials 1 --start-index {record.index} --seed {record.seed}"
    if params.optimize:
        command += f" --optimize --max-iters {params.max_iters}"
    return command + " --format json"


def write_violation_certificate(params: NoLockParams, record: TrialRecord, directory: Path) -> ViolationCertificate:
    """
    Write the state of a violating trial and its certificate into ``directory``.

    :param NoLockParams params: Campaign parameters
    :param TrialRecord record: Violating trial
    :param Path directory: Destination directory

    :return: Certificate, also saved as ``certificate_<seed>_<index>.json``
    :rtype: ViolationCertificate
    """
    directory = Path(directory)
    state_file = save_model(trial_state(record), directory / f"violation_{record.seed}_{record.index}.json")
    certificate = ViolationCertificate(record=record, state_file=str(state_file), command=reproduction_command(params, record))
    save_model(certificate, directory / f"certificate_{record.seed}_{record.index}.json")
    return certificate


def locking_control_state(d: int) -> MultipartiteState:
    """
    Planted control with a correlated ``AB`` marginal: a flag bit ``X`` selects ``Phi_d`` or ``(1 (x) F) Phi_d``.

    ``F`` is the discrete Fourier transform. Given ``X`` the state is maximally entangled, so
    ``E_N(XA:B) = log2 d`` and the slack is ``1 - log2 d``, negative for ``d > 2``.

    :param int d: Local dimension
    :return: Density state on ``X, A, B``
    :rtype: MultipartiteState
    """
    phi = maximally_entangled(d)
    fourier = dft(d, scale="sqrtn")
    twisted = MultipartiteState.trusted(np.kron(np.eye(d), fourier) @ phi.matrix, phi.dims, "pure-vector")
    flags = [MultipartiteState.trusted(np.eye(2, dtype=complex)[x], subsystems([("X", 2)]), "pure-vector") for x in range(2)]
    branches = [tensor_product(flag, branch).as_density() for flag, branch in zip(flags, (phi, twisted), strict=True)]
    return mixture([0.5, 0.5], branches)


class ControlResult(BaseModel):
    """Detector output on the planted locking control."""

    model_config = ConfigDict(frozen=True)

    d: int = Field(..., ge=2)
    log_negativity: float = Field(..., ge=0.0)
    slack: float
    violation: bool


def run_locking_control(d: int) -> ControlResult:
    """
    Feed the planted control to the slack detector; for ``d > 2`` it must be flagged.

    :param int d: Local dimension of the control
    :return: Negativity, slack and whether the detector flagged it
    :rtype: ControlResult
    """
    value, slack = nolock_slack(locking_control_state(d))
    violation = slack < -get_settings().violation_tol
    if violation:
        logger.error(f"🚨 VIOLATION on the locking control: E_N {value:.9f}, slack {slack:.9f}")
    return ControlResult(d=d, log_negativity=value, slack=slack, violation=violation)
