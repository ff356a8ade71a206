"""Classical mutual-independence rates, the local-Eve distribution and a local hashing simulation."""
from functools import partial
import math

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import hadamard

from mutual_independence.classical.distribution import JointDistribution, classical_mi, conditional_entropy
from mutual_independence.common.errors import DimensionError, InvariantViolation, PreconditionError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.jobs.pool import JobPool
from mutual_independence.quantum.sampling import stream


INDEPENDENCE_TOL = 1e-9
MAX_HASH_BITS = 16


class MindepRate(BaseModel):
    """Single-letter mutual independence of local randomized functions ``F(X)`` and ``G(Y)``."""

    model_config = ConfigDict(frozen=True)

    mi_fg: float = Field(..., description="I(F:G)")
    residual: float = Field(..., description="I(FG:Z)")
    rate: float | None = Field(default=None, description="I(F:G) when FG is independent of Z, else None")
    protocol_bound: float = Field(..., ge=0.0, description="max(0, I(X:Y) - I(X:Z) - I(Y:Z))")


class FunctionTables(BaseModel):
    """Stochastic tables ``F[x][f] = P(f | x)`` and ``G[y][g] = P(g | y)`` of local randomized functions."""

    model_config = ConfigDict(frozen=True)

    F: list[list[float]] = Field(..., min_length=1)
    G: list[list[float]] = Field(..., min_length=1)


class HashSimResult(BaseModel):
    """Monte-Carlo estimate of the distance of the hashed outputs and ``Z^n`` from a product."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    out_bits: int = Field(..., ge=0, description="Hash output bits of each party")
    trials: int = Field(..., ge=1)
    shared_hash: bool
    distance: float = Field(..., ge=0.0, description="Mean total-variation distance from the product")
    standard_error: float = Field(..., ge=0.0)
    rate: float = Field(..., ge=0.0, description="out_bits / n")


def _apply_map(table: NDArray, size: int, name: str) -> NDArray[np.float64]:
    """Validate a stochastic table ``T[x, f] = P(f | x)``."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] != size:
        raise InvariantViolation("dimensions", f"{name} must have {size} rows, got shape {table.shape}")
    if np.any(table < 0) or np.any(np.abs(table.sum(axis=1) - 1.0) > 1e-12):
        raise InvariantViolation("stochastic", f"rows of {name} must be probability vectors")
    return table


def _xyz(dist: JointDistribution, x: str, y: str, z: tuple[str, ...]) -> NDArray[np.float64]:
    """``P(x, y, z)`` with the side variables flattened into one axis."""
    sizes = [dist.alphabets[i].size for i in dist.axes((x, y))]
    return dist.marginal((x, y) + z).probs.reshape(sizes[0], sizes[1], -1)


def _side(dist: JointDistribution, x: str, y: str) -> tuple[str, ...]:
    return tuple(l for l in dist.labels if l not in (x, y))


def classical_mindep_rate(
    dist: JointDistribution, f_table: NDArray, g_table: NDArray, x: str = "X", y: str = "Y"
) -> MindepRate:
    """
    Correlation ``I(F:G)`` of local randomized functions and their independence residual ``I(FG:Z)``.

    The rate is reported only when the residual is at most 1e-9. The protocol bound of local privacy
    amplification on the raw symbols, ``max(0, I(X:Y) - I(X:Z) - I(Y:Z))``, is always reported.

    :param JointDistribution dist: Distribution of ``X``, ``Y`` and the side information
    :param NDArray f_table: ``P(f | x)``, one row per symbol of ``X``
    :param NDArray g_table: ``P(g | y)``, one row per symbol of ``Y``
    :param str x: Alice's variable
    :param str y: Bob's variable

    :return: Rate, residual and protocol bound
    :rtype: MindepRate
    """
    z = _side(dist, x, y)
    pxyz = _xyz(dist, x, y, z)
    f_table = _apply_map(f_table, pxyz.shape[0], "F")
    g_table = _apply_map(g_table, pxyz.shape[1], "G")
    pfgz = np.einsum("xyz,xf,yg->fgz", pxyz, f_table, g_table)
    fgz = JointDistribution.from_array(pfgz, ("F", "G", "Z"))
    mi_fg = classical_mi(fgz, "F", "G")
    residual = classical_mi(fgz, ("F", "G"), "Z")
    xyz = JointDistribution.from_array(pxyz, ("X", "Y", "Z"))
    bound = classical_mi(xyz, "X", "Y") - classical_mi(xyz, "X", "Z") - classical_mi(xyz, "Y", "Z")
    rate = mi_fg if residual <= INDEPENDENCE_TOL else None
    return MindepRate(mi_fg=mi_fg, residual=residual, rate=rate, protocol_bound=max(0.0, bound))


def shared_key_rate(dist: JointDistribution, f_table: NDArray, g_table: NDArray | None = None, x: str = "X", y: str = "Y") -> float:
    """
    Rate ``H(F|Z)`` of identical local hashing when deterministic ``F(X)`` and ``G(Y)`` agree almost surely.

    :param JointDistribution dist: Distribution
    :param NDArray f_table: Deterministic table of ``F``
    :param NDArray g_table: Deterministic table of ``G``, defaults to ``f_table``
    :param str x: Alice's variable
    :param str y: Bob's variable

    :return: ``H(F|Z)`` in bits
    :rtype: float
    :raises PreconditionError: If the functions are not deterministic or disagree with positive probability
    """
    z = _side(dist, x, y)
    pxyz = _xyz(dist, x, y, z)
    f_table = _apply_map(f_table, pxyz.shape[0], "F")
    g_table = _apply_map(f_table if g_table is None else g_table, pxyz.shape[1], "G")
    if not (np.isin(f_table, (0.0, 1.0)).all() and np.isin(g_table, (0.0, 1.0)).all()):
        raise PreconditionError("shared key rate needs deterministic functions")
    f_of, g_of = f_table.argmax(axis=1), g_table.argmax(axis=1)
    disagree = float(pxyz[f_of[:, None] != g_of[None, :]].sum())
    if disagree > INDEPENDENCE_TOL:
        raise PreconditionError(f"F(X) and G(Y) disagree with probability {disagree:.3e}")
    pfz = np.einsum("xyz,xf->fz", pxyz, f_table)
    return conditional_entropy(JointDistribution.from_array(pfz, ("F", "Z")), "F", "Z")


def local_eve_distribution(p_matrix: NDArray, p: float, d: int) -> JointDistribution:
    """
    ``P(i, j, e1, e2) = p_ij tau_i(e1) tau_j(e2)`` with ``tau_i = (1 - p) 1/d + p delta_i``.

    Eve's information is the output of two local channels, one on each party's symbol.

    :param NDArray p_matrix: ``d x d`` joint distribution of Alice's and Bob's symbols
    :param float p: Copy fidelity in ``[0, 1]``
    :param int d: Alphabet size

    :return: Distribution on ``A, B, E1, E2``
    :rtype: JointDistribution
    """
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"copy fidelity must lie in [0, 1], got {p!r}")
    p_matrix = np.asarray(p_matrix, dtype=float)
    if p_matrix.shape != (d, d):
        raise DimensionError(f"p_matrix must be {d}x{d}, got {p_matrix.shape}")
    tau = (1 - p) / d + p * np.eye(d)
    probs = np.einsum("ij,ie,jf->ijef", p_matrix, tau, tau)
    return JointDistribution.from_array(probs, ("A", "B", "E1", "E2"))


def _signs(bits: int, size: int) -> NDArray[np.float64]:
    """``S[a, x] = (-1)^{popcount(a & x)}`` for ``bits``-bit masks ``a`` and symbols ``x``."""
    masks = np.arange(2**bits)[:, None] & np.arange(size)[None, :]
    parity = np.array([[bin(m).count("1") % 2 for m in row] for row in masks])
    return 1.0 - 2.0 * parity


def _mask_indices(matrix: NDArray, out_bits: int, n: int, bits: int) -> NDArray[np.int64]:
    """Per-position symbol masks of ``u^T M`` for every output mask ``u``, shape ``(2^out_bits, n)``."""
    u = (np.arange(2**out_bits)[:, None] >> np.arange(out_bits)[None, :]) & 1
    rows = (u @ matrix) % 2
    return (rows.reshape(2**out_bits, n, bits) << np.arange(bits)).sum(axis=2)


def _hashed_distribution(characters: list[NDArray], idx_x: NDArray, idx_y: NDArray, out_bits: int) -> NDArray:
    """Exact distribution of both hash outputs from per-position characteristic tables."""
    fourier = np.ones((2**out_bits, 2**out_bits))
    for t, chi in enumerate(characters):
        fourier *= chi[idx_x[:, t][:, None], idx_y[:, t][None, :]]
    h = hadamard(2**out_bits)
    return h @ fourier @ h / 4**out_bits


def _hash_trial(index: int, pxyz: NDArray, n: int, out_bits: int, shared: bool, seed: int) -> float:
    rng = stream(seed, index)
    size_x, size_y, size_z = pxyz.shape
    bits_x, bits_y = max(1, math.ceil(math.log2(size_x))), max(1, math.ceil(math.log2(size_y)))
    m_x = rng.integers(0, 2, (out_bits, n * bits_x))
    m_y = m_x if shared and bits_x == bits_y else rng.integers(0, 2, (out_bits, n * bits_y))
    p_z = pxyz.sum(axis=(0, 1))
    z = rng.choice(size_z, size=n, p=p_z / p_z.sum())

    s_x, s_y = _signs(bits_x, size_x), _signs(bits_y, size_y)
    conditional = pxyz / np.where(p_z > 0, p_z, 1.0)
    by_z = [s_x @ conditional[:, :, k] @ s_y.T for k in range(size_z)]
    unconditional = s_x @ pxyz.sum(axis=2) @ s_y.T
    idx_x, idx_y = _mask_indices(m_x, out_bits, n, bits_x), _mask_indices(m_y, out_bits, n, bits_y)
    given_z = _hashed_distribution([by_z[k] for k in z], idx_x, idx_y, out_bits)
    marginal = _hashed_distribution([unconditional] * n, idx_x, idx_y, out_bits)
    return 0.5 * float(np.abs(given_z - marginal).sum())


def hash_sim(
    dist: JointDistribution,
    n: int,
    out_bits: int,
    trials: int = 100_000,
    seed: int | None = None,
    x: str = "X",
    y: str = "Y",
    shared_hash: bool = True,
    pool: JobPool | None = None,
) -> HashSimResult:
    """
    Local privacy amplification of ``n`` i.i.d. copies with random binary-matrix hashes.

    Each trial draws fresh hash matrices from the 2-universal family of uniform binary matrices
    (the same matrix for both parties when ``shared_hash`` and the alphabets match) and a sample
    ``z^n``; the distribution of the hash outputs given ``z^n`` and their marginal are computed
    exactly through Walsh-Hadamard transforms of per-position characters. The reported distance is
    the mean over trials of ``TV(P(h | z^n), P(h))``.

    :param JointDistribution dist: Distribution of ``X``, ``Y`` and the side information
    :param int n: Block length
    :param int out_bits: Output bits of each hash
    :param int trials: Monte-Carlo trials
    :param int seed: Master seed, defaults to the settings seed
    :param str x: Alice's variable
    :param str y: Bob's variable
    :param bool shared_hash: Use the same hash matrix on both sides
    :param JobPool pool: Worker pool

    :return: Mean distance, its standard error and the rate
    :rtype: HashSimResult
    :raises DimensionError: If ``out_bits`` exceeds ``n log2 |X|`` or the output space is too large
    """
    seed = get_settings().seed if seed is None else seed
    pxyz = _xyz(dist, x, y, _side(dist, x, y))
    if n < 1 or trials < 1:
        raise DimensionError(f"n and trials must be positive, got n={n}, trials={trials}")
    if out_bits > n * math.log2(pxyz.shape[0]):
        raise DimensionError(f"out_bits {out_bits} exceeds n log2|X| = {n * math.log2(pxyz.shape[0]):.3f}")
    if 2 * out_bits > MAX_HASH_BITS:
        raise DimensionError(f"2 * out_bits = {2 * out_bits} exceeds {MAX_HASH_BITS} output bits")
    logger.info(f"🎲 Hashing simulation: n={n}, out_bits={out_bits}, {trials} trials")
    pool = pool or JobPool()
    distances = np.array(
        pool.map(partial(_hash_trial, pxyz=pxyz, n=n, out_bits=out_bits, shared=shared_hash, seed=seed), trials)
    )
    error = float(distances.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return HashSimResult(
        n=n,
        out_bits=out_bits,
        trials=trials,
        shared_hash=shared_hash,
        distance=float(distances.mean()),
        standard_error=error,
        rate=out_bits / n,
    )
