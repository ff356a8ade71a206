"""Constructors of states with exact mutual independence: pbits, pdits, ebits with junk, planted instances."""
from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import block_diag

from mutual_independence.common.errors import DimensionError
from mutual_independence.quantum.sampling import haar_unitary, random_density, random_pure, stream
from mutual_independence.quantum.state import (
    MultipartiteState,
    apply_unitary,
    ghz_state,
    ket,
    maximally_entangled,
    maximally_mixed,
    relabel,
    tensor_product,
)


KeyKind = Literal["ghz", "ebit"]


def key_state(d: int, key: KeyKind = "ghz") -> MultipartiteState:
    """
    Pure key state on ``A, B, C``.

    ``ghz`` is ``sum_i |iii> / sqrt(d)``: A and B hold perfectly correlated digits, C purifies them.
    ``ebit`` is the maximally entangled state on A, B with a trivial C.
    """
    if key == "ghz":
        return ghz_state(("A", "B", "C"), d)
    if key == "ebit":
        return tensor_product(maximally_entangled(d, ("A", "B")), ket((0,), [("C", 1)]))
    raise ValueError(f"unknown key kind {key!r}, expected 'ghz' or 'ebit'")


def controlled_twist(unitaries: Sequence[NDArray]) -> NDArray:
    """Block-diagonal ``sum_i |i><i| (x) U_i`` on ``C (x) D``, controlled by the key copy in C."""
    return block_diag(*unitaries)


def random_controlled_twist(d: int, d_d: int, seed: int | np.random.Generator) -> NDArray:
    """Controlled twist with Haar-random blocks ``U_i`` on D."""
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed)
    return controlled_twist([haar_unitary(d_d, rng) for _ in range(d)])


def make_pdit(
    d: int,
    twist: NDArray | None = None,
    noise: MultipartiteState | None = None,
    key: KeyKind = "ghz",
) -> MultipartiteState:
    """
    Private state ``(1 (x) T^dagger)(psi_ABC (x) rho_D)(1 (x) T)`` with shield ``A' = C``, ``B' = D``.

    :param int d: Key dimension
    :param NDArray twist: Unitary ``T`` on ``C (x) D``, identity by default
    :param MultipartiteState noise: Density ``rho_D`` on one subsystem, the maximally mixed qubit by default
    :param str key: ``ghz`` or ``ebit`` key state

    :return: Density state on ``A, B, A', B'``
    :rtype: MultipartiteState
    """
    if d < 2:
        raise DimensionError(f"key dimension must be at least 2, got {d}")
    rho_d = noise if noise is not None else maximally_mixed([("D", 2)])
    if len(rho_d.dims) != 1:
        raise DimensionError("the shield noise must live on a single subsystem")
    rho_d = relabel(rho_d.as_density(), {rho_d.labels[0]: "D"})
    state = tensor_product(key_state(d, key), rho_d)
    if twist is not None:
        state = apply_unitary(state, np.asarray(twist).conj().T, ("C", "D"))
    return relabel(state, {"C": "A'", "D": "B'"})


def make_pbit(
    twist: NDArray | None = None,
    noise: MultipartiteState | None = None,
    key: KeyKind = "ghz",
) -> MultipartiteState:
    """Two-level private state; see ``make_pdit``."""
    return make_pdit(2, twist=twist, noise=noise, key=key)


def ebit_with_junk(junk: MultipartiteState | None = None, seed: int = 0) -> MultipartiteState:
    """
    Maximally entangled qubits on ``A, B`` next to arbitrary junk on ``A', B'``.

    :param MultipartiteState junk: Two-subsystem density on the shield, random by default
    :param int seed: Seed of the random junk

    :return: Density state on ``A, B, A', B'``
    :rtype: MultipartiteState
    """
    if junk is None:
        junk = random_density([("A'", 2), ("B'", 2)], seed=seed)
    if len(junk.dims) != 2:
        raise DimensionError("junk must live on two subsystems")
    junk = relabel(junk.as_density(), dict(zip(junk.labels, ("A'", "B'"), strict=True)))
    return tensor_product(maximally_entangled(2, ("A", "B")).as_density(), junk)


def plant_exact_mi(
    da: int = 2,
    db: int = 2,
    dc: int = 2,
    dd: int = 2,
    seed: int | np.random.Generator = 0,
) -> MultipartiteState:
    """
    Random state with exact mutual independence: Haar shield unitary applied to ``psi_ABC (x) rho_D``.

    :param int da: Dimension of A
    :param int db: Dimension of B
    :param int dc: Dimension of the shield part A'
    :param int dd: Dimension of the shield part B'
    :param seed: Seed or generator

    :return: Density state on ``A, B, A', B'``
    :rtype: MultipartiteState
    """
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed)
    psi = random_pure([("A", da), ("B", db), ("C", dc)], rng)
    rho_d = random_density([("D", dd)], seed=rng)
    state = tensor_product(psi.as_density(), rho_d)
    state = apply_unitary(state, haar_unitary(dc * dd, rng), ("C", "D"))
    return relabel(state, {"C": "A'", "D": "B'"})
