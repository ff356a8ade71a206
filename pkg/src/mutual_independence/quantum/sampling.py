"""Seeded Haar sampling: unitaries, isometries and random density matrices."""
from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from mutual_independence.common.errors import DimensionError
from mutual_independence.quantum.state import Isometry, MultipartiteState, Subsystem, subsystems


def stream(seed: int, *index: int) -> np.random.Generator:
    """
    Random generator of the stream ``(seed, *index)``.

    Streams are split with ``SeedSequence(seed, spawn_key=index)``: job ``k`` of a campaign uses
    ``stream(seed, k)`` whichever worker runs it, so results do not depend on the parallel width.

    :param int seed: Master seed (64-bit unsigned)
    :param int index: Path of the sub-stream

    :return: Independent generator
    :rtype: numpy.random.Generator
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(index)))


def _rng(seed: int | np.random.Generator) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else stream(seed)


def ginibre(rows: int, cols: int, seed: int | np.random.Generator) -> NDArray[np.complex128]:
    """Matrix of i.i.d. standard complex Gaussian entries."""
    rng = _rng(seed)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(dim: int, seed: int | np.random.Generator) -> NDArray[np.complex128]:
    """
    Haar-distributed unitary from the QR decomposition of a Ginibre matrix.

    Columns are rephased so that the diagonal of ``R`` is positive, which makes the law exactly Haar.

    :param int dim: Dimension
    :param seed: Seed or generator

    :return: Unitary matrix
    :rtype: NDArray[np.complex128]
    """
    if dim < 1:
        raise DimensionError(f"unitary dimension must be positive, got {dim}")
    q, r = np.linalg.qr(ginibre(dim, dim, seed))
    diagonal = np.diagonal(r)
    return q * (diagonal / np.abs(diagonal))


def haar_isometry(
    din: int | Sequence[Subsystem | tuple[str, int]],
    dout: int | Sequence[Subsystem | tuple[str, int]],
    seed: int | np.random.Generator,
) -> Isometry:
    """
    Haar-random isometry: the first ``din`` columns of a Haar unitary on the output space.

    :param din: Input dimension (labeled ``in``) or input subsystems
    :param dout: Output dimension (labeled ``out``) or output subsystems
    :param seed: Seed or generator

    :return: Isometry
    :rtype: Isometry
    """
    in_dims = subsystems([("in", din)]) if isinstance(din, int) else subsystems(din)
    out_dims = subsystems([("out", dout)]) if isinstance(dout, int) else subsystems(dout)
    d_in = int(np.prod([s.dim for s in in_dims]))
    d_out = int(np.prod([s.dim for s in out_dims]))
    if d_in > d_out:
        raise DimensionError(f"isometry needs din <= dout, got {d_in} > {d_out}")
    return Isometry(in_dims=in_dims, out_dims=out_dims, matrix=haar_unitary(d_out, seed)[:, :d_in])


def random_density(
    dims: int | Sequence[Subsystem | tuple[str, int]],
    rank: int | None = None,
    seed: int | np.random.Generator = 0,
) -> MultipartiteState:
    """
    Random density matrix: the reduction of a Haar-random pure state on ``dim x rank``.

    :param dims: Dimension (labeled ``A``) or subsystems
    :param int rank: Rank, defaults to full rank
    :param seed: Seed or generator

    :return: Density state of the requested rank
    :rtype: MultipartiteState
    """
    dims = subsystems([("A", dims)]) if isinstance(dims, int) else subsystems(dims)
    dim = int(np.prod([s.dim for s in dims]))
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise DimensionError(f"rank must lie in [1, {dim}], got {rank}")
    g = ginibre(dim, rank, seed)
    rho = g @ g.conj().T
    return MultipartiteState.trusted(rho / np.trace(rho).real, dims)


def random_pure(dims: Sequence[Subsystem | tuple[str, int]], seed: int | np.random.Generator) -> MultipartiteState:
    """Haar-random pure state on ``dims``."""
    dims = subsystems(dims)
    vector = ginibre(int(np.prod([s.dim for s in dims])), 1, seed).reshape(-1)
    return MultipartiteState.trusted(vector / np.linalg.norm(vector), dims, "pure-vector")
