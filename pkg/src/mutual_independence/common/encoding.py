"""Row-major ``[[re, im], ...]`` encoding of complex arrays used by every file format."""
from typing import Any

import numpy as np
from numpy.typing import NDArray

from mutual_independence.common.errors import InvariantViolation


def encode_complex(array: NDArray[np.complexfloating]) -> list[list[float]]:
    """
    Flatten a complex array row-major into ``[re, im]`` pairs.

    :param NDArray array: Complex array of any shape

    :return: List of ``[re, im]`` pairs
    :rtype: list[list[float]]
    """
    flat = np.asarray(array, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def decode_complex(data: Any, shape: tuple[int, ...], field: str = "matrix") -> NDArray[np.complex128]:
    """
    Rebuild a complex array from ``[re, im]`` pairs (or plain reals, or nested rows).

    :param data: Encoded entries
    :param tuple shape: Target shape
    :param str field: Field name used in diagnostics

    :return: Complex array of the requested shape
    :rtype: NDArray[np.complex128]
    :raises InvariantViolation: If the entries are malformed or do not fill ``shape``
    """
    if isinstance(data, np.ndarray):
        array = np.asarray(data, dtype=complex)
        if array.size != int(np.prod(shape)):
            raise InvariantViolation("dimensions", f"{field} has {array.size} entries, expected shape {shape}")
        return array.reshape(shape)
    entries = np.asarray(data, dtype=float)
    if entries.ndim >= 1 and entries.shape[-1] == 2 and entries.size == 2 * int(np.prod(shape)):
        values = entries[..., 0] + 1j * entries[..., 1]
    elif entries.size == int(np.prod(shape)):
        values = entries.astype(complex)
    else:
        raise InvariantViolation(
            "dimensions", f"{field} has {entries.size} numbers, which cannot fill shape {shape} as [re, im] pairs"
        )
    return values.reshape(shape)
