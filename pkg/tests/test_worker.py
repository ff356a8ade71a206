"""Unit tests for WorkerProcess using real Pipe connections."""
from multiprocessing import Pipe

import pytest

from mutual_independence.jobs.worker import WorkerProcess


def _square(index: int) -> int:
    return index * index


def _fail_on_three(index: int) -> int:
    if index == 3:
        raise ValueError("job 3 is broken")
    return index


@pytest.mark.parametrize("indices", [(0,), (2, 3, 4), (7, 8)])
def test_worker_sends_results_for_its_chunk(indices: tuple[int, ...]) -> None:
    """Worker sends one result per job index, in index order."""
    parent_conn, child_conn = Pipe()
    worker = WorkerProcess(conn=child_conn, task=_square, indices=indices, chunk=1)
    worker.run()

    msg = parent_conn.recv()
    assert msg["chunk"] == 1
    assert msg["indices"] == list(indices)
    assert msg["results"] == [i * i for i in indices]
    assert "error" not in msg


def test_worker_sends_error_for_failing_job() -> None:
    """Worker reports the first failure of its chunk instead of results."""
    parent_conn, child_conn = Pipe()
    worker = WorkerProcess(conn=child_conn, task=_fail_on_three, indices=(2, 3, 4), chunk=0)
    worker.run()

    msg = parent_conn.recv()
    assert msg["indices"] == [2, 3, 4]
    assert "results" not in msg
    assert msg["error"] == "ValueError: job 3 is broken"


def test_worker_rejects_empty_chunk() -> None:
    """Pydantic validation prevents creating a WorkerProcess without jobs."""
    _, child_conn = Pipe()
    with pytest.raises(ValueError):
        WorkerProcess(conn=child_conn, task=_square, indices=(), chunk=0)
