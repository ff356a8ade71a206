"""Test the process pool: ordering, inline mode and failure reporting."""
import pytest

from mutual_independence.common.errors import JobError
from mutual_independence.common.settings import reset_settings, use_settings
from mutual_independence.jobs.pool import JobPool


def _cube(index: int) -> int:
    return index**3


def _fail_on_five(index: int) -> int:
    if index == 5:
        raise RuntimeError("boom")
    return index


@pytest.mark.parametrize("jobs,chunk_size", [(1, 0), (2, 0), (3, 1), (4, 5)])
def test_results_are_in_job_order(jobs: int, chunk_size: int) -> None:
    """Results are ordered by job index whatever the width and chunking."""
    assert JobPool(jobs=jobs, chunk_size=chunk_size).map(_cube, 13) == [i**3 for i in range(13)]


def test_no_jobs() -> None:
    """An empty campaign returns an empty list."""
    assert JobPool(jobs=2).map(_cube, 0) == []


def test_failing_job_raises() -> None:
    """A failure in a worker surfaces as a JobError naming the chunk."""
    with pytest.raises(JobError, match="RuntimeError: boom"):
        JobPool(jobs=2, chunk_size=3).map(_fail_on_five, 9)


def test_inline_failure_propagates() -> None:
    """Inline mode raises the original exception."""
    with pytest.raises(RuntimeError, match="boom"):
        JobPool(jobs=1).map(_fail_on_five, 9)


def test_width_defaults_to_settings() -> None:
    """The pool width comes from the active settings."""
    try:
        use_settings(jobs=3)
        assert JobPool().jobs == 3
    finally:
        reset_settings()


def test_width_must_be_positive() -> None:
    """A pool needs at least one worker."""
    with pytest.raises(ValueError):
        JobPool(jobs=0)
