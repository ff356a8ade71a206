"""Bounded pool of worker processes returning results in canonical job order."""
from collections.abc import Callable
from multiprocessing import Pipe, Process, cpu_count
from multiprocessing.connection import Connection, wait
from typing import Any

from pydantic import BaseModel, ConfigDict, Field

from mutual_independence.common.errors import JobError
from mutual_independence.common.logger import logger
from mutual_independence.common.settings import get_settings
from mutual_independence.jobs.worker import WorkerProcess


class JobPool(BaseModel):
    """
    Runs ``count`` independent jobs ``task(0) ... task(count - 1)`` on at most ``jobs`` processes.

    Features:
        - ``jobs == 1`` runs inline, in the calling process.
        - Jobs are grouped in chunks, one worker process per chunk, never more than ``jobs`` alive.
        - Results are collected as soon as a worker's pipe is readable and reordered by job index,
          so the output never depends on scheduling.
    """

    model_config = ConfigDict(frozen=True)

    jobs: int = Field(default_factory=lambda: get_settings().jobs, ge=1, description="Maximum worker processes")
    chunk_size: int = Field(default=0, ge=0, description="Jobs per worker, 0 picks four chunks per worker")

    def _chunks(self, count: int, width: int) -> list[tuple[int, ...]]:
        size = self.chunk_size or max(1, -(-count // (4 * width)))
        return [tuple(range(start, min(start + size, count))) for start in range(0, count, size)]

    def _spawn_worker(self, task: Callable[[int], Any], indices: tuple[int, ...], chunk: int) -> tuple[Process, Connection]:
        """
        Spawn a WorkerProcess for a chunk and return the process and the parent end of its pipe.

        :param Callable task: Job function
        :param tuple indices: Job indices of the chunk
        :param int chunk: Chunk number

        :return: Tuple of (Process, parent connection)
        :rtype: tuple[Process, Connection]
        """
        parent_conn, child_conn = Pipe(duplex=False)
        worker = WorkerProcess(conn=child_conn, task=task, indices=indices, chunk=chunk)
        process = Process(target=worker.run)
        process.start()
        child_conn.close()
        return process, parent_conn

    def _collect_finished_workers(
        self, active_workers: list[tuple[Process, Connection]], results: list[Any]
    ) -> None:
        """
        Block until at least one worker has sent its payload, then store the payloads of all ready workers.

        :param list active_workers: List of tuples (Process, Connection), finished ones are removed
        :param list results: Result slots indexed by job index
        :raises JobError: If a worker reported an error or died without a payload
        """
        ready = wait([conn for _, conn in active_workers])
        for i in reversed(range(len(active_workers))):
            proc, conn = active_workers[i]
            if conn not in ready:
                continue
            try:
                payload = conn.recv()
            except EOFError as exc:
                raise JobError(f"worker {proc.pid} exited without sending results") from exc
            finally:
                conn.close()
                proc.join()
                active_workers.pop(i)
            if "error" in payload:
                raise JobError(f"chunk {payload['chunk']} failed: {payload['error']}")
            for index, value in zip(payload["indices"], payload["results"], strict=True):
                results[index] = value

    def map(self, task: Callable[[int], Any], count: int) -> list[Any]:
        """
        Evaluate ``task`` on every job index and return the results ordered by index.

        :param Callable task: Picklable function of the job index
        :param int count: Number of jobs

        :return: ``[task(0), ..., task(count - 1)]``
        :rtype: list
        """
        if count <= 0:
            return []
        if self.jobs == 1 or count == 1:
            return [task(index) for index in range(count)]

        max_workers = min(self.jobs, cpu_count(), count)
        chunks = self._chunks(count, max_workers)
        logger.info(f"👷 Running {count} jobs in {len(chunks)} chunks on {max_workers} workers")
        results: list[Any] = [None] * count
        active_workers: list[tuple[Process, Connection]] = []
        try:
            for chunk, indices in enumerate(chunks):
                # Wait until a worker slot is available
                while len(active_workers) >= max_workers:
                    self._collect_finished_workers(active_workers, results)
                active_workers.append(self._spawn_worker(task, indices, chunk))
            while active_workers:
                self._collect_finished_workers(active_workers, results)
        finally:
            for proc, conn in active_workers:
                proc.terminate()
                proc.join()
                conn.close()
        return results
