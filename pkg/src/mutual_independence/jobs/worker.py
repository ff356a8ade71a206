"""Worker process running a chunk of independent deterministic jobs."""
from collections.abc import Callable
from multiprocessing.connection import Connection
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from mutual_independence.common.logger import logger


class WorkerProcess(BaseModel):
    """
    Worker process evaluating ``task(index)`` for every job index of its chunk.

    Lifecycle:
        - Spawned by the parent ``JobPool``
        - Runs its chunk of job indices in increasing order
        - Sends all results, or the first error, through a Pipe
        - Terminates immediately after computation
    """

    # Allow arbitrary types like multiprocessing.Connection
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    conn: Connection = Field(..., description="Connection object for sending results back to the pool")
    task: Callable[[int], Any] = Field(..., description="Picklable callable mapping a job index to its result")
    indices: tuple[int, ...] = Field(..., description="Job indices handled by this worker")
    chunk: int = Field(..., ge=0, description="Chunk number, used in logs and payloads")

    @field_validator("indices")
    @classmethod
    def indices_must_not_be_empty(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """Ensure that the chunk holds at least one job."""
        if not v:
            raise ValueError("A worker needs at least one job index")
        return v

    def run(self) -> None:
        """
        Run the task on each index and send ``{"chunk", "indices", "results"}`` or ``{"chunk", "indices", "error"}``.

        :return: None
        """
        logger.debug(f"👷🏁 Worker started on chunk {self.chunk}: jobs {self.indices[0]}..{self.indices[-1]}")
        try:
            results = [self.task(index) for index in self.indices]
            self.conn.send({"chunk": self.chunk, "indices": list(self.indices), "results": results})
            logger.debug(f"👷✅ Worker finished chunk {self.chunk}")
        except Exception as exc:
            logger.error(f"👷❌ Worker failed on chunk {self.chunk}: {type(exc).__name__}: {exc}")
            self.conn.send({"chunk": self.chunk, "indices": list(self.indices), "error": f"{type(exc).__name__}: {exc}"})
        finally:
            self.conn.close()
