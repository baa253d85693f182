import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, TypeVar

from .. import config
from ..errors import ReplicateFailure

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ReplicateRunner:
    """Runs independent Monte Carlo replicates in a thread pool."""

    def __init__(self, seed: int, max_workers: Optional[int] = None):
        """
        Initialize the replicate runner.

        Args:
            seed: Base seed; replicate i draws from stream addresses (seed, i, .).
            max_workers: Maximum number of parallel workers (default VARHEAT_THREADS).
        """
        self.seed = seed
        self.max_workers = max_workers if max_workers is not None else config.worker_count()

    def run_replicate(self, task: Callable[[int, int], T], index: int) -> T:
        """
        Run a single replicate.

        Raises:
            ReplicateFailure: the task raised; carries index and seed.
        """
        try:
            return task(self.seed, index)
        except Exception as e:
            logger.error(f"❌ Replicate {index} (seed={self.seed}) failed: {e}")
            raise ReplicateFailure(index, self.seed, e) from e

    def run(self, task: Callable[[int, int], T], replicates: int, label: str = "replicates") -> List[T]:
        """
        Run replicates 0..replicates-1 and return their results ordered by index.

        Results are placed by replicate index, so serial and parallel runs
        produce identical lists.

        Args:
            task: Callable (seed, replicate_index) -> result. Must not share
                mutable state across calls.
            replicates: Number of replicates.
            label: Name used in log messages.
        """
        if replicates < 1:
            return []
        results: List[Optional[T]] = [None] * replicates
        if self.max_workers <= 1:
            for i in range(replicates):
                results[i] = self.run_replicate(task, i)
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                future_to_index = {executor.submit(self.run_replicate, task, i): i for i in range(replicates)}
                first_failure: Optional[ReplicateFailure] = None
                for future in future_to_index:
                    index = future_to_index[future]
                    try:
                        results[index] = future.result()
                    except ReplicateFailure as failure:
                        if first_failure is None or failure.replicate_index < first_failure.replicate_index:
                            first_failure = failure
                if first_failure is not None:
                    raise first_failure
        logger.debug(f"{label}: {replicates} done with {self.max_workers} worker(s)")
        return results
