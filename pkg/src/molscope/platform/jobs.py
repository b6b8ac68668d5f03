"""In-memory background job store for optimization runs.

Each job's trajectory is append-only and guarded by one lock, so a snapshot
taken mid-run is always a prefix of the final trajectory, never a torn step.
The seed entry is computed synchronously at submit time, which guarantees a
poll issued immediately after submit already sees trajectory length >= 1.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from molscope.flow import FlowModel
from molscope.molgraph import MolecularGraph
from molscope.optimize import OptimizeSpec, TrajectoryEntry, optimize

__all__ = ["JobSnapshot", "JobStore", "UnknownJobError"]

_STATES = ("queued", "running", "done", "failed")


class UnknownJobError(KeyError):
    pass


@dataclass(frozen=True)
class JobSnapshot:
    job_id: str
    state: str
    spec: OptimizeSpec
    entries: tuple[TrajectoryEntry, ...]
    error: str | None


class _Job:
    def __init__(self, job_id: str, spec: OptimizeSpec):
        self.job_id = job_id
        self.spec = spec
        self.state = "queued"
        self.entries: tuple[TrajectoryEntry, ...] = ()
        self.error: str | None = None
        self.lock = threading.Lock()

    def snapshot(self) -> JobSnapshot:
        with self.lock:
            return JobSnapshot(self.job_id, self.state, self.spec, self.entries, self.error)

    def advance(self, state: str) -> None:
        with self.lock:
            # states only move forward
            if _STATES.index(state) > _STATES.index(self.state):
                self.state = state

    def append(self, entry: TrajectoryEntry) -> None:
        with self.lock:
            self.entries = self.entries + (entry,)


class JobStore:
    def __init__(self, max_workers: int = 4):
        self._pool = ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="optjob")
        self._jobs: dict[str, _Job] = {}
        self._lock = threading.Lock()

    def submit(self, model: FlowModel, seed_graph: MolecularGraph, spec: OptimizeSpec) -> str:
        from molscope.chem import property_score
        from molscope.latent import reconstruct

        job_id = uuid.uuid4().hex
        job = _Job(job_id, spec)
        cell0 = reconstruct(model, seed_graph)
        score0 = property_score(cell0.molecule, spec.property_name).value
        job.entries = (TrajectoryEntry(0, cell0, score0, True),)
        with self._lock:
            self._jobs[job_id] = job

        def run() -> None:
            job.advance("running")
            try:
                optimize(
                    model,
                    seed_graph,
                    spec,
                    on_step=lambda e: job.append(e) if e.step_index > 0 else None,
                )
            except Exception as exc:
                with job.lock:
                    job.error = f"{type(exc).__name__}: {exc}"
                job.advance("failed")
                return
            job.advance("done")

        self._pool.submit(run)
        return job_id

    def snapshot(self, job_id: str) -> JobSnapshot:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise UnknownJobError(job_id)
        return job.snapshot()

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)
