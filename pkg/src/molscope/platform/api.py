"""HTTP/JSON API over an immutable (model, dataset) pair.

Every handler is a pure function of the request body plus the model and the
seeds the body declares, so identical requests give byte-identical bodies;
the only exceptions are job ids and job polling, which are stateful by
nature. Errors always serialize as {"error": <machine tag>, "detail":
<human text>}; malformed chemistry or latent input is a 400, unknown
resources are 404, and anything unexpected is a 500 carrying an error id
that also goes to the server log.
"""

from __future__ import annotations

import logging
import uuid
from pathlib import Path
from typing import Any

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from molscope import chem, geometry
from molscope.flow import FlowModel, decode, encode
from molscope.latent import ExplorationCell, GridSpec, interpolate, neighborhood_grid, reconstruct
from molscope.molgraph import (
    MolecularGraph,
    SmilesError,
    from_tensors,
    is_valid,
    parse_smiles,
    to_smiles,
    to_tensors,
    validity_correct,
)
from molscope.optimize import OptimizeSpec, TrajectoryEntry
from molscope.platform.dataset import DatasetEntry
from molscope.platform.jobs import JobStore, UnknownJobError

__all__ = ["ApiError", "create_app"]

log = logging.getLogger("molscope.api")


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


class RenderRequest(BaseModel):
    smiles: str


class EncodeRequest(BaseModel):
    smiles: str


class DecodeRequest(BaseModel):
    z: list[float]


class GridRequest(BaseModel):
    smiles: str
    steps: int = 5
    delta: float = 0.5
    seed: int = 0


class InterpolateRequest(BaseModel):
    from_smiles: str = Field(alias="from")
    to_smiles: str = Field(alias="to")
    steps: int = 7


class OptimizeRequest(BaseModel):
    smiles: str
    property: str = "mol_weight"
    maximize: bool = True
    steps: int = 20
    step_size: float = 0.4
    sim_min: float = 0.3
    proposals_per_step: int = 16
    seed: int = 0


def _parse(smiles: str, n_max: int) -> MolecularGraph:
    try:
        graph = parse_smiles(smiles)
    except SmilesError as exc:
        raise ApiError(400, "smiles_error", str(exc)) from exc
    if graph.n_atoms > n_max:
        raise ApiError(400, "too_many_atoms", f"{graph.n_atoms} atoms exceeds n_max={n_max}")
    return graph


def _cell_json(cell: ExplorationCell) -> dict[str, Any]:
    return {
        "smiles": cell.smiles,
        "similarity": cell.similarity,
        "corrected": cell.corrected,
        "position": list(cell.position),
        "z": [float(v) for v in cell.z.z],
        "svg": _depiction(cell.molecule),
    }


def _depiction(graph: MolecularGraph) -> str | None:
    if graph.n_atoms == 0:
        return None
    return geometry.render_svg(graph, geometry.layout_2d(graph))


def _entry_json(entry: TrajectoryEntry) -> dict[str, Any]:
    return {
        "step_index": entry.step_index,
        "score": entry.score,
        "accepted": entry.accepted,
        "smiles": entry.cell.smiles,
        "similarity": entry.cell.similarity,
        "corrected": entry.cell.corrected,
        "svg": _depiction(entry.cell.molecule),
    }


def create_app(
    model: FlowModel,
    dataset: list[DatasetEntry],
    model_version: str = "identity-0",
    frontend_dir: str | Path | None = None,
    job_workers: int = 4,
) -> FastAPI:
    app = FastAPI(title="molscope", docs_url=None, redoc_url=None)
    jobs = JobStore(max_workers=job_workers)
    n_max = model.config.n_max
    app.state.jobs = jobs

    @app.exception_handler(ApiError)
    async def on_api_error(_: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=exc.status, content={"error": exc.error, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": "bad_request", "detail": str(exc)})

    @app.exception_handler(Exception)
    async def on_internal_error(_: Request, exc: Exception) -> JSONResponse:
        error_id = uuid.uuid4().hex[:12]
        log.exception("internal error %s", error_id)
        return JSONResponse(
            status_code=500,
            content={"error": "internal", "detail": f"internal error id {error_id}"},
        )

    @app.get("/api/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "model_version": model_version,
            "latent_dim": model.config.latent_dim,
            "n_max": n_max,
            "properties": list(chem.PROPERTY_NAMES),
        }

    @app.get("/api/dataset")
    def dataset_listing() -> dict[str, Any]:
        return {
            "entries": [
                {"id": e.id, "name": e.name, "smiles": e.smiles, "atoms": e.graph.n_atoms}
                for e in dataset
            ]
        }

    @app.post("/api/render")
    def render(req: RenderRequest) -> dict[str, Any]:
        graph = _parse(req.smiles, n_max)
        layout = geometry.layout_2d(graph)
        coords = geometry.embed_3d(graph)
        return {
            "svg": geometry.render_svg(graph, layout),
            "xyz": geometry.to_xyz(graph, coords, comment=req.smiles),
            "atoms": [{"index": i, "symbol": el.symbol} for i, el in enumerate(graph.atoms)],
            "bonds": [{"i": b.i, "j": b.j, "order": b.order} for b in sorted(graph.bonds)],
            "coords3d": [[float(v) for v in row] for row in coords],
            "properties": {
                name: chem.property_score(graph, name).value for name in chem.PROPERTY_NAMES
            },
        }

    @app.post("/api/encode")
    def encode_endpoint(req: EncodeRequest) -> dict[str, Any]:
        graph = _parse(req.smiles, n_max)
        z, _ = encode(model, to_tensors(graph, n_max), deterministic=True)
        cell = reconstruct(model, graph)
        return {
            "z": [float(v) for v in z.z],
            "reconstructed_smiles": cell.smiles,
            "similarity": cell.similarity,
        }

    @app.post("/api/decode")
    def decode_endpoint(req: DecodeRequest) -> dict[str, Any]:
        expected = model.config.latent_dim
        if len(req.z) != expected:
            raise ApiError(
                400,
                "bad_latent_dimension",
                f"latent vector has {len(req.z)} entries, model expects {expected}",
            )
        z = np.asarray(req.z, dtype=np.float64)
        if not np.all(np.isfinite(z)):
            raise ApiError(400, "bad_latent_value", "latent vector contains non-finite entries")
        atom, bond = decode(model, z)
        raw = from_tensors(atom, bond)
        graph, corrected = validity_correct(raw)
        raw_ok, _ = is_valid(raw)
        return {
            "smiles": to_smiles(graph) if graph.n_atoms else "",
            "valid": raw_ok and (raw.n_atoms == 0 or raw.is_connected()),
            "corrected": corrected,
            "svg": _depiction(graph),
        }

    @app.post("/api/grid")
    def grid_endpoint(req: GridRequest) -> dict[str, Any]:
        graph = _parse(req.smiles, n_max)
        try:
            spec = GridSpec(steps=req.steps, delta=req.delta, direction_seed=req.seed)
        except ValueError as exc:
            raise ApiError(400, "bad_grid_spec", str(exc)) from exc
        cells = neighborhood_grid(model, graph, spec)
        return {"cells": [[_cell_json(c) for c in row] for row in cells]}

    @app.post("/api/interpolate")
    def interpolate_endpoint(req: InterpolateRequest) -> dict[str, Any]:
        a = _parse(req.from_smiles, n_max)
        b = _parse(req.to_smiles, n_max)
        if req.steps < 2:
            raise ApiError(400, "bad_steps", f"steps must be >= 2, got {req.steps}")
        return {"cells": [_cell_json(c) for c in interpolate(model, a, b, req.steps)]}

    @app.post("/api/optimize")
    def optimize_endpoint(req: OptimizeRequest) -> dict[str, Any]:
        graph = _parse(req.smiles, n_max)
        try:
            spec = OptimizeSpec(
                property_name=req.property,
                maximize=req.maximize,
                steps=req.steps,
                step_size=req.step_size,
                sim_min=req.sim_min,
                proposals_per_step=req.proposals_per_step,
                seed=req.seed,
            )
        except ValueError as exc:
            raise ApiError(400, "bad_optimize_spec", str(exc)) from exc
        return {"job_id": jobs.submit(model, graph, spec)}

    @app.get("/api/jobs/{job_id}")
    def job_endpoint(job_id: str) -> dict[str, Any]:
        try:
            snap = jobs.snapshot(job_id)
        except UnknownJobError:
            raise ApiError(404, "unknown_job", f"no job with id {job_id!r}")
        return {
            "job_id": snap.job_id,
            "state": snap.state,
            "property": snap.spec.property_name,
            "maximize": snap.spec.maximize,
            "sim_min": snap.spec.sim_min,
            "steps": snap.spec.steps,
            "error": snap.error,
            "entries": [_entry_json(e) for e in snap.entries],
        }

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="frontend")

    return app
