"""Command-line interface.

Exit codes: 0 success, 1 usage error (bad flags/arguments), 2 runtime error
(unreadable files, parse failures, checkpoint problems). Output files are
written atomically (temp file in the destination directory, then rename), so
a crashed run never leaves a half-written artifact. Tabular results go to
stdout as tab-separated lines; the train and optimize subcommands can also
drop a PNG chart and CSV log next to each other via --report-dir.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from molscope import figures, geometry
from molscope.flow import FlowConfig, FlowModel, bits_per_dim, log_likelihood, new_model, train
from molscope.latent import GridSpec, interpolate, neighborhood_grid
from molscope.molgraph import SmilesError, parse_smiles, to_tensors
from molscope.optimize import OptimizeSpec, optimize
from molscope.chem import PROPERTY_NAMES
from molscope.platform.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from molscope.platform.dataset import ingest_dataset

__all__ = ["main", "build_parser"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # runtime failures, so rewire usage problems to exit code 1
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="molscope", description="flow-based molecule exploration")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", parents=[], help="train a flow on a SMILES corpus")
    p_train.add_argument("--data", required=True, help="corpus file, one SMILES per line")
    p_train.add_argument("--out", required=True, help="checkpoint output path")
    p_train.add_argument("--epochs", type=int, default=5)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--batch", type=int, default=32)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--n-max", type=int, default=9)
    p_train.add_argument("--report-dir", default=None, help="write train_curve.png + train_log.csv here")

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--model", default=None, help="checkpoint path (identity model if omitted)")
    p_serve.add_argument("--data", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--frontend", default=None, help="static dashboard directory to serve at /")

    p_grid = sub.add_parser("grid", help="decode a latent neighborhood grid around a seed")
    p_grid.add_argument("--model", default=None)
    p_grid.add_argument("--smiles", required=True)
    p_grid.add_argument("--steps", type=int, default=5)
    p_grid.add_argument("--delta", type=float, default=0.5)
    p_grid.add_argument("--seed", type=int, default=0)
    p_grid.add_argument("--out-svg", required=True)

    p_interp = sub.add_parser("interpolate", help="linear latent path between two molecules")
    p_interp.add_argument("--model", default=None)
    p_interp.add_argument("--from", dest="from_smiles", required=True)
    p_interp.add_argument("--to", dest="to_smiles", required=True)
    p_interp.add_argument("--steps", type=int, default=7)
    p_interp.add_argument("--out-svg", required=True)

    p_opt = sub.add_parser("optimize", help="hill-climb a property from a seed molecule")
    p_opt.add_argument("--model", default=None)
    p_opt.add_argument("--smiles", required=True)
    p_opt.add_argument("--property", required=True, choices=sorted(PROPERTY_NAMES))
    p_opt.add_argument("--minimize", action="store_true")
    p_opt.add_argument("--steps", type=int, default=20)
    p_opt.add_argument("--step-size", type=float, default=0.4)
    p_opt.add_argument("--sim-min", type=float, default=0.3)
    p_opt.add_argument("--proposals", type=int, default=16)
    p_opt.add_argument("--seed", type=int, default=0)
    p_opt.add_argument("--out-json", required=True)
    p_opt.add_argument("--report-dir", default=None, help="write optimize_curve.png + optimize_log.csv here")

    p_conv = sub.add_parser("convert", help="write an xyz file for a SMILES string")
    p_conv.add_argument("--smiles", required=True)
    p_conv.add_argument("--out-xyz", required=True)
    p_conv.add_argument("--comment", default=None, help="xyz comment line (defaults to the SMILES)")

    return parser


def _atomic_write(path: str | Path, data: str | bytes) -> None:
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_model(path: str | None) -> FlowModel:
    if path is None:
        return new_model(FlowConfig())
    model, _ = load_checkpoint(path)
    return model


def _cmd_train(args: argparse.Namespace) -> int:
    entries, rejects = ingest_dataset(args.data, n_max=args.n_max)
    if not entries:
        print("error: no usable molecules in the corpus", file=sys.stderr)
        return 2
    for r in rejects:
        print(f"skipped\t{r.line_no}\t{r.text}\t{r.reason}", file=sys.stderr)
    config = FlowConfig(n_max=args.n_max, seed=args.seed)
    model = new_model(config)
    tensors = [to_tensors(e.graph, args.n_max) for e in entries]
    initial = sum(
        bits_per_dim(log_likelihood(model, t), config.latent_dim) for t in tensors
    ) / len(tensors)
    print(f"corpus\t{len(entries)}\trejects\t{len(rejects)}")
    print(f"initial_bits_per_dim\t{initial:.6f}")
    trained, reports = train(
        model, tensors, epochs=args.epochs, lr=args.lr, batch=args.batch, seed=args.seed
    )
    for r in reports:
        print(f"epoch\t{r.epoch}\t{r.nll_bits_per_dim:.6f}\t{r.grad_norm:.6f}")
    final = sum(
        bits_per_dim(log_likelihood(trained, t), config.latent_dim) for t in tensors
    ) / len(tensors)
    print(f"final_bits_per_dim\t{final:.6f}")
    metadata = {
        "model_version": f"flow-e{args.epochs}-s{args.seed}",
        "epochs": args.epochs,
        "initial_bits_per_dim": initial,
        "final_bits_per_dim": final,
        "corpus_size": len(entries),
    }
    save_checkpoint(trained, args.out, metadata)
    if args.report_dir:
        png, csv_path = figures.write_train_report(reports, args.report_dir)
        print(f"report\t{png}\t{csv_path}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from molscope.platform.api import create_app

    entries, _ = ingest_dataset(args.data)
    if args.model is None:
        model, version = new_model(FlowConfig()), "identity-0"
    else:
        model, metadata = load_checkpoint(args.model)
        version = str(metadata.get("model_version", "unversioned"))
    app = create_app(model, entries, model_version=version, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _cmd_grid(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    seed_graph = parse_smiles(args.smiles)
    spec = GridSpec(steps=args.steps, delta=args.delta, direction_seed=args.seed)
    grid = neighborhood_grid(model, seed_graph, spec)
    for row in grid:
        for cell in row:
            r, c = cell.position
            print(f"{r}\t{c}\t{cell.smiles}\t{cell.similarity:.4f}\t{int(cell.corrected)}")
    _atomic_write(args.out_svg, figures.compose_grid_svg(grid))
    return 0


def _cmd_interpolate(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    a = parse_smiles(args.from_smiles)
    b = parse_smiles(args.to_smiles)
    if args.steps < 2:
        print("error: --steps must be >= 2", file=sys.stderr)
        return 2
    cells = interpolate(model, a, b, args.steps)
    for cell in cells:
        (i,) = cell.position
        print(f"{i}\t{cell.smiles}\t{cell.similarity:.4f}\t{int(cell.corrected)}")
    _atomic_write(args.out_svg, figures.compose_path_svg(cells))
    return 0


def _cmd_optimize(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    seed_graph = parse_smiles(args.smiles)
    spec = OptimizeSpec(
        property_name=args.property,
        maximize=not args.minimize,
        steps=args.steps,
        step_size=args.step_size,
        sim_min=args.sim_min,
        proposals_per_step=args.proposals,
        seed=args.seed,
    )
    traj = optimize(model, seed_graph, spec)
    incumbents = traj.incumbent_scores()
    for entry, inc in zip(traj, incumbents):
        print(
            f"{entry.step_index}\t{entry.score:.4f}\t{inc:.4f}"
            f"\t{int(entry.accepted)}\t{entry.cell.smiles}"
        )
    payload = {
        "property": spec.property_name,
        "maximize": spec.maximize,
        "sim_min": spec.sim_min,
        "step_size": spec.step_size,
        "seed": spec.seed,
        "entries": [
            {
                "step_index": e.step_index,
                "score": e.score,
                "incumbent": inc,
                "accepted": e.accepted,
                "smiles": e.cell.smiles,
                "similarity": e.cell.similarity,
                "corrected": e.cell.corrected,
            }
            for e, inc in zip(traj, incumbents)
        ],
    }
    _atomic_write(args.out_json, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if args.report_dir:
        png, csv_path = figures.write_optimize_report(traj, args.report_dir)
        print(f"report\t{png}\t{csv_path}")
    return 0


def _cmd_convert(args: argparse.Namespace) -> int:
    graph = parse_smiles(args.smiles)
    coords = geometry.embed_3d(graph)
    comment = args.smiles if args.comment is None else args.comment
    _atomic_write(args.out_xyz, geometry.to_xyz(graph, coords, comment=comment))
    return 0


_COMMANDS = {
    "train": _cmd_train,
    "serve": _cmd_serve,
    "grid": _cmd_grid,
    "interpolate": _cmd_interpolate,
    "optimize": _cmd_optimize,
    "convert": _cmd_convert,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (SmilesError, CheckpointError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
