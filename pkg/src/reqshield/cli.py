"""Command-line client for the detection service.

Subcommands talk to the FastAPI app over HTTP. By default the app runs
in-process (no server needed); --server points at a remote instance instead,
in which case dataset and output paths are interpreted on that machine.
Exit codes: 0 success, 2 usage, 3 data error, 4 artifact error, 5 numeric
failure.
"""

from __future__ import annotations

import argparse
import asyncio
import sys

import httpx

from .errors import EXIT_USAGE

_TRAIN_OPTION_KEYS = (
    "sequence_length",
    "min_support",
    "epochs",
    "batch_size",
    "learning_rate",
    "seed",
    "threshold",
    "train_fraction",
    "validation_fraction",
    "encoder_widths",
    "dataset_format",
    "train_mode",
)

_TRAIN_FLAG_KEYS = ("include_headers", "scale_values", "filter_ambiguous")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reqshield",
        description="Detect anomalous HTTP requests with a reconstruction ensemble.",
    )
    parser.add_argument(
        "--server",
        default=None,
        help="URL of a running service; defaults to running the service in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a labeled synthetic corpus")
    p_synth.add_argument("--out", required=True, help="output dataset directory")
    p_synth.add_argument("--n-normal", type=int, required=True)
    p_synth.add_argument("--n-attack", type=int, required=True)
    p_synth.add_argument("--seed", type=int, default=0)

    p_train = sub.add_parser("train", help="train a detector and write its artifact")
    p_train.add_argument("--dataset", required=True, help="corpus directory or file")
    p_train.add_argument("--out", required=True, help="artifact output directory")
    p_train.add_argument("--config", default=None, help="key=value config file")
    for key in _TRAIN_OPTION_KEYS:
        p_train.add_argument(f"--{key.replace('_', '-')}", default=None, dest=key)
    for key in _TRAIN_FLAG_KEYS:
        p_train.add_argument(
            f"--{key.replace('_', '-')}",
            action="store_const",
            const="true",
            default=None,
            dest=key,
        )

    p_score = sub.add_parser("score", help="score a dataset with a stored artifact")
    p_score.add_argument("--artifact", required=True)
    p_score.add_argument("--dataset", required=True)
    p_score.add_argument("--out", required=True, help="scores CSV path")
    p_score.add_argument("--dataset-format", default="auto")

    p_eval = sub.add_parser("eval", help="score a labeled dataset and report metrics")
    p_eval.add_argument("--artifact", required=True)
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--out", required=True, help="report output directory")
    p_eval.add_argument("--dataset-format", default="auto")
    p_eval.add_argument("--bins", type=int, default=100)
    p_eval.add_argument("--filter-ambiguous", action="store_true")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


async def _post_async(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=None) as client:
            return await client.post(path, json=payload)
    from .service.app import app

    transport = httpx.ASGITransport(app=app)
    async with httpx.AsyncClient(
        transport=transport, base_url="http://reqshield.local", timeout=None
    ) as client:
        return await client.post(path, json=payload)


def _post(server: str | None, path: str, payload: dict) -> dict:
    try:
        response = asyncio.run(_post_async(server, path, payload))
    except httpx.HTTPError as exc:
        print(f"error: cannot reach service: {exc}", file=sys.stderr)
        raise SystemExit(1) from exc
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail")
        except ValueError:
            detail = None
        if isinstance(detail, dict):
            stage = detail.get("stage")
            where = f" in stage '{stage}'" if stage else ""
            print(f"error{where}: {detail.get('message', '')}", file=sys.stderr)
            raise SystemExit(int(detail.get("exit_code", 1)))
        print(f"error: {detail if detail is not None else response.text}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE if response.status_code == 422 else 1)
    return response.json()


def _train_options(args: argparse.Namespace) -> dict:
    """Merge defaults, --config file pairs, and explicit flags, in that order."""
    from .pipeline import parse_config_overrides, read_config_file

    pairs: dict[str, str] = {}
    if args.config:
        pairs.update(read_config_file(args.config))
    for key in _TRAIN_OPTION_KEYS + _TRAIN_FLAG_KEYS:
        value = getattr(args, key)
        if value is not None:
            pairs[key] = value
    return parse_config_overrides(pairs).to_dict()


def _cmd_synth(args: argparse.Namespace) -> int:
    body = _post(
        args.server,
        "/synth",
        {
            "out_dir": args.out,
            "n_normal": args.n_normal,
            "n_attack": args.n_attack,
            "seed": args.seed,
        },
    )
    print(
        f"wrote {body['n_normal']} normal + {body['n_anomalous']} anomalous "
        f"requests to {body['out_dir']}"
    )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    try:
        options = _train_options(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    body = _post(
        args.server,
        "/train",
        {"dataset": args.dataset, "out_dir": args.out, "options": options},
    )
    val = body["final_val_mae"]
    val_text = f"{val:.6f}" if val is not None else "n/a"
    print(
        f"trained {body['epochs']} epochs on {body['n_train']} normal requests "
        f"({body['n_held_out']} held out)"
    )
    print(f"final train MAE {body['final_train_mae']:.6f}, val MAE {val_text}")
    fallback = " (degenerate fallback)" if body["threshold_fallback_used"] else ""
    print(
        f"threshold {body['threshold']!r} from {body['threshold_policy']}{fallback}"
    )
    print(f"artifact written to {body['artifact_dir']}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    body = _post(
        args.server,
        "/score",
        {
            "artifact_dir": args.artifact,
            "dataset": args.dataset,
            "out_path": args.out,
            "dataset_format": args.dataset_format,
        },
    )
    print(
        f"scored {body['n_scored']} requests ({body['n_flagged']} flagged) "
        f"-> {body['out_path']}"
    )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    body = _post(
        args.server,
        "/eval",
        {
            "artifact_dir": args.artifact,
            "dataset": args.dataset,
            "out_dir": args.out,
            "dataset_format": args.dataset_format,
            "bins": args.bins,
            "filter_ambiguous": args.filter_ambiguous,
        },
    )
    cm = body["confusion"]
    for key in ("tp", "tn", "fp", "fn", "total"):
        print(f"{key}={cm[key]}")
    for name, value in body["metrics_display"].items():
        print(f"{name}={value!r}")
    for name, reason in body["undefined"].items():
        print(f"{name}=undefined:{reason}")
    print(f"reports written to {args.out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    handlers = {
        "synth": _cmd_synth,
        "train": _cmd_train,
        "score": _cmd_score,
        "eval": _cmd_eval,
        "serve": _cmd_serve,
    }
    try:
        args = _build_parser().parse_args(argv)
        return handlers[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1


if __name__ == "__main__":
    sys.exit(main())
