"""Command-line front end.

Each compute subcommand builds one request model, runs it through the
in-process handler (or POSTs it to a running service with ``--server``),
and writes the tabular result as CSV or JSON.  CSV output starts with
``#`` metadata lines (version, command, resolved config, status,
annotations, wall time); the data rows themselves are deterministic and
byte-identical across re-runs of the same request.

Exit codes: 0 on success, 2 when an audit finishes INCONCLUSIVE, 1 on
usage or computation errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

from .errors import FibspecError
from .service.handlers import HANDLERS
from .service.models import TableResponse
from .version import VERSION

_GRID_TOLERANCE = 1e-12
_GRID_CAP = 10_000_000


class _Parser(argparse.ArgumentParser):
    """Argument parser that reserves exit code 2 for INCONCLUSIVE audits."""

    def error(self, message: str) -> None:  # pragma: no cover - thin glue
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_grid(text) -> list[float]:
    """Parse a value grid: 'start:stop:step' (stop inclusive within 1e-12),
    a comma list 'a,b,c', a single number, or an already-parsed sequence."""
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        if stop < start - _GRID_TOLERANCE:
            raise ValueError(f"grid stop {stop} below start {start}")
        values = []
        i = 0
        while (value := start + i * step) <= stop + _GRID_TOLERANCE:
            values.append(stop if abs(value - stop) <= _GRID_TOLERANCE else value)
            i += 1
            if i > _GRID_CAP:
                raise ValueError(f"grid {text!r} exceeds {_GRID_CAP} points")
        return values
    if "," in text:
        return [float(p) for p in text.split(",") if p.strip()]
    return [float(text)]


@dataclass
class RunConfig:
    """One resolved CLI invocation: payload plus output routing."""

    command: str
    payload: dict
    fmt: str = "csv"
    output: str | None = None
    server: str | None = None
    options: dict = field(default_factory=dict)


# Per-command option contract: which merged keys must be present and the
# defaults applied beneath config-file and flag values (flags win over the
# config file, the config file wins over these defaults).
_REQUIRED = {
    "bands": ("lambda_grid", "level"),
    "orbits": ("lambda_grid",),
    "dims": ("lambda_grid",),
    "pressure": ("lambda", "level", "t"),
    "gaps": ("lambda", "level"),
    "comb": (),
    "transport": ("lambda", "t_grid"),
    "sweep": ("lambdas",),
}
_DEFAULTS = {
    "bands": {},
    "orbits": {},
    "dims": {"k_max": 18},
    "pressure": {},
    "gaps": {"m_max": 20},
    "comb": {"k_max": 60},
    "transport": {"omega": 0.0, "length": 1024, "p": 2.0, "seed": None},
    "sweep": {"report": "asymptotics"},
}


def _payload(command: str, opts: dict) -> dict:
    if command == "bands":
        return {
            "lambdas": parse_grid(opts["lambda_grid"]),
            "level": int(opts["level"]),
        }
    if command == "orbits":
        return {"lambdas": parse_grid(opts["lambda_grid"])}
    if command == "dims":
        return {
            "lambdas": parse_grid(opts["lambda_grid"]),
            "k_max": int(opts["k_max"]),
        }
    if command == "pressure":
        return {
            "lambda": float(opts["lambda"]),
            "level": int(opts["level"]),
            "t_grid": parse_grid(opts["t"]),
        }
    if command == "gaps":
        return {
            "lambda": float(opts["lambda"]),
            "level": int(opts["level"]),
            "m_max": int(opts["m_max"]),
        }
    if command == "comb":
        return {"k_max": int(opts["k_max"])}
    if command == "transport":
        return {
            "lambda": float(opts["lambda"]),
            "omega": float(opts["omega"]),
            "length": int(opts["length"]),
            "p": float(opts["p"]),
            "T_grid": parse_grid(opts["t_grid"]),
            "seed": None if opts["seed"] is None else int(opts["seed"]),
        }
    if command == "sweep":
        return {
            "lambdas": parse_grid(opts["lambdas"]),
            "report": str(opts["report"]),
        }
    raise ValueError(f"unknown command {command!r}")


def _add_io_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with the same keys as the flags")
    sub.add_argument("--output", help="write to this path instead of stdout")
    sub.add_argument("--format", choices=("csv", "json"), dest="format")
    sub.add_argument("--server", help="POST to this service URL instead of in-process")


def build_parser() -> _Parser:
    parser = _Parser(prog="fibspec", description=__doc__)
    parser.add_argument("--version", action="version", version=f"fibspec {VERSION}")
    subs = parser.add_subparsers(dest="command", metavar="command")

    specs = {
        "bands": "band intervals of the level-k approximants",
        "orbits": "closed-form bound curves from short periodic orbits",
        "dims": "spectral estimates with the strict-chain audit",
        "pressure": "level-k pressure function with annotated intercepts",
        "gaps": "gap labels and their rotation-number errors",
        "comb": "exact band-type counting table",
        "transport": "time-averaged wavepacket moments and spreading slope",
        "sweep": "large-coupling trend audit across several couplings",
    }
    p = {}
    for name, help_text in specs.items():
        p[name] = subs.add_parser(name, help=help_text)
        _add_io_flags(p[name])

    p["bands"].add_argument("--lambda-grid", dest="lambda_grid")
    p["bands"].add_argument("--level", type=int)
    p["orbits"].add_argument("--lambda-grid", dest="lambda_grid")
    p["dims"].add_argument("--lambda-grid", dest="lambda_grid")
    p["dims"].add_argument("--k-max", dest="k_max", type=int)
    p["pressure"].add_argument("--lambda", dest="lambda")
    p["pressure"].add_argument("--level", type=int)
    p["pressure"].add_argument("--t", dest="t")
    p["gaps"].add_argument("--lambda", dest="lambda")
    p["gaps"].add_argument("--level", type=int)
    p["gaps"].add_argument("--m-max", dest="m_max", type=int)
    p["comb"].add_argument("--k-max", dest="k_max", type=int)
    p["transport"].add_argument("--lambda", dest="lambda")
    p["transport"].add_argument("--omega", type=float)
    p["transport"].add_argument("--length", type=int)
    p["transport"].add_argument("--p", type=float)
    p["transport"].add_argument("--t-grid", dest="t_grid")
    p["transport"].add_argument("--seed", type=int)
    p["sweep"].add_argument("--lambdas", dest="lambdas")
    p["sweep"].add_argument("--report", dest="report")

    serve = subs.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, and flags (flags win) into a RunConfig."""
    command = args.command
    merged = dict(_DEFAULTS[command])
    merged.update({"format": "csv", "output": None, "server": None})
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {args.config} must hold a JSON object")
        loaded.pop("config", None)
        merged.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        merged[key] = value
    missing = [k for k in _REQUIRED[command] if merged.get(k) is None]
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise ValueError(f"{command}: missing required options: {flags}")
    options = {
        k: v for k, v in merged.items() if k not in ("format", "output", "server")
    }
    return RunConfig(
        command=command,
        payload=_payload(command, merged),
        fmt=merged["format"],
        output=merged["output"],
        server=merged["server"],
        options=options,
    )


def _run_local(config: RunConfig) -> TableResponse:
    model, handler = HANDLERS[config.command]
    return handler(model.model_validate(config.payload))


def _run_remote(config: RunConfig) -> TableResponse:
    import httpx

    url = config.server.rstrip("/") + f"/v1/{config.command}"
    reply = httpx.post(url, json=config.payload, timeout=600.0)
    if reply.status_code >= 400:
        raise FibspecError(f"service returned {reply.status_code}: {reply.text}")
    return TableResponse.model_validate(reply.json())


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _annotation_lines(annotations: dict) -> list[str]:
    lines = []
    for key in annotations:
        value = annotations[key]
        if isinstance(value, float):
            text = "%.17g" % value
        elif isinstance(value, (dict, list)):
            text = json.dumps(value, sort_keys=True)
        else:
            text = str(value)
        lines.append(f"# annotation {key} = {text}")
    return lines


def render_csv(config: RunConfig, response: TableResponse, wall_time: float) -> str:
    lines = [
        f"# fibspec {VERSION}",
        f"# command: {config.command}",
        f"# schema: {response.schema_name}",
        f"# config: {json.dumps(config.payload, sort_keys=True)}",
        f"# status: {response.status}",
    ]
    lines.extend(_annotation_lines(response.annotations))
    if response.meta:
        lines.append(f"# meta: {json.dumps(response.meta, sort_keys=True)}")
    lines.append(f"# wall_time_s: {wall_time:.3f}")
    lines.append(",".join(response.columns))
    for row in response.rows:
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(config: RunConfig, response: TableResponse, wall_time: float) -> str:
    document = {
        "fibspec": VERSION,
        "command": config.command,
        "config": config.payload,
        "wall_time_s": round(wall_time, 3),
        "result": response.model_dump(),
    }
    return json.dumps(document, indent=2) + "\n"


def run_command(config: RunConfig) -> tuple[str, int]:
    """Execute one resolved invocation; return (rendered text, exit code)."""
    started = time.perf_counter()
    response = _run_remote(config) if config.server else _run_local(config)
    wall_time = time.perf_counter() - started
    render = render_json if config.fmt == "json" else render_csv
    text = render(config, response, wall_time)
    return text, 0 if response.status == "ok" else 2


def _serve(args: argparse.Namespace) -> int:  # pragma: no cover - needs uvicorn
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


_GRID_FLAGS = ("--t", "--t-grid", "--lambda-grid", "--lambdas")


def _preprocess_argv(argv: list[str]) -> list[str]:
    """Join grid flags with values that start with a negative number, which
    argparse would otherwise read as option strings (e.g. --t -1:2:0.01)."""
    merged = []
    skip = False
    for i, token in enumerate(argv):
        if skip:
            skip = False
            continue
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if (
            token in _GRID_FLAGS
            and nxt is not None
            and len(nxt) > 1
            and nxt[0] == "-"
            and (nxt[1].isdigit() or nxt[1] == ".")
        ):
            merged.append(f"{token}={nxt}")
            skip = True
        else:
            merged.append(token)
    return merged


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_preprocess_argv(sys.argv[1:] if argv is None else argv))
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    if args.command == "serve":
        return _serve(args)
    try:
        config = resolve_config(args)
        text, code = run_command(config)
    except FibspecError as exc:
        cls = type(exc)
        print(f"{cls.__module__}.{cls.__qualname__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"fibspec: error: {exc}", file=sys.stderr)
        return 1
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code == 2:
        print("status: INCONCLUSIVE", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
