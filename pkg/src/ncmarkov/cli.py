"""Command-line front end.

Subcommands: ``generate``, ``validate``, ``transfer``, ``diagnose``,
``compare`` and ``scatter``. Every output starts with a header block that
echoes the effective configuration next to the tool version, so two runs with
the same arguments produce byte-identical output.

Exit codes: 0 success, 1 property violation, 2 malformed input, 3 resource
guard, 4 indeterminate verdict.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import DEFAULT, Tolerances
from .errors import GuardError, InvalidModelError, ModelFormatError, ShapeError
from .markov import diagnose
from .model import colligation_of, generate, load_model, model_to_json, validate
from .scattering import record_distribution, scattering_axioms_check
from .transfer import coefficient_rows, inner_defect, probability_rows, series
from .words import word_text

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_MALFORMED = 2
EXIT_GUARD = 3
EXIT_INDETERMINATE = 4

COMPARE_TOL = 1e-9
SCATTER_TOL = 1e-10

# test hook: when set, called on the colligation before ``compare`` builds the
# transfer series (used to inject a deliberately corrupted colligation)
_colligation_hook = None


class UsageError(ValueError):
    """Malformed command-line arguments (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    model_path: str | None = None
    generator: str | None = None
    dims: tuple[int, int, int] = (2, 2, 2)
    max_len: int = 6
    n_slots: int = 6
    seed: int = 0
    tol: float = DEFAULT.validation
    verdict_tol: float = DEFAULT.verdict
    samples: int = 20
    records: bool = False
    fmt: str = "table"
    out: str | None = None

    def echo(self) -> dict:
        """Configuration as recorded in output headers (``out`` excluded)."""
        return {
            "command": self.command,
            "model": self.model_path,
            "generate": self.generator,
            "dims": list(self.dims),
            "max_len": self.max_len,
            "slots": self.n_slots,
            "tol": self.tol,
            "verdict_tol": self.verdict_tol,
            "samples": self.samples,
            "records": self.records,
            "format": self.fmt,
        }

    def tolerances(self) -> Tolerances:
        return DEFAULT.with_overrides(validation=self.tol, verdict=self.verdict_tol)


# -- argument parsing -------------------------------------------------------

_THETA = re.compile(r"^\s*([+-]?\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*(pi)?\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(text: str) -> float:
    """Parse ``0.3``, ``pi``, ``pi/4``, ``3pi/8`` or ``3*pi/8``."""
    m = _THETA.match(text)
    if not m or (not m.group(1) and not m.group(2)):
        raise UsageError(f"cannot parse angle {text!r}")
    coef, pi, denom = m.groups()
    try:
        value = float(coef) if coef not in ("", "+", "-") else float(coef + "1")
    except ValueError as exc:
        raise UsageError(f"cannot parse angle {text!r}") from exc
    if pi:
        value *= math.pi
    if denom:
        value /= float(denom)
    return value


def parse_dims(text: str) -> tuple[int, int, int]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--dims expects H,K,P, got {text!r}") from exc
    if len(dims) != 3 or min(dims) < 1:
        raise UsageError(f"--dims expects three positive integers, got {text!r}")
    return dims


def _positive(kind):
    def conv(text):
        try:
            v = kind(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from exc
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return v
    return conv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--model", metavar="FILE", help="model JSON file")
    src.add_argument("--generate", metavar="KIND[:PARAM]",
                     help="identity, swap, partial_swap:THETA or random")
    common.add_argument("--dims", default="2,2,2", metavar="H,K,P")
    common.add_argument("--max-len", type=_positive(int), default=6)
    common.add_argument("--slots", type=_positive(int), default=6)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_positive(float), default=DEFAULT.validation,
                        help="validation tolerance")
    common.add_argument("--verdict-tol", type=_positive(float), default=DEFAULT.verdict)
    common.add_argument("--samples", type=_positive(int), default=20)
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")
    common.add_argument("--out", metavar="FILE")

    parser = _Parser(prog="ncmarkov", description="Repeated-interaction model toolkit.")
    parser.add_argument("--version", action="version", version=f"ncmarkov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="write a generated model as JSON")
    sub.add_parser("validate", parents=[common], help="check the model axioms")
    t = sub.add_parser("transfer", parents=[common], help="transfer coefficients or record probabilities")
    t.add_argument("--records", action="store_true",
                   help="emit record probabilities for a seeded random input")
    sub.add_parser("diagnose", parents=[common], help="Markov chain verdicts and their consistency")
    sub.add_parser("compare", parents=[common], help="transfer coefficients against simulation")
    sub.add_parser("scatter", parents=[common], help="scattering identities at truncation --slots")
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=ns.command,
        model_path=ns.model,
        generator=ns.generate,
        dims=parse_dims(ns.dims),
        max_len=ns.max_len,
        n_slots=ns.slots,
        seed=ns.seed,
        tol=ns.tol,
        verdict_tol=ns.verdict_tol,
        samples=ns.samples,
        records=getattr(ns, "records", False),
        fmt=ns.format,
        out=ns.out,
    )
    if cfg.model_path is None and cfg.generator is None:
        raise UsageError("one of --model or --generate is required")
    if cfg.command == "generate" and cfg.generator is None:
        raise UsageError("generate needs --generate")
    return cfg


def load_config_model(cfg: RunConfig):
    if cfg.model_path is not None:
        try:
            return load_model(cfg.model_path)
        except OSError as exc:
            raise ModelFormatError(f"cannot read {cfg.model_path}: {exc}") from exc
    kind, _, param = cfg.generator.partition(":")
    theta = parse_angle(param) if param else None
    try:
        return generate(kind, cfg.dims, theta=theta, seed=cfg.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- output -----------------------------------------------------------------


def _header(cfg: RunConfig) -> dict:
    return {"tool": "ncmarkov", "version": __version__, "seed": cfg.seed, "config": cfg.echo()}


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _to_json(cfg: RunConfig, body: dict) -> str:
    return json.dumps({"header": _header(cfg), **body}, indent=2) + "\n"


def _comment_header(cfg: RunConfig) -> str:
    lines = [f"# ncmarkov {__version__}", f"# seed {cfg.seed}"]
    lines += [f"# {k} {json.dumps(v)}" for k, v in cfg.echo().items()]
    return "\n".join(lines) + "\n"


def _to_csv(cfg: RunConfig, head: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(_comment_header(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(head)
    for r in rows:
        w.writerow([_num(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _to_table(cfg: RunConfig, head: list[str], rows) -> str:
    cells = [head] + [[_num(x) if isinstance(x, float) else str(x) for x in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(head))]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() for r in cells]
    return _comment_header(cfg) + "\n".join(lines) + "\n"


def _render(cfg: RunConfig, body: dict, head: list[str], rows) -> str:
    if cfg.fmt == "json":
        return _to_json(cfg, body)
    rows = list(rows)
    if cfg.fmt == "csv":
        return _to_csv(cfg, head, rows)
    return _to_table(cfg, head, rows)


# -- commands ---------------------------------------------------------------


def cmd_generate(cfg: RunConfig):
    model = load_config_model(cfg)
    body = json.loads(model_to_json(model))
    text = json.dumps({"header": _header(cfg), **body}, indent=2) + "\n"
    return EXIT_OK, text


def cmd_validate(cfg: RunConfig):
    model = load_config_model(cfg)
    bad = validate(model, cfg.tol)
    body = {"valid": not bad, "violations": [{"name": v.name, "defect": v.defect} for v in bad]}
    rows = [(v.name, float(v.defect)) for v in bad]
    return (EXIT_VIOLATION if bad else EXIT_OK), _render(cfg, body, ["violation", "defect"], rows)


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def cmd_transfer(cfg: RunConfig):
    model = load_config_model(cfg)
    col, _ = colligation_of(model, cfg.tol)
    ser = series(col, cfg.max_len)
    if cfg.records:
        eta = _random_unit(np.random.default_rng(cfg.seed), col.dim_u)
        rows = list(probability_rows(ser, eta))
        total = sum(p for _, p in rows)
        rows.append(("residual", 1.0 - total))
        body = {
            "input": [[float(z.real), float(z.imag)] for z in eta],
            "probabilities": [{"word": w, "probability": p} for w, p in rows],
        }
        return EXIT_OK, _render(cfg, body, ["word", "probability"], rows)
    rows = list(coefficient_rows(ser))
    body = {
        "coefficients": [
            {"word": w, "row": i, "col": j, "re": re_, "im": im} for w, i, j, re_, im, _ in rows
        ],
        "inner_defects": [{"length": n, "defect": inner_defect(ser, n)} for n in range(cfg.max_len + 1)],
    }
    head = ["word", "row", "col", "re", "im", "inner_defect"]
    return EXIT_OK, _render(cfg, body, head, rows)


def cmd_diagnose(cfg: RunConfig):
    model = load_config_model(cfg)
    report = diagnose(model, cfg.tolerances())
    if report.indeterminate:
        code = EXIT_INDETERMINATE
    elif report.consistent and report.converged:
        code = EXIT_OK
    else:
        code = EXIT_VIOLATION
    if cfg.fmt == "json":
        return code, _to_json(cfg, report.to_dict())
    if cfg.fmt == "csv":
        d = report.to_dict()
        rows = [(k, json.dumps(v)) for k, v in d.items() if k not in ("gramian", "xfixed")]
        return code, _to_csv(cfg, ["field", "value"], rows)
    return code, _comment_header(cfg) + report.to_table() + "\n"


def _colligation_for_compare(model, tol):
    col, _ = colligation_of(model, tol)
    if _colligation_hook is not None:
        col = _colligation_hook(col)
    return col


def cmd_compare(cfg: RunConfig):
    model = load_config_model(cfg)
    n = cfg.n_slots
    col = _colligation_for_compare(model, cfg.tol)
    ser = series(col, n - 1)
    rng = np.random.default_rng(cfg.seed)
    worst = np.zeros(ser.index.total)
    for _ in range(cfg.samples):
        eta = _random_unit(rng, col.dim_u)
        rec = record_distribution(model, eta, n)
        gap = np.linalg.norm(rec.amplitudes - ser.coeffs @ eta, axis=1)
        worst = np.maximum(worst, gap)
    words = ser.index.words()
    top = float(worst.max())
    offending = [word_text(words[i]) for i in np.flatnonzero(worst > COMPARE_TOL)]
    by_length = [(m, float(worst[ser.index.level(m).start:ser.index.level(m).stop].max()))
                 for m in range(n)]
    body = {"max_discrepancy": top, "by_length": [{"length": m, "discrepancy": v} for m, v in by_length],
            "offending_words": offending, "pass": not offending}
    rows = [(m, v) for m, v in by_length] + [("max", top)]
    rows += [("offending", w) for w in offending]
    code = EXIT_VIOLATION if offending else EXIT_OK
    return code, _render(cfg, body, ["length", "discrepancy"], rows)


def cmd_scatter(cfg: RunConfig):
    model = load_config_model(cfg)
    report = scattering_axioms_check(model, cfg.n_slots, cfg.samples, cfg.seed)
    body = report.to_dict()
    rows = [(k, float(v)) for k, v in report.defects.items()] + [("max", report.max_defect)]
    code = EXIT_OK if report.max_defect <= SCATTER_TOL else EXIT_VIOLATION
    return code, _render(cfg, body, ["check", "defect"], rows)


COMMANDS = {
    "generate": cmd_generate,
    "validate": cmd_validate,
    "transfer": cmd_transfer,
    "diagnose": cmd_diagnose,
    "compare": cmd_compare,
    "scatter": cmd_scatter,
}


def run(argv=None) -> tuple[int, str]:
    """Run one command; returns ``(exit_code, text)``. Errors become messages."""
    try:
        cfg = parse_config(argv)
        code, text = COMMANDS[cfg.command](cfg)
    except (UsageError, ModelFormatError, ShapeError) as exc:
        return EXIT_MALFORMED, f"error: {exc}\n"
    except InvalidModelError as exc:
        return EXIT_VIOLATION, f"error: invalid model: {exc}\n"
    except GuardError as exc:
        return EXIT_GUARD, f"error: resource guard: {exc}\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return code, ""
    return code, text


def main(argv=None) -> int:
    code, text = run(argv)
    stream = sys.stderr if text.startswith("error:") else sys.stdout
    stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
