"""Command-line front end; every command prints one JSON document."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fejerriesz as fr
from . import focktrunc as ft
from . import ncparse
from . import realize as rz
from . import sarason as sr
from .errors import NCRatError
from .freecore import FreeSeries, OrderExceeded

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2


class InputError(NCRatError):
    pass


@dataclass(frozen=True)
class Job:
    command: str
    d: int | None
    N: int
    tol: float
    seed: int
    pretty: bool
    expr: str | None
    file: str | None
    output: str | None
    extra: argparse.Namespace


# ------------------------------------------------------------------ inputs


def _load_any(expr: str | None, path: str | None, d: int | None):
    """Realization or series from exactly one of an inline expression or a file."""
    if (expr is None) == (path is None):
        raise InputError("exactly one of -e or -f is required")
    if expr is not None:
        if d is None:
            raise InputError("-d is required with -e")
        return ncparse.realize_text(expr, d)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(str(exc), path) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        if d is None:
            raise InputError("-d is required for an expression file", path) from None
        return ncparse.realize_text(text.strip(), d)
    try:
        if "A" in obj:
            return rz.FMRealization.from_json(obj)
        if "coeffs" in obj:
            return FreeSeries.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed JSON input: {exc}", path) from None
    raise InputError("JSON input is neither a realization nor a series", path)


def _load_realization(expr, path, d) -> rz.FMRealization:
    obj = _load_any(expr, path, d)
    if not isinstance(obj, rz.FMRealization):
        raise InputError("this command needs a realization, not a series")
    if d is not None and obj.d != d:
        raise InputError(f"input has d = {obj.d}, flag says {d}")
    return obj


def _load_point(job: Job, d: int) -> np.ndarray:
    if job.extra.point:
        try:
            arr = np.asarray(json.loads(Path(job.extra.point).read_text()), dtype=float)
        except (OSError, json.JSONDecodeError, ValueError) as exc:
            raise InputError(f"bad point file: {exc}", job.extra.point) from None
        if arr.ndim != 4 or arr.shape[-1] != 2:
            raise InputError("point must be a list of d square matrices of [re, im] pairs", job.extra.point)
        return rz.as_point(arr[..., 0] + 1j * arr[..., 1], d)
    rng = np.random.default_rng(job.seed)
    return rz.random_point(rng, d, job.extra.size, job.extra.radius)


# ----------------------------------------------------------------- outputs


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating,)):
        return _clean(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def _matrix_json(M: np.ndarray):
    M = np.asarray(M, dtype=complex)
    return np.stack([M.real, M.imag], axis=-1).tolist()


# ---------------------------------------------------------------- commands


def cmd_parse(job: Job):
    if job.expr is None or job.d is None:
        raise InputError("parse needs -e and -d")
    e = ncparse.parse(job.expr, job.d)
    r = ncparse.realize_expr(e)
    return {"expression": str(e), "realization": r.to_json()}, EXIT_OK


def cmd_eval(job: Job):
    r = _load_realization(job.expr, job.file, job.d)
    Z = _load_point(job, r.d)
    return {"point": _matrix_json(Z), "value": _matrix_json(r.eval(Z))}, EXIT_OK


def cmd_coeffs(job: Job):
    r = _load_realization(job.expr, job.file, job.d)
    return r.coeffs(job.N).to_json(), EXIT_OK


def cmd_minimize(job: Job):
    r = _load_realization(job.expr, job.file, job.d)
    m = rz.minimize(r)
    return {"input_dim": r.n, "realization": m.to_json()}, EXIT_OK


def cmd_classify(job: Job):
    r = _load_realization(job.expr, job.file, job.d)
    return sr.classify(r).to_json(), EXIT_OK


def cmd_sarason(job: Job):
    b = _load_realization(job.expr, job.file, job.d)
    a = sr.sarason(b)
    rep = sr.verify_column(b, a, min(job.N, 4), job.tol)
    return {"a": a.to_json(), "report": rep.to_json()}, EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_factor(job: Job):
    r = _load_realization(job.expr, job.file, job.d)
    h = fr.herglotz_square(r) if job.extra.square else r
    res = fr.factorize(h, fr.FactorConfig(N=min(job.N, 4), tol=job.tol))
    out = {"h": h.to_json(), "d_fn": res.d_fn.to_json(), "report": res.report.to_json()}
    return out, EXIT_OK if res.report.passed else EXIT_VERIFY


def cmd_entropy(job: Job):
    obj = _load_any(job.expr, job.file, job.d)
    kind = job.extra.kind
    if isinstance(obj, FreeSeries):
        if kind != "series":
            raise InputError("series input only supports --kind series")
        t = obj
    else:
        t = obj.coeffs(job.N)
        if kind == "defect":
            t = ft.defect_symbol(t, job.N)
        elif kind == "herglotz":
            t = ft.herglotz_symbol(t, job.N)
    top = min(job.N, t.order)
    table = [{"N": n, "epsilon": (e := ft.entropy_schur(t, n)).value, "log": e.log} for n in range(1, top + 1)]
    return {"kind": kind, "table": table}, EXIT_OK


def cmd_clark(job: Job):
    b = _load_realization(job.expr, job.file, job.d)
    mu = fr.clark_moments(b, job.N)
    return {"moments": mu.to_json(), "psd_margin": mu.psd_margin(min(job.N, sr._oracle_order(b.d, job.N)))}, EXIT_OK


def cmd_verify(job: Job):
    b = _load_realization(job.expr, job.file, job.d)
    a = _load_realization(job.extra.a_expr, job.extra.a_file, job.d if job.d is not None else b.d)
    rep = sr.verify_column(b, a, min(job.N, 4), job.tol)
    return rep.to_json(), EXIT_OK if rep.passed else EXIT_VERIFY


COMMANDS = {
    "parse": cmd_parse,
    "eval": cmd_eval,
    "coeffs": cmd_coeffs,
    "minimize": cmd_minimize,
    "classify": cmd_classify,
    "sarason": cmd_sarason,
    "factor": cmd_factor,
    "entropy": cmd_entropy,
    "clark": cmd_clark,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-d", type=int, help="number of variables")
    common.add_argument("-N", type=int, default=8, help="truncation order (default 8)")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--seed", type=int, default=0)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    common.set_defaults(pretty=False)
    common.add_argument("-e", dest="expr", help="inline expression")
    common.add_argument("-f", dest="file", help="input file: realization JSON, series JSON or expression text")
    common.add_argument("-o", dest="output", help="write JSON here instead of standard output")

    p = argparse.ArgumentParser(prog="ncrat", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "eval":
            sp.add_argument("--point", help="JSON file with d matrices of [re, im] pairs")
            sp.add_argument("--size", type=int, default=2, help="size of a random point")
            sp.add_argument("--radius", type=float, default=0.9)
        if name == "factor":
            sp.add_argument("--square", action="store_true", help="input is r; factor r(R)^* r(R)")
        if name == "entropy":
            sp.add_argument("--kind", choices=["series", "defect", "herglotz"], default="series")
        if name == "verify":
            sp.add_argument("--a-expr", help="inline expression for a")
            sp.add_argument("--a-file", help="file holding a")
    return p


def run(job: Job) -> tuple[dict, int]:
    if job.d is not None and job.d < 1:
        raise InputError("-d must be positive")
    if job.N < 0:
        raise InputError("-N must be nonnegative")
    return COMMANDS[job.command](job)


def _error(exc: BaseException) -> dict:
    detail = getattr(exc, "detail", None) or str(exc)
    return {"error": type(exc).__name__, "detail": detail, "location": getattr(exc, "location", None)}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    job = Job(args.command, args.d, args.N, args.tol, args.seed, args.pretty, args.expr, args.file, args.output, args)
    try:
        payload, code = run(job)
    except (NCRatError, OrderExceeded, ValueError, np.linalg.LinAlgError) as exc:
        print(json.dumps(_error(exc)), file=sys.stderr)
        return EXIT_INPUT
    text = json.dumps(_clean(payload), indent=2 if job.pretty else None)
    if job.output:
        Path(job.output).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
