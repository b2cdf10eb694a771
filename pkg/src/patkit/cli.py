"""Command-line front end: ``patkit <command> [options]``.

Every run writes one JSON document ``{command, config, result, timing}``;
``timing`` is the only part that varies between identical runs.  Exit codes:
0 success, 1 computational error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from importlib import resources
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from patkit import __version__
from patkit.cyclic import (CyclicFunction, FiniteMeasure, FunctionSpec, gowers_norm_cyclic,
                           gowers_norm_interval, gowers_norm_sampled, gowers_norm_u2_fourier,
                           gp_cost, gp_norm_power, gp_norm_sampled, interval_modulus,
                           parse_function_spec)
from patkit.numtheory import BudgetExceeded, enumeration_budget, is_prime
from patkit.poly import PolyParseError, UniPoly, parse_uni
from patkit.patterns import PatternError, PatternSpec, classify

COMMANDS = ("classify", "transfer-gap", "gowers", "gp-norm", "hensel-check", "wtrick",
            "extremal", "reproduce")
EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any]
    seed: int = 0
    output: str | None = None
    format: str = "json"
    workers: int = 1
    # parsed objects that are not part of the serialised config
    objects: dict[str, Any] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {"command": self.command, "seed": self.seed, "format": self.format,
                "workers": self.workers, **self.params}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="patkit", description="Polynomial pattern toolkit.")
    parser.add_argument("--version", action="version", version=f"patkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pattern_args(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--pattern", help="pattern file: one polynomial per line")
        g.add_argument("--polys", help="comma separated polynomials, e.g. '0,y,2*y,y^2'")

    p = sub.add_parser("classify", parents=[common], help="kernel system and transferability")
    pattern_args(p)
    p.add_argument("--degree-bound", "-k", type=int)

    p = sub.add_parser("transfer-gap", parents=[common], help="polynomial vs linearised count")
    pattern_args(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--fn", action="append", default=[],
                   help="function spec (one for all, or one per polynomial)")
    p.add_argument("--set", dest="set_file", help="file of residues; uses its indicator for every f_i")
    p.add_argument("--method", choices=("auto", "direct", "fourier", "sampled"), default="auto")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--dual", type=int, help="also report the dual function at this index")

    p = sub.add_parser("gowers", parents=[common], help="Gowers U^s norm")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--interval", action="store_true", help="norm on [N] instead of Z/NZ")
    p.add_argument("--method", choices=("auto", "direct", "fourier", "sampled"), default="auto")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("gp-norm", parents=[common], help="Gowers--Peluse norm of f on [N]")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--measure", action="append", required=True,
                   help="uniform:a,b | point:h | progression:q,a,b (repeat for each measure)")
    p.add_argument("--exact", action="store_true", help="exact rational arithmetic")
    p.add_argument("--samples", type=int, default=20_000)

    p = sub.add_parser("hensel-check", parents=[common], help="compare residue distributions mod q")
    p.add_argument("--Q", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--q", type=int, required=True)

    p = sub.add_parser("wtrick", parents=[common], help="W, P_W and related data for P")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--poly", help="file holding P")
    g.add_argument("--P", help="P as text")
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--admissible-cap", type=int, default=64)

    p = sub.add_parser("extremal", parents=[common], help="largest pattern-free subset of Z/NZ")
    pattern_args(p)
    p.add_argument("--N", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True)
    mode.add_argument("--greedy", type=int, metavar="SEED")
    p.add_argument("--budget", type=int, default=10**7, help="node budget for the exact search")

    sub.add_parser("reproduce", parents=[common], help="re-run the bundled worked examples")
    return parser


# argument validation ------------------------------------------------------------

def _load_pattern(ns) -> PatternSpec:
    if ns.pattern:
        return PatternSpec.from_file(ns.pattern)
    return PatternSpec.from_strings([s for s in ns.polys.split(",")], None)


def _parse_measure(text: str, exact: bool) -> FiniteMeasure:
    kind, _, rest = text.partition(":")
    try:
        args = [int(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise UsageError(f"bad measure {text!r}") from None
    if kind == "uniform" and len(args) == 2:
        return FiniteMeasure.uniform(*args, exact=exact)
    if kind == "point" and len(args) == 1:
        return FiniteMeasure.point(args[0])
    if kind == "progression" and len(args) == 3:
        return FiniteMeasure.progression(*args, exact=exact)
    raise UsageError(f"bad measure {text!r}")


def _validate(ns) -> RunConfig:
    params: dict[str, Any] = {}
    objects: dict[str, Any] = {}
    cmd = ns.command
    if cmd in ("classify", "transfer-gap", "extremal"):
        pat = _load_pattern(ns)
        objects["pattern"] = pat
        params["pattern"] = {"name": pat.name, "polys": pat.labels(), "source": ns.pattern}
    if cmd == "classify":
        if ns.degree_bound is not None and ns.degree_bound < 1:
            raise UsageError("--degree-bound must be positive")
        params["degree_bound"] = ns.degree_bound
    elif cmd == "transfer-gap":
        if not is_prime(ns.N):
            raise UsageError(f"--N {ns.N} is not prime")
        t = objects["pattern"].t
        if ns.set_file and ns.fn:
            raise UsageError("use either --fn or --set")
        if ns.set_file:
            residues = _read_residues(ns.set_file)
            objects["set"] = residues
            params["set"] = {"source": ns.set_file, "size": len(set(r % ns.N for r in residues))}
            specs = []
        else:
            texts = ns.fn or ["const"]
            if len(texts) not in (1, t):
                raise UsageError(f"give one --fn or {t} of them")
            specs = [parse_function_spec(s) for s in (texts * t if len(texts) == 1 else texts)]
            params["functions"] = [s.to_text() for s in specs]
        if ns.dual is not None and not 0 <= ns.dual < t:
            raise UsageError(f"--dual must be in 0..{t - 1}")
        objects["specs"] = specs
        params.update(N=ns.N, method=ns.method, samples=ns.samples, dual=ns.dual)
    elif cmd == "gowers":
        if ns.N < 1 or ns.s < 1:
            raise UsageError("--N and --s must be positive")
        spec = parse_function_spec(ns.fn)
        objects["spec"] = spec
        params.update(N=ns.N, s=ns.s, function=spec.to_text(), interval=ns.interval,
                      method=ns.method, samples=ns.samples)
    elif cmd == "gp-norm":
        if ns.N < 1:
            raise UsageError("--N must be positive")
        spec = parse_function_spec(ns.fn)
        objects["spec"] = spec
        objects["measures"] = [_parse_measure(m, ns.exact) for m in ns.measure]
        params.update(N=ns.N, function=spec.to_text(), measures=list(ns.measure),
                      exact=ns.exact, samples=ns.samples)
    elif cmd == "hensel-check":
        if ns.q < 1:
            raise UsageError("--q must be positive")
        Q, R = parse_uni(ns.Q, "y"), parse_uni(ns.ref, "y")
        if not (Q.is_integral() and R.is_integral()):
            raise UsageError("polynomials must have integer coefficients")
        objects.update(Q=Q, ref=R)
        params.update(Q=Q.to_text(), ref=R.to_text(), q=str(ns.q))
    elif cmd == "wtrick":
        text = Path(ns.poly).read_text(encoding="utf-8") if ns.poly else ns.P
        lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
        lines = [l for l in lines if l and not l.lower().startswith("name:")]
        if len(lines) != 1:
            raise UsageError("expected exactly one polynomial P")
        P = parse_uni(lines[0], "y")
        if ns.w < 2:
            raise UsageError("--w must be at least 2")
        if ns.N is not None and ns.N < 1:
            raise UsageError("--N must be positive")
        objects["P"] = P
        params.update(P=P.to_text(), w=ns.w, N=ns.N, admissible_cap=ns.admissible_cap)
    elif cmd == "extremal":
        if not is_prime(ns.N):
            raise UsageError(f"--N {ns.N} is not prime")
        greedy = ns.greedy is not None
        params.update(N=ns.N, mode="greedy" if greedy else "exact",
                      greedy_seed=ns.greedy, budget=ns.budget)
    if ns.workers < 1:
        raise UsageError("--workers must be positive")
    return RunConfig(cmd, params, ns.seed, ns.output, ns.format, ns.workers, objects)


def _read_residues(path: str) -> list[int]:
    out = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(int(line))
    return out


def parse_args(argv: Sequence[str] | None = None) -> RunConfig:
    """Parse and validate; usage problems exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return _validate(ns)
    except (UsageError, PolyParseError, PatternError, ValueError, OSError) as exc:
        parser.error(str(exc))


# commands ---------------------------------------------------------------------

def _cjson(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _run_classify(cfg: RunConfig) -> dict:
    pat = cfg.objects["pattern"]
    return classify(pat, cfg.params["degree_bound"]).to_json(pat)


def _run_transfer_gap(cfg: RunConfig) -> dict:
    from patkit.counting import count_configs, dual_function, transfer_gap

    pat, N = cfg.objects["pattern"], cfg.params["N"]
    if "set" in cfg.objects:
        ind = np.zeros(N)
        for r in cfg.objects["set"]:
            ind[r % N] = 1.0
        fs = [CyclicFunction(N, ind) for _ in range(pat.t)]
    else:
        fs = [spec.materialize(N, i) for i, spec in enumerate(cfg.objects["specs"])]
    rep = transfer_gap(pat, fs, N, cfg.params["method"], cfg.workers, cfg.seed, cfg.params["samples"])
    out = rep.to_json()
    if "set" in cfg.objects:
        mod = count_configs(pat, cfg.objects["set"], N, "mod")
        integer = count_configs(pat, cfg.objects["set"], N, "integer")
        out["configurations"] = {"total": mod.total, "nontrivial": mod.nontrivial}
        if integer.nontrivial != mod.nontrivial:
            out["configurations"]["nontrivial_integer_convention"] = integer.nontrivial
    j = cfg.params["dual"]
    if j is not None:
        D = dual_function(pat, fs, N, j)
        out["dual"] = {"index": j, "mean_square": float(np.mean(np.abs(D.values) ** 2)),
                       "pairing": _cjson(np.mean(fs[j].values * D.values))}
    return out


def _run_gowers(cfg: RunConfig) -> dict:
    p = cfg.params
    spec, N, s = cfg.objects["spec"], p["N"], p["s"]
    budget = enumeration_budget()
    if p["interval"]:
        Nt = interval_modulus(N, s)
        value = gowers_norm_interval(spec.on_interval(N).values, s)
        return {"norm": value, "method": "fourier" if s == 2 else "direct", "embedding_modulus": Nt}
    f = spec.materialize(N)
    method = p["method"]
    if method == "auto":
        method = "fourier" if s == 2 else ("direct" if N ** (s + 1) <= budget else "sampled")
    if method == "fourier":
        if s != 2:
            raise UsageError("the Fourier method computes U^2 only")
        return {"norm": gowers_norm_u2_fourier(f), "method": "fourier"}
    if method == "direct":
        return {"norm": gowers_norm_cyclic(f, s), "method": "direct"}
    est = gowers_norm_sampled(f, s, p["samples"], cfg.seed)
    return {"norm": est.value, "method": "sampled", "power_mean": est.power_mean,
            "stderr": est.stderr, "samples": est.samples}


def _run_gp_norm(cfg: RunConfig) -> dict:
    p = cfg.params
    f = cfg.objects["spec"].on_interval(p["N"])
    measures = cfg.objects["measures"]
    if p["exact"]:
        vals = f.values
        if np.any(np.imag(vals) != 0):
            raise UsageError("--exact needs a real-valued function")
        f = type(f)(f.start, np.array([Fraction(float(v.real)) for v in vals], dtype=object))
    cost = gp_cost(f, measures)
    if cost <= enumeration_budget():
        power = gp_norm_power(f, p["N"], measures)
        out = {"norm": float(power) ** (1.0 / 2 ** len(measures)) if power > 0 else 0.0,
               "method": "exact" if p["exact"] else "expansion", "terms": cost}
        if p["exact"]:
            out["power"] = str(power)
        return out
    est = gp_norm_sampled(f, p["N"], measures, p["samples"], cfg.seed)
    return {"norm": est.value, "method": "sampled", "power_mean": est.power_mean,
            "stderr": est.stderr, "samples": est.samples}


def _run_hensel(cfg: RunConfig) -> dict:
    from patkit.wtrick import verify_hensel

    return verify_hensel(cfg.objects["Q"], cfg.objects["ref"], int(cfg.params["q"])).to_json()


def _run_wtrick(cfg: RunConfig) -> dict:
    from patkit.wtrick import (RangeEmpty, WTrickContext, admissible_summary, model_z_range,
                               nu_mean, verify_hensel, Z_GRID_RULE)

    p = cfg.params
    ctx = WTrickContext.build(cfg.objects["P"], p["w"])
    out = ctx.to_json()
    m = ctx.W ** (ctx.d - ctx.d_prime)
    out["admissible"] = admissible_summary(ctx.P_W, m, p["admissible_cap"]).to_json()
    ref = UniPoly({ctx.d_prime: 1})
    out["hensel"] = verify_hensel(ctx.P_W, ref, ctx.W ** 2).to_json()
    N = p["N"]
    if N is not None:
        info: dict[str, Any] = {"N": N, "nu_scale": ctx.nu_scale(N), "z_grid": Z_GRID_RULE,
                                "model_y_range": ctx.model_y_range(N),
                                "model_z_range": list(model_z_range(N)),
                                "w_y_range": [ctx.w_y_range(Fraction(1, 2), N), ctx.w_y_range(1, N)]}
        try:
            info["nu_mean"] = nu_mean(ctx, N)
        except RangeEmpty as exc:
            info["nu_mean"] = None
            info["note"] = str(exc)
        out["operators"] = info
    return out


def _run_extremal(cfg: RunConfig) -> dict:
    from patkit.extremal import greedy_free, max_free_exact

    pat, p = cfg.objects["pattern"], cfg.params
    if p["mode"] == "greedy":
        return greedy_free(pat, p["N"], p["greedy_seed"]).to_json()
    return max_free_exact(pat, p["N"], p["budget"]).to_json()


def _run_reproduce(cfg: RunConfig) -> dict:
    from patkit.reference_examples import reproduce_reference_examples

    items = reproduce_reference_examples()
    for it in items:
        print(f"{'PASS' if it.passed else 'FAIL'}  {it.name}", file=sys.stderr)
    return {"passed": sum(i.passed for i in items), "failed": sum(not i.passed for i in items),
            "all_passed": all(i.passed for i in items), "items": [i.to_json() for i in items]}


_DISPATCH = {
    "classify": _run_classify,
    "transfer-gap": _run_transfer_gap,
    "gowers": _run_gowers,
    "gp-norm": _run_gp_norm,
    "hensel-check": _run_hensel,
    "wtrick": _run_wtrick,
    "extremal": _run_extremal,
    "reproduce": _run_reproduce,
}


# output ------------------------------------------------------------------------

def load_schema(command: str) -> dict:
    """The published JSON schema for the report of ``command``."""
    if command not in COMMANDS:
        raise KeyError(command)
    text = resources.files("patkit").joinpath("schemas", f"{command}.schema.json").read_text("utf-8")
    return json.loads(text)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    row = {}
    for key, val in sorted(report["result"].items()):
        if isinstance(val, bool):
            continue
        if isinstance(val, (int, float)):
            row[key] = val
        elif isinstance(val, dict) and set(val) == {"re", "im"}:
            row[f"{key}.re"], row[f"{key}.im"] = val["re"], val["im"]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    writer.writeheader()
    writer.writerow(row)
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def execute(cfg: RunConfig) -> tuple[dict, int]:
    """Run a command and build its report (the report holds an error on failure)."""
    start = time.perf_counter()
    code = EXIT_OK
    try:
        result = _DISPATCH[cfg.command](cfg)
        if cfg.command == "reproduce" and not result["all_passed"]:
            code = EXIT_COMPUTE
    except UsageError as exc:
        result, code = {"error": str(exc), "error_type": "usage"}, EXIT_USAGE
    except (BudgetExceeded, ArithmeticError, ValueError, AssertionError, RuntimeError) as exc:
        result, code = {"error": str(exc), "error_type": type(exc).__name__}, EXIT_COMPUTE
    report = {"command": cfg.command, "config": cfg.to_json(), "result": result,
              "timing": {"elapsed_seconds": time.perf_counter() - start}}
    return report, code


def run(cfg: RunConfig) -> int:
    report, code = execute(cfg)
    text = render(report, cfg.format)
    if cfg.output:
        write_atomic(cfg.output, text)
    else:
        sys.stdout.write(text)
    if "error" in report["result"]:
        print(f"patkit {cfg.command}: {report['result']['error']}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
