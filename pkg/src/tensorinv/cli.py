"""Command-line interface.

Exit status: 0 success, 1 domain or input error, 2 budget exhausted or
inconclusive, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import delta, exterior, fixtures, kronecker, latin
from .config import OUTPUT_FORMATS, RunConfig, resolve_config
from .core import BalancedTable, Hypermatrix, Partition
from .errors import DomainError, InvariantViolation, TensorInvError

SCHEMA = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors are input errors (exit 1), not budget errors
        raise DomainError(f"{self.prog}: {message}")


def _read_json(path: str, what: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise DomainError(f"{what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"{what} file {path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _load(path: str, cls, what: str):
    data = _read_json(path, what)
    if not isinstance(data, dict):
        raise DomainError(f"{what} file {path}: top level must be an object")
    try:
        return cls.from_json(data)
    except (TypeError, KeyError) as exc:
        raise DomainError(f"{what} file {path}: malformed field ({exc})") from None


def _scalar(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return str(x)
    return x


# ---------------------------------------------------------------------------
# subcommands; each returns (result, plain_text)


def cmd_delta_eval(args, cfg: RunConfig):
    T = _load(args.table, BalancedTable, "table")
    X = _load(args.tensor, Hypermatrix, "tensor")
    v = delta.delta_eval(T, X, max_nodes=cfg.max_nodes, workers=cfg.threads)
    return {"value": _scalar(v)}, _scalar(v)


def cmd_delta_eval_unit(args, cfg: RunConfig):
    T = _load(args.table, BalancedTable, "table")
    v = delta.delta_eval_unit(T, args.n, workers=cfg.threads, allow_large=cfg.allow_large)
    return {"value": _scalar(v)}, _scalar(v)


def cmd_delta_fundamental(args, cfg: RunConfig):
    T = delta.fundamental_table_reduced(args.d, args.k) if args.reduced else delta.fundamental_table(args.d, args.k)
    return {"table": T.to_json()}, json.dumps(T.to_json())


def cmd_delta_concat(args, cfg: RunConfig):
    T1 = _load(args.first, BalancedTable, "table")
    T2 = _load(args.second, BalancedTable, "table")
    T = delta.vconcat(T1, T2) if args.vertical else delta.hconcat(T1, T2)
    return {"table": T.to_json()}, json.dumps(T.to_json())


def cmd_latin_count(args, cfg: RunConfig):
    T = _load(args.type, latin.MagicSet, "magic set")
    c = latin.count_latin(T)
    return {"count": _scalar(c)}, _scalar(c)


def cmd_latin_at(args, cfg: RunConfig):
    if args.type:
        T = _load(args.type, latin.MagicSet, "magic set")
        if (T.d, T.k) != (args.d, args.k):
            raise DomainError(f"magic set is over [{T.k}]^{T.d}, not [{args.k}]^{args.d}")
    else:
        T = latin.MagicSet.full(args.d, args.k)
    v = latin.alon_tarsi(
        T,
        reduce_symbols=not args.no_reduce,
        workers=cfg.threads,
        prefix_depth=args.prefix_depth,
        checkpoint=args.checkpoint,
        allow_large=cfg.allow_large,
    )
    return {"value": _scalar(v)}, _scalar(v)


def cmd_latin_signs(args, cfg: RunConfig):
    C = _load(args.cube, latin.PartialLatinHypercube, "hypercube")
    out = {
        "directional": [latin.directional_sign(C, l) for l in range(1, C.d + 1)],
        "full": latin.full_sign(C),
        "symbol": latin.symbol_sign(C),
        "magic_set": latin.magic_set_sign(C.type),
    }
    return out, json.dumps(out)


def cmd_latin_magic_sets(args, cfg: RunConfig):
    if args.list:
        sets = [T.to_json() for T in latin.enumerate_magic_sets(args.d, args.k, args.n)]
        return {"count": str(len(sets)), "magic_sets": sets}, "\n".join(json.dumps(s) for s in sets)
    c = latin.count_magic_sets(args.d, args.k, args.n)
    return {"count": _scalar(c)}, _scalar(c)


def cmd_hwv_omega(args, cfg: RunConfig):
    w = exterior.wedge_power(args.d, args.k, args.n)
    out: dict = {"terms": str(len(w.terms)), "zero": w.is_zero()}
    lines = []
    if args.check_hwv:
        hw = None if w.is_zero() else exterior.is_highest_weight(w)
        out["highest_weight"] = hw
        lines.append(json.dumps({"highest_weight": hw}))
    if args.expand:
        out["expansion"] = list(w.json_lines())
        lines.extend(json.dumps(t) for t in out["expansion"])
    if not lines:
        lines.append(f"{len(w.terms)} terms")
    return out, "\n".join(lines)


def _read_wedge_lines(path: str, d: int, k: int) -> exterior.WedgeVector:
    try:
        fh = sys.stdin if path == "-" else open(path)
    except OSError as exc:
        raise DomainError(f"vector file {path}: {exc.strerror}") from None
    acc = None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                cells = rec["cells"]
                coeff = int(rec["coeff"])
            except json.JSONDecodeError as exc:
                raise DomainError(f"vector file {path}, line {lineno}: invalid JSON ({exc.msg})") from None
            except KeyError as exc:
                raise DomainError(f"vector file {path}, line {lineno}: missing field {exc}") from None
            except (TypeError, ValueError):
                raise DomainError(f"vector file {path}, line {lineno}: field 'coeff' is not an integer") from None
            term = exterior.WedgeVector.basis(d, k, cells, coeff)
            acc = term if acc is None else acc + term
    if acc is None:
        raise DomainError(f"vector file {path}: no terms")
    return acc


def cmd_hwv_check(args, cfg: RunConfig):
    v = _read_wedge_lines(args.vector, args.d, args.k)
    hw = exterior.is_highest_weight(v)
    return {"highest_weight": hw}, "true" if hw else "false"


def _cache(cfg: RunConfig):
    return kronecker.CoefficientCache(cfg.cache_path) if cfg.cache_path else None


def cmd_kron_g(args, cfg: RunConfig):
    try:
        parts = json.loads(args.parts)
    except json.JSONDecodeError as exc:
        raise DomainError(f"--parts: invalid JSON ({exc.msg})") from None
    if not isinstance(parts, list) or not all(isinstance(p, list) for p in parts):
        raise DomainError("--parts: expected a list of integer lists")
    lams = [Partition(tuple(p)) for p in parts]
    cache = _cache(cfg)
    try:
        v = kronecker.kronecker_char(lams, max_size=cfg.max_partition_size, cache=cache)
    finally:
        if cache:
            cache.close()
    return {"value": _scalar(v)}, _scalar(v)


def cmd_kron_rect(args, cfg: RunConfig):
    cache = _cache(cfg)
    try:
        if args.method == "char":
            v = kronecker.g_rect(args.d, args.n, args.k, max_size=cfg.max_partition_size, cache=cache)
        elif args.method == "kernel":
            v = kronecker.g_rect_kernel(args.d, args.n, args.k, max_basis=cfg.max_basis)
        else:
            v = kronecker.g_recursive(args.d, args.n, args.k, max_size=cfg.max_partition_size, cache=cache)
    finally:
        if cache:
            cache.close()
    return {"value": _scalar(v)}, _scalar(v)


def cmd_kron_degree(args, cfg: RunConfig):
    cache = _cache(cfg)
    try:
        v = kronecker.delta_degree(args.d, args.n, max_size=cfg.max_partition_size, cache=cache)
    finally:
        if cache:
            cache.close()
    return {"value": _scalar(v)}, _scalar(v)


def _fixture_report(name: str, cfg: RunConfig):
    cache = _cache(cfg)
    try:
        rows = fixtures.reproduce_fixture(name, max_size=cfg.max_partition_size, cache=cache)
    finally:
        if cache:
            cache.close()
    failed = [r for r in rows if r["status"] == "fail"]
    lines = []
    for r in rows:
        args_txt = " ".join(f"{k}={v}" for k, v in r["args"].items())
        got = "-" if r["actual"] is None else r["actual"]
        lines.append(f"{r['status']:<15} {args_txt:<16} expected={r['expected']} actual={got}  [{r['source']}]")
    result = {
        "fixture": name,
        "cells": [{**r, "expected": str(r["expected"]), "actual": None if r["actual"] is None else str(r["actual"])}
                  for r in rows],
        "passed": sum(r["status"] == "pass" for r in rows),
        "failed": len(failed),
        "not_reproduced": sum(r["status"] == fixtures.NOT_REPRODUCED for r in rows),
    }
    return result, "\n".join(lines), bool(failed)


def cmd_kron_table(args, cfg: RunConfig):
    return _fixture_report(args.fixture, cfg)


def cmd_fixtures_list(args, cfg: RunConfig):
    tabs = fixtures.fixtures()
    out = [{"name": t.name, "title": t.title, "cells": len(t.cells)} for t in tabs.values()]
    return {"fixtures": out}, "\n".join(f"{t['name']:<8} {t['cells']:>3} cells  {t['title']}" for t in out)


def cmd_fixtures_run(args, cfg: RunConfig):
    return _fixture_report(args.name, cfg)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--format", dest="output", choices=OUTPUT_FORMATS, help="output format (default plain)")
    common.add_argument("--cache", dest="cache_path", help="Kronecker coefficient cache file (JSON lines)")
    common.add_argument("--max-partition-size", type=int, help="largest partition size for character sums")
    common.add_argument("--max-basis", type=int, help="largest weight-space basis for the kernel method")
    common.add_argument("--max-nodes", type=int, help="search-node budget for delta evaluation")
    common.add_argument("--threads", type=int, help="worker processes")
    common.add_argument("--allow-large", action="store_true", default=None, help="permit large full-cube enumerations")

    p = _Parser(prog="tensorinv", description="Exact tensor invariants, Latin hypercube signs, Kronecker coefficients.")
    top = p.add_subparsers(dest="group", required=True)

    def sub(group, name, func, help_):
        sp = group.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func, command=name)
        return sp

    g = top.add_parser("delta", help="Δ invariants of balanced tables").add_subparsers(dest="sub", required=True)
    sp = sub(g, "eval", cmd_delta_eval, "evaluate Δ_T at a tensor")
    sp.add_argument("--table", required=True)
    sp.add_argument("--tensor", required=True)
    sp = sub(g, "eval-unit", cmd_delta_eval_unit, "evaluate Δ_T at the unit tensor I_n")
    sp.add_argument("--table", required=True)
    sp.add_argument("-n", type=int, required=True)
    sp = sub(g, "fundamental", cmd_delta_fundamental, "print the table whose columns are [k]^d")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--reduced", action="store_true", help="drop the constant columns")
    sp = sub(g, "concat", cmd_delta_concat, "concatenate two tables")
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("--vertical", action="store_true", help="stack rows instead of columns")

    g = top.add_parser("latin", help="Latin hypercubes and Alon-Tarsi sums").add_subparsers(dest="sub", required=True)
    sp = sub(g, "count", cmd_latin_count, "count partial Latin hypercubes of a type")
    sp.add_argument("--type", required=True)
    sp = sub(g, "at", cmd_latin_at, "Alon-Tarsi signed sum")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--type", help="magic set JSON (default: the full box)")
    sp.add_argument("--no-reduce", action="store_true", help="enumerate every symbol labeling")
    sp.add_argument("--prefix-depth", type=int, help="cells fixed per parallel task")
    sp.add_argument("--checkpoint", help="JSON-lines file of finished prefixes, for resuming")
    sp = sub(g, "signs", cmd_latin_signs, "directional, full, symbol and magic-set signs")
    sp.add_argument("--cube", required=True)
    sp = sub(g, "magic-sets", cmd_latin_magic_sets, "count or list magic sets")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--list", action="store_true")

    g = top.add_parser("hwv", help="exterior algebra and highest weight vectors").add_subparsers(dest="sub", required=True)
    sp = sub(g, "omega", cmd_hwv_omega, "the n-th wedge power of ω")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("-n", type=int, default=1)
    sp.add_argument("--check-hwv", action="store_true")
    sp.add_argument("--expand", action="store_true", help="print every term as a JSON line")
    sp = sub(g, "check", cmd_hwv_check, "test a vector (JSON lines) for the highest weight property")
    sp.add_argument("--vector", required=True)
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-k", type=int, required=True)

    g = top.add_parser("kron", help="Kronecker coefficients").add_subparsers(dest="sub", required=True)
    sp = sub(g, "g", cmd_kron_g, "coefficient of a list of partitions")
    sp.add_argument("--parts", required=True, help='JSON list, e.g. "[[2,2],[2,2],[2,2]]"')
    sp = sub(g, "rect", cmd_kron_rect, "g_d(n,k) at d copies of n x k")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--method", choices=("char", "kernel", "recursive"), default="char")
    sp = sub(g, "degree", cmd_kron_degree, "least degree of a nonzero invariant, δ_d(n)")
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-n", type=int, required=True)
    sp = sub(g, "table", cmd_kron_table, "reproduce a reference table")
    sp.add_argument("--fixture", required=True)

    g = top.add_parser("fixtures", help="reference tables").add_subparsers(dest="sub", required=True)
    sub(g, "list", cmd_fixtures_list, "list the shipped tables")
    sp = sub(g, "run", cmd_fixtures_run, "recompute a table and compare")
    sp.add_argument("name")
    return p


_CONFIG_FLAGS = ("output", "cache_path", "max_partition_size", "max_basis", "max_nodes", "threads", "allow_large")


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, list) and value and isinstance(value[0], (dict, list)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, out)
    elif isinstance(value, list):
        out[prefix] = " ".join(str(v) for v in value)
    else:
        out[prefix] = "" if value is None else value


def _emit(fmt: str, command: str, result: dict, plain: str, out) -> None:
    if fmt == "plain":
        out.write(f"{plain}\n")
    elif fmt == "json":
        out.write(json.dumps({"schema": SCHEMA, "command": command, "result": result}, sort_keys=True) + "\n")
    else:
        flat: dict = {"schema": SCHEMA, "command": command}
        _flatten("", result, flat)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(flat.keys())
        w.writerow(flat.values())
        out.write(buf.getvalue())


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        flags = {k: getattr(args, k, None) for k in _CONFIG_FLAGS}
        cfg = resolve_config(flags, args.config)
        ret = args.func(args, cfg)
        result, plain = ret[0], ret[1]
        failed = len(ret) > 2 and ret[2]
        _emit(cfg.output, f"{args.group} {args.command}", result, plain, out)
        if failed:
            err.write("error: fixture mismatch\n")
            return 1
        return 0
    except TensorInvError as exc:
        err.write(f"error: {exc}\n")
        return exc.exit_code
    except RecursionError:
        err.write("error: recursion limit reached\n")
        return InvariantViolation.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
