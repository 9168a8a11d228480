"""Command-line surface of the laboratory.

Subcommands
    scan      enumerate certified zeros of zeta^(k) up to a height
    count     N_k(T) rows with main term, error term, and bound ratios
    diagnose  one of {lemma22, lemma23, lemma4, fsum, boxes, theta}
    export    deterministic re-serialization of stored zeros

Grids are written start:stop:step (inclusive start, exclusive stop); a bare
number is a one-point grid.  Reports are CSV with '#' header lines that embed
the tool version, the effective configuration, the precision-policy
fingerprint, the run parameters, and the store content fingerprint, so a
report identifies the exact inputs that produced it.  Angle columns
(arg_Gk_top, arg_zeta_top) are in radians.

Exit codes: 0 success, 2 configuration or usage error, 3 computation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from . import __version__
from .argtrace import EdgeCache, TraceStats
from .config import LabConfig, load_config
from .countlab import (
    arg_profile,
    bound_profile,
    box_counts,
    box_partition,
    count,
    f_sum,
    lemma4_scan,
    lemma23_residual,
    theta_sum,
)
from .errors import ConfigError, ZdlError
from .evalcore import PrecisionPolicy
from .zeroscan import scan_strip
from .zerostore import ZeroStore

_DIAGNOSTICS = ("lemma22", "lemma23", "lemma4", "fsum", "boxes", "theta")

COUNT_COLUMNS = ("k,T,n_exact,main_term,e_term,arg_Gk_top,arg_zeta_top,"
                 "ratio_log,ratio_loglog,ratio_fgh")


@dataclass(frozen=True)
class RunConfig:
    """What was asked of a command, as serialized into the report header."""

    command: str
    params: Dict[str, object]
    out: Optional[str]

    def header_json(self) -> str:
        payload = {"command": self.command}
        payload.update(self.params)
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# argument parsing

def _grid(text: str) -> List[float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop <= start:
                raise ValueError
            n = math.ceil((stop - start) / step - 1e-9)
            return [start + i * step for i in range(n)]
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(
        f"{text!r} is not a number or start:stop:step grid")


def _int_grid(text: str) -> List[int]:
    vals = _grid(text)
    out = []
    for v in vals:
        if v != int(v):
            raise argparse.ArgumentTypeError(f"grid {text!r} must be integral")
        out.append(int(v))
    return out


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="zdl", description="certified zero counting for zeta derivatives")
    top.add_argument("--prec-bits", type=int, default=None,
                     help="override certified output bits")
    top.add_argument("--store", default=None, help="zero store path")
    top.add_argument("--out", default=None,
                     help="directory for report files (default: stdout)")
    sub = top.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="enumerate zeros of zeta^(k)")
    p_scan.add_argument("--k", type=int, required=True)
    p_scan.add_argument("--t-max", type=float, required=True)

    p_count = sub.add_parser("count", help="N_k(T) with main term and ratios")
    p_count.add_argument("--k", type=_int_grid, required=True)
    p_count.add_argument("--T", type=_grid, required=True)

    p_diag = sub.add_parser("diagnose", help="structural diagnostics")
    p_diag.add_argument("which", choices=_DIAGNOSTICS)
    p_diag.add_argument("--k", type=int, default=1)
    p_diag.add_argument("--ell", type=int, default=1)
    p_diag.add_argument("--T", type=_grid, default=None)
    p_diag.add_argument("--t", type=_grid, default=None)
    p_diag.add_argument("--sigma", type=_grid, default=None)
    p_diag.add_argument("--phi", default="log",
                        help="bound profile: log | loglog | fgh | custom:<expr>")

    p_exp = sub.add_parser("export", help="serialize stored zeros")
    p_exp.add_argument("--k", type=int, required=True)
    p_exp.add_argument("--t-max", type=float, required=True)
    p_exp.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    return top


# ---------------------------------------------------------------------------
# report plumbing

def _headers(run: RunConfig, config: LabConfig, policy: PrecisionPolicy,
             store: Optional[ZeroStore]) -> List[str]:
    return [
        f"tool: zdl {__version__}",
        "config: " + json.dumps(config.canonical_dict(), sort_keys=True,
                                separators=(",", ":")),
        "policy: " + policy.fingerprint(),
        "run: " + run.header_json(),
        "store: " + (store.content_fingerprint() if store is not None else "none"),
    ]


def _emit(run: RunConfig, filename: str, headers: Sequence[str],
          lines: Sequence[str]) -> None:
    text = "".join(f"# {h}\n" for h in headers)
    text += "".join(line + "\n" for line in lines)
    if run.out is None:
        sys.stdout.write(text)
        return
    os.makedirs(run.out, exist_ok=True)
    with open(os.path.join(run.out, filename), "w", newline="") as fh:
        fh.write(text)


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands

def _cmd_scan(args, config: LabConfig, policy: PrecisionPolicy) -> None:
    store = ZeroStore(args.store or config.store.path)
    run = RunConfig("scan", {"k": args.k, "t_max": args.t_max}, args.out)
    cache, stats = EdgeCache(), TraceStats()
    scan_strip(args.k, args.t_max, policy, config, store=store,
               cache=cache, stats=stats)
    blob = store.export_range(args.k, config.scan.t_floor, args.t_max,
                              policy.fingerprint(), "csv")
    lines = blob.decode().rstrip("\n").split("\n")
    _emit(run, f"scan_k{args.k}.csv", _headers(run, config, policy, store), lines)


def _cmd_count(args, config: LabConfig, policy: PrecisionPolicy) -> None:
    store = ZeroStore(args.store or config.store.path)
    run = RunConfig("count", {"k": args.k, "T": args.T}, args.out)
    cache, stats = EdgeCache(), TraceStats()
    rows = [COUNT_COLUMNS]
    for k in args.k:
        for T in args.T:
            rep = count(k, T, policy, config, store=store, cache=cache,
                        stats=stats)
            two_pi = 2.0 * math.pi
            rows.append(",".join([
                str(rep.k), _fmt(rep.T), str(rep.n_exact), _fmt(rep.main_term),
                _fmt(rep.e_term),
                _fmt(rep.edge_contribs[2] * two_pi),
                _fmt(rep.edge_contribs[3] * two_pi),
                _fmt(rep.bound_ratios["log"]),
                _fmt(rep.bound_ratios["log-over-loglog"]),
                _fmt(rep.bound_ratios["fgh-sqrt"]),
            ]))
    _emit(run, "count.csv", _headers(run, config, policy, store), rows)


def _require(args, attr: str, which: str):
    val = getattr(args, attr)
    if val is None:
        raise ConfigError(f"diagnose {which} requires --{attr}")
    return val


def _cmd_diagnose(args, config: LabConfig, policy: PrecisionPolicy) -> None:
    which = args.which
    cache, stats = EdgeCache(), TraceStats()
    store = ZeroStore(args.store or config.store.path)
    profile = bound_profile(args.phi)

    if which == "lemma22":
        T_grid = _require(args, "T", which)
        sigmas = _require(args, "sigma", which)
        run = RunConfig("diagnose", {"which": which, "ell": args.ell,
                                     "T": T_grid, "sigma": sigmas,
                                     "phi": args.phi}, args.out)
        rows = ["ell,T,sigma,arg_value,envelope,ratio"]
        for T in T_grid:
            for s in arg_profile(args.ell, T, sigmas, policy, config,
                                 profile=profile, cache=cache):
                rows.append(",".join([str(args.ell), _fmt(T), _fmt(s.sigma),
                                      _fmt(s.value), _fmt(s.envelope),
                                      _fmt(s.ratio)]))
    elif which == "lemma23":
        t_grid = _require(args, "t", which)
        sigmas = _require(args, "sigma", which)
        run = RunConfig("diagnose", {"which": which, "k": args.k,
                                     "t": t_grid, "sigma": sigmas}, args.out)
        zeros = scan_strip(args.k, max(t_grid) + 1.0, policy, config,
                           store=store, cache=cache, stats=stats)
        rows = ["k,sigma,t,n_zeros,re_log_deriv,im_log_deriv,"
                "re_zero_sum,im_zero_sum,residual"]
        for t in t_grid:
            for sigma in sigmas:
                r = lemma23_residual(args.k, complex(sigma, t), zeros,
                                     policy, config.eval)
                rows.append(",".join([
                    str(args.k), _fmt(sigma), _fmt(t), str(r.n_zeros),
                    _fmt(r.log_deriv.real), _fmt(r.log_deriv.imag),
                    _fmt(r.zero_sum.real), _fmt(r.zero_sum.imag),
                    _fmt(r.residual)]))
    elif which == "lemma4":
        t_grid = _require(args, "t", which)
        sigmas = _require(args, "sigma", which)
        run = RunConfig("diagnose", {"which": which, "ell": args.ell,
                                     "t": t_grid, "sigma": sigmas}, args.out)
        rep = lemma4_scan(args.ell, sigmas, t_grid, policy, config.eval)
        rows = ["ell,sigma,t,re_value,status"]
        for p in rep.samples:
            re_txt = "" if p.real_part is None else _fmt(p.real_part)
            rows.append(",".join([str(args.ell), _fmt(p.sigma), _fmt(p.t),
                                  re_txt, p.status]))
    elif which == "fsum":
        t_grid = _require(args, "t", which)
        run = RunConfig("diagnose", {"which": which, "k": args.k,
                                     "t": t_grid, "window": 50.0}, args.out)
        top = min(max(t_grid) + 50.0, config.scan.t_max)
        zeros = scan_strip(args.k, top, policy, config, store=store,
                           cache=cache, stats=stats)
        rows = ["k,t,window,value,n_terms,comparison,difference,tail_bound"]
        for t in t_grid:
            r = f_sum(args.k, t, zeros, window=50.0, policy=policy,
                      eval_cfg=config.eval)
            rows.append(",".join([
                str(args.k), _fmt(t), _fmt(r.window), _fmt(r.value),
                str(r.n_terms), _fmt(r.comparison), _fmt(r.difference),
                _fmt(r.tail_bound)]))
    elif which == "boxes":
        T_grid = _require(args, "T", which)
        run = RunConfig("diagnose", {"which": which, "k": args.k,
                                     "T": T_grid, "phi": args.phi}, args.out)
        rows = ["k,T,X,j,y,count,envelope"]
        for T in T_grid:
            part = box_partition(T, sigma_right=config.eval.sigma_k)
            rep = box_counts(args.k, part, policy, config, cache=cache,
                             stats=stats, profile=profile)
            for j, n, env in rep.per_box:
                rows.append(",".join([str(args.k), _fmt(T), _fmt(part.X),
                                      str(j), _fmt(part.boxes[j - 1].y),
                                      str(n), _fmt(env)]))
    else:  # theta
        T_grid = _require(args, "T", which)
        run = RunConfig("diagnose", {"which": which, "k": args.k,
                                     "T": T_grid}, args.out)
        top = min(max(T_grid) + 1.0, config.scan.t_max)
        zeros = scan_strip(args.k, top, policy, config, store=store,
                           cache=cache, stats=stats)
        rows = ["k,T,X,theta_total,n_zeros,x_log_t,delta_abs"]
        for T in T_grid:
            X = 1.0 / math.sqrt(math.log(T))
            r = theta_sum(args.k, T, X, zeros, policy, config, cache=cache)
            rows.append(",".join([str(args.k), _fmt(T), _fmt(X),
                                  _fmt(r.theta_total), str(r.n_zeros),
                                  _fmt(r.x_log_t), _fmt(r.delta_abs)]))

    _emit(run, f"{which}.csv", _headers(run, config, policy, store), rows)


def _cmd_export(args, config: LabConfig, policy: PrecisionPolicy) -> None:
    store = ZeroStore(args.store or config.store.path)
    run = RunConfig("export", {"k": args.k, "t_max": args.t_max,
                               "format": args.format}, args.out)
    blob = store.export_range(args.k, config.scan.t_floor, args.t_max,
                              policy.fingerprint(), args.format)
    lines = blob.decode().rstrip("\n").split("\n") if blob else []
    _emit(run, f"export_k{args.k}.{args.format}",
          _headers(run, config, policy, store), lines)


# ---------------------------------------------------------------------------
# entry point

def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config()
        policy = PrecisionPolicy(
            output_bits=args.prec_bits or config.eval.output_bits,
            guard_bits_base=config.eval.guard_base,
            guard_bits_per_log_t=config.eval.guard_per_log_t,
        )
        if args.command == "scan":
            _cmd_scan(args, config, policy)
        elif args.command == "count":
            _cmd_count(args, config, policy)
        elif args.command == "diagnose":
            _cmd_diagnose(args, config, policy)
        else:
            _cmd_export(args, config, policy)
    except (ConfigError, ValueError) as exc:
        print(f"zdl: configuration error: {exc}", file=sys.stderr)
        return 2
    except ZdlError as exc:
        print(f"zdl: {args.command} failed: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 3
    except AssertionError as exc:
        print(f"zdl: {args.command} failed cross-check: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
