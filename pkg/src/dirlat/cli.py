"""Command-line front end. Every command prints one JSON document on stdout."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import DirlatError, PreconditionError
from .metric import (
    ScaledInstance, ZeroOptimum, as_fraction, dump_instance, fmt, generate_random, load_instance,
    path_latency, regret_transform, scale_instance,
)

HORIZON_CAP = 256


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    solution: Optional[str] = None
    rho: Fraction = Fraction(2, 3)
    epsilon: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    mode: str = "guided"
    backend: str = "exact"
    seed: int = 0
    cap: int = 14
    n: int = 6
    max_dist: int = 10
    symmetric: bool = False
    strengthened: bool = False
    claim: bool = False

    def problems(self) -> list:
        out = []
        if not Fraction(1, 2) < self.rho <= 1:
            out.append("rho must lie in (1/2, 1]")
        if self.delta is not None and not Fraction(1, 2) < self.delta < self.rho:
            out.append("delta must lie in (1/2, rho)")
        if self.epsilon is not None and self.epsilon <= 0:
            out.append("epsilon must be positive")
        return out


def _frac(text):
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dirlat")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--output")
    common.add_argument("--rho", type=_frac, default=Fraction(2, 3))
    common.add_argument("--epsilon", type=_frac)
    common.add_argument("--delta", type=_frac)
    common.add_argument("--mode", choices=["guided", "exhaustive"], default="guided")
    common.add_argument("--backend", choices=["exact", "lp-round", "regret"], default="exact")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cap", type=int, default=14)
    g = sub.add_parser("generate", parents=[common])
    g.add_argument("--n", type=int, default=6)
    g.add_argument("--max-dist", type=int, default=10)
    g.add_argument("--symmetric", action="store_true")
    sub.add_parser("solve-dirlat", parents=[common])
    sub.add_parser("solve-atspp", parents=[common])
    sub.add_parser("regret", parents=[common])
    sub.add_parser("gap", parents=[common])
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("--solution", required=True, help='JSON object {"u,v": "p/q"}')
    v.add_argument("--strengthened", action="store_true")
    v.add_argument("--claim", action="store_true")
    return p


def _config(ns) -> RunConfig:
    fields = {k: v for k, v in vars(ns).items() if v is not None and k in RunConfig.__dataclass_fields__}
    return RunConfig(**fields)


def _read_instance(cfg: RunConfig):
    if cfg.input is None:
        raise PreconditionError("--input is required")
    with open(cfg.input, encoding="utf-8") as fh:
        return load_instance(fh.read())


def cmd_generate(cfg: RunConfig):
    M = generate_random(cfg.n, cfg.max_dist, cfg.seed, cfg.symmetric)
    text = dump_instance(M)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return json.loads(text), True


def cmd_solve_dirlat(cfg: RunConfig):
    from .dirlat import solve

    M = _read_instance(cfg)
    integral = all(M.dist[u][v].denominator == 1 and M.dist[u][v] >= 1
                   for u in M.nodes for v in M.nodes if u != v)
    try:
        if cfg.epsilon is None and integral:
            S = ScaledInstance.from_integer(M)
        else:
            S = scale_instance(M, cfg.epsilon if cfg.epsilon is not None else Fraction(1, 10))
    except ZeroOptimum as z:
        return {"path": list(z.path), "latency": "0", "scaled": False, "checks": {}}, True
    if S.horizon > HORIZON_CAP:
        from .errors import CapacityError

        raise CapacityError(f"horizon {S.horizon} exceeds {HORIZON_CAP} for the time-indexed LP")
    path, cert = solve(S, cfg.rho, cfg.mode, cfg.backend, cfg.cap)
    if cert is None:
        return {"path": None, "reason": "no feasible guess under the cap"}, False
    doc = cert.to_json()
    doc["original_latency"] = fmt(path_latency(M, path))
    doc["scale_factor"] = fmt(S.scale_factor)
    return doc, cert.ok


def _endpoints(M):
    s = 0 if M.s is None else M.s
    t = M.n - 1 if M.t is None else M.t
    return s, t


def cmd_solve_atspp(cfg: RunConfig):
    from .atspp import round_path, solve_atspp_lp
    from .exact import exact_atspp

    M = _read_instance(cfg)
    s, t = _endpoints(M)
    state = solve_atspp_lp(M.with_endpoints(s, t), s, t, cfg.rho)
    _, cert = round_path(state)
    doc = cert.to_json()
    if M.n <= cfg.cap:
        doc["exact"] = fmt(exact_atspp(M, s, t, cap=cfg.cap).value)
    return doc, cert.ok


def cmd_regret(cfg: RunConfig):
    from .regret import round_regret

    M = _read_instance(cfg)
    s, t = _endpoints(M)
    reg = regret_transform(M.with_endpoints(s, t), s)
    _, cert = round_regret(reg, cfg.rho, cfg.delta, s, t)
    return cert.to_json(), cert.ok


def cmd_gap(cfg: RunConfig):
    from .exact import append_archive, gap_record, measure_gap

    M = _read_instance(cfg)
    s, t = _endpoints(M)
    ratio = measure_gap(M, s, t, cfg.rho)
    rec = gap_record(M, cfg.rho, ratio)
    if cfg.output:
        append_archive(cfg.output, rec)
    return {"ratio": rec["ratio"], "rho": rec["rho"]}, True


def cmd_verify(cfg: RunConfig):
    from .exact import verify_gap_certificate

    M = _read_instance(cfg)
    s, t = _endpoints(M)
    with open(cfg.solution, encoding="utf-8") as fh:
        raw = json.load(fh)
    x = {tuple(int(p) for p in k.split(",")): as_fraction(v) for k, v in raw.items()}
    verdict = verify_gap_certificate(M, x, cfg.rho, cfg.strengthened, cfg.claim, s, t)
    ok = verdict.feasible and verdict.meets_claim is not False
    return verdict.to_json(), ok


COMMANDS = {
    "generate": cmd_generate,
    "solve-dirlat": cmd_solve_dirlat,
    "solve-atspp": cmd_solve_atspp,
    "regret": cmd_regret,
    "gap": cmd_gap,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = _config(ns)
    bad = cfg.problems()
    if bad:
        print(json.dumps({"error": "; ".join(bad), "module": "cli"}))
        return 2
    try:
        doc, ok = COMMANDS[cfg.command](cfg)
    except (DirlatError, OSError) as exc:
        print(f"dirlat: {exc}", file=sys.stderr)
        step = getattr(exc, "step", None)
        print(json.dumps({"error": str(exc), "kind": type(exc).__name__, "module": step or cfg.command}))
        return 2
    text = json.dumps(doc)
    if cfg.output and cfg.command not in ("generate", "gap"):
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
