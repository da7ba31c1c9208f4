"""Batch front door: field generation, norm/rate analyses, pencil queries,
solver runs, and the verification suites.

Subcommands: gen, norms, rates, pencil, solve, verify.  Every run writes a
RunManifest (key=value lines) before any output; identical parameter sets
reproduce byte-identical CSVs.  Floats print with 17 significant digits.
BESOVLAB_THREADS caps internal parallelism (all sweeps run within the cap;
the default pipeline is sequential and deterministic).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import math
import os
import sys
import time
from dataclasses import dataclass

from . import __version__
from .field import read_snapshot, write_snapshot
from .geometry import l_shape, load_geometry
from .norms import BesovSpec, KondratievSpec
from .wavelet import WaveletIndex, WaveletSystem, dwt_forward


def fmt(x) -> str:
    return f"{x:.17g}" if isinstance(x, float) else str(x)


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("BESOVLAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    input_hashes: dict
    version: str
    timestamp: float
    outputs: list

    def write(self, path) -> None:
        lines = [
            f"subcommand={self.subcommand}",
            f"version={self.version}",
            f"timestamp={self.timestamp!r}",
        ]
        for k in sorted(self.params):
            lines.append(f"param.{k}={fmt(self.params[k])}")
        for k in sorted(self.input_hashes):
            lines.append(f"input.{k}={self.input_hashes[k]}")
        for p in self.outputs:
            lines.append(f"output={p}")
        lines.append(f"identity={self.identity()}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def identity(self) -> str:
        """Hash of everything except the timestamp: runs with equal identity
        must reproduce outputs byte-identically."""
        h = hashlib.sha256()
        h.update(self.subcommand.encode())
        h.update(self.version.encode())
        for k in sorted(self.params):
            h.update(f"{k}={fmt(self.params[k])}".encode())
        for k in sorted(self.input_hashes):
            h.update(f"{k}={self.input_hashes[k]}".encode())
        return h.hexdigest()


def _hash_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _manifest(args, sub: str, params: dict, inputs: dict, outputs: list, outdir) -> None:
    hashes = {k: _hash_file(v) for k, v in inputs.items() if os.path.exists(v)}
    man = RunManifest(
        subcommand=sub,
        params=params,
        input_hashes=hashes,
        version=__version__,
        timestamp=time.time(),
        outputs=[str(o) for o in outputs],
    )
    man.write(os.path.join(outdir, "manifest.txt"))


def _outdir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _load_geom(args):
    if args.geom:
        return load_geometry(args.geom)
    return l_shape()


# -- gen ------------------------------------------------------------------------


def cmd_gen(args) -> int:
    from .profiles import bump_field, singular_field, wavelet_atom_field

    geom = _load_geom(args)
    out = _outdir(args)
    if args.kind == "singular":
        f = singular_field(geom, args.level, lam=args.lam)
    elif args.kind == "bump":
        f = bump_field(geom, args.level)
    elif args.kind == "wavelet-atom":
        idx = WaveletIndex(args.atom_level, (args.atom_k1, args.atom_k2), args.atom_type)
        f = wavelet_atom_field(geom, args.level, idx, order=args.order)
    elif args.kind == "manufactured":
        from .profiles import manufactured_pair
        from .field import sample

        u_exact, _ = manufactured_pair(T=1.0, center=_box_center(geom), radius=0.3 * geom.box.side)
        f = sample(geom, lambda X, Y: u_exact(X, Y, 0.5), args.level)
    else:
        raise SystemExit(f"unknown field kind {args.kind!r}")
    path = os.path.join(out, f"{args.kind}.psnp")
    params = dict(kind=args.kind, level=args.level, lam=args.lam, order=args.order)
    _manifest(args, "gen", params, {"geom": args.geom} if args.geom else {}, [path], out)
    write_snapshot(f, path)
    print(f"wrote {path}")
    return 0


def _box_center(geom):
    b = geom.box
    return (b.lo[0] + 0.5 * b.side, b.lo[1] + 0.5 * b.side)


# -- norms ----------------------------------------------------------------------


def _parse_spec(spec: str):
    """besov:s=1.5,p=2,q=2 | kondratiev:m=2,p=2,a=1 | sobolev:m=1,p=2"""
    head, _, body = spec.partition(":")
    kv = dict(item.split("=") for item in body.split(",") if item)
    return head, {k: float(v) for k, v in kv.items()}


def cmd_norms(args) -> int:
    from .norms import besov_norm_modulus, besov_norm_wavelet, kondratiev_norm, sobolev_norm

    geom = _load_geom(args)
    out = _outdir(args)
    f = read_snapshot(args.field, geom=geom)
    head, kv = _parse_spec(args.spec)
    rows = []
    if head == "besov":
        spec = BesovSpec(s=kv["s"], p=kv["p"], q=kv.get("q", kv["p"]))
        if args.method in ("wavelet", "both"):
            tree = dwt_forward(f, WaveletSystem(args.order))
            rep = besov_norm_wavelet(tree, spec)
            rows.append(["wavelet", fmt(spec.s), fmt(spec.p), fmt(spec.q), fmt(rep.value), rep.flag, f.level])
        if args.method in ("modulus", "both"):
            rep = besov_norm_modulus(f, spec)
            rows.append(["modulus", fmt(spec.s), fmt(spec.p), fmt(spec.q), fmt(rep.value), rep.flag, f.level])
    elif head == "kondratiev":
        spec = KondratievSpec(m=int(kv["m"]), p=kv["p"], a=kv["a"])
        rep = kondratiev_norm(f, geom, spec, weight_mode=args.weight_mode)
        rows.append(["quadrature", fmt(float(spec.m)), fmt(spec.p), fmt(spec.a), fmt(rep.value), rep.flag, f.level])
    elif head == "sobolev":
        v = sobolev_norm(f, int(kv["m"]), kv["p"])
        rows.append(["quadrature", fmt(kv["m"]), fmt(kv["p"]), "", fmt(v), "ok", f.level])
    else:
        raise SystemExit(f"unknown norm spec {head!r}")
    path = os.path.join(out, "norms.csv")
    params = dict(spec=args.spec, method=args.method, order=args.order, weight_mode=args.weight_mode)
    _manifest(args, "norms", params, {"field": args.field}, [path], out)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "s_or_m", "p", "q_or_a", "value", "flag", "level"])
        w.writerows(rows)
    for r in rows:
        print(",".join(str(c) for c in r))
    return 0


# -- rates ----------------------------------------------------------------------


def cmd_rates(args) -> int:
    from .approx import rate_experiment, uniform_rate_experiment

    geom = _load_geom(args)
    out = _outdir(args)
    f = read_snapshot(args.field, geom=geom)
    nlev = min(args.max_level, f.level)
    tree = dwt_forward(f, WaveletSystem(args.order), nlev)
    rr = rate_experiment(tree)
    ur = uniform_rate_experiment(tree)
    path = os.path.join(out, "rates.csv")
    params = dict(order=args.order, max_level=args.max_level)
    _manifest(args, "rates", params, {"field": args.field}, [path], out)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "N", "error"])
        for n, e in rr.pairs:
            w.writerow(["nonlinear", n, fmt(float(e))])
        for n, e in ur.pairs:
            w.writerow(["uniform", n, fmt(float(e))])
        w.writerow(["alpha", fmt(rr.alpha), fmt(rr.residual)])
        w.writerow(["alpha_uniform", fmt(ur.alpha), fmt(ur.residual)])
    print(f"nonlinear alpha {fmt(rr.alpha)}  uniform alpha {fmt(ur.alpha)}")
    return 0


# -- pencil ---------------------------------------------------------------------


def _parse_angle(text: str) -> float:
    if text.endswith("deg"):
        return math.radians(float(text[:-3]))
    if text.endswith("rad"):
        return float(text[:-3])
    return float(text)


def cmd_pencil(args) -> int:
    from .pencil import admissible_weight_range, cap_eigenvalues, gamma_m, pencil_pair, wedge_delta

    out = _outdir(args)
    path = os.path.join(out, "pencil.csv")
    rows = []
    if args.cap:
        theta0 = _parse_angle(args.cap)
        lams = cap_eigenvalues(theta0, args.count)
        for i, L in enumerate(lams, start=1):
            lm, lp = pencil_pair(float(L))
            rows.append(["cap-eigenvalue", fmt(theta0), str(i), fmt(float(L)), fmt(lm), fmt(lp)])
        params = dict(cap=args.cap, count=args.count)
    elif args.wedge:
        theta = _parse_angle(args.wedge)
        gm = gamma_m(args.gamma, args.m)
        wr = admissible_weight_range(args.m, gm, [theta])
        rows.append([
            "weight-range", fmt(theta), fmt(wedge_delta(theta)),
            fmt(wr.lower), fmt(wr.upper), str(wr.feasible).lower(),
        ])
        params = dict(wedge=args.wedge, m=args.m, gamma=args.gamma)
    else:
        raise SystemExit("pencil needs --cap or --wedge")
    _manifest(args, "pencil", params, {}, [path], out)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "angle", "col3", "col4", "col5", "col6"])
        w.writerows(rows)
    for r in rows:
        print(",".join(r))
    return 0


# -- solve ----------------------------------------------------------------------


def cmd_solve(args) -> int:
    from .parabolic import SolverConfig, linear_solve, picard_semilinear

    geom = _load_geom(args)
    out = _outdir(args)
    dt = args.dt if args.dt else args.T / max(2 ** args.level // 2, 8)
    forcing = args.forcing or "t*exp(-((x-0.55)**2+(y-0.55)**2)/0.08)"
    cfg = SolverConfig(
        geom=geom, level=args.level, dt=dt, T=args.T, forcing=forcing,
        eps=args.eps, M=args.M,
    )
    snap_times = [args.T / 2, args.T]
    params = dict(level=args.level, dt=dt, T=args.T, eps=args.eps, M=args.M, forcing=forcing)
    outputs = [os.path.join(out, f"snapshot_{i}.psnp") for i in range(len(snap_times))]
    _manifest(args, "solve", params, {"geom": args.geom} if args.geom else {}, outputs, out)
    if args.eps > 0:
        traj, trace = picard_semilinear(cfg)
        print(f"picard status {trace.status} q {fmt(trace.q_estimate)} "
              f"eps_bound {fmt(trace.eps_bound)} residuals {len(trace.residuals)}")
        if trace.status == "contraction-failed":
            print("contraction-failed", file=sys.stderr)
    else:
        traj = linear_solve(cfg, snapshot_times=snap_times)
    for t, path in zip(snap_times, outputs):
        write_snapshot(traj.field_at(t), path)
        print(f"wrote {path}")
    return 0


# -- verify ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .verify import SUITES, run_suites

    names = list(SUITES) if args.suite == "all" else [args.suite]
    out = _outdir(args)
    path = os.path.join(out, "verify.csv")
    params = dict(suite=args.suite, fault=args.inject_fault or "")
    _manifest(args, "verify", params, {}, [path], out)
    results = run_suites(names, fault=args.inject_fault)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["suite", "check", "passed", "detail"])
        for suite, check, ok, detail in results:
            w.writerow([suite, check, str(ok).lower(), detail])
    n_fail = 0
    for suite, check, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {suite}/{check}: {detail}")
        n_fail += 0 if ok else 1
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 1 if n_fail else 0


# -- entry ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="besovlab", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--geom", help="geometry spec file (key=value)")
        p.add_argument("--out", help="output directory", default=".")

    g = sub.add_parser("gen", help="generate a test field snapshot")
    common(g)
    g.add_argument("--kind", required=True,
                   choices=["singular", "bump", "wavelet-atom", "manufactured"])
    g.add_argument("--level", type=int, default=6)
    g.add_argument("--lam", type=float, default=None)
    g.add_argument("--order", type=int, default=4)
    g.add_argument("--atom-level", type=int, default=4)
    g.add_argument("--atom-k1", type=int, default=1)
    g.add_argument("--atom-k2", type=int, default=1)
    g.add_argument("--atom-type", default="hh")
    g.set_defaults(fn=cmd_gen)

    n = sub.add_parser("norms", help="evaluate a norm on a field snapshot")
    common(n)
    n.add_argument("--field", required=True)
    n.add_argument("--spec", required=True,
                   help="besov:s=..,p=..,q=.. | kondratiev:m=..,p=..,a=.. | sobolev:m=..,p=..")
    n.add_argument("--method", default="both", choices=["wavelet", "modulus", "both"])
    n.add_argument("--order", type=int, default=4)
    n.add_argument("--weight-mode", default="singular", choices=["singular", "boundary"])
    n.set_defaults(fn=cmd_norms)

    r = sub.add_parser("rates", help="best-N-term and uniform error rates")
    common(r)
    r.add_argument("--field", required=True)
    r.add_argument("--order", type=int, default=4)
    r.add_argument("--max-level", type=int, default=10)
    r.set_defaults(fn=cmd_rates)

    p = sub.add_parser("pencil", help="pencil eigenvalues and weight ranges")
    common(p)
    p.add_argument("--cap", help="cap half-angle, e.g. 90deg")
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--wedge", help="wedge opening, e.g. 270deg")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--gamma", type=int, default=2)
    p.set_defaults(fn=cmd_pencil)

    s = sub.add_parser("solve", help="heat / semilinear solve")
    common(s)
    s.add_argument("--level", type=int, default=6)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=None)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--M", type=int, default=2)
    s.add_argument("--forcing", help="expression in x, y, t")
    s.set_defaults(fn=cmd_solve)

    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("suite", choices=["norms", "pencil", "rates", "picard", "all"])
    v.add_argument("--inject-fault", choices=["mis-scaled-weight"], default=None)
    v.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    cap = thread_cap()
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(cap))
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
