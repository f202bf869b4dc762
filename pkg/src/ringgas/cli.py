"""Command-line entry point: reproducible experiments writing CSV/JSON.

Subcommands mirror the library modules (`basis`, `branches`, `yrast`,
`fidelity-sweep`, `conditional`, `sample`, `notch-hist`, `bohmian`,
`gpe`) plus `fig`, which orchestrates the data bundles for the standard
figures.  All outputs carry a provenance header and are byte-identical
for a fixed configuration and seed (single-threaded).

States are addressed with a small spec language:

    fock:n0=4,n1=4          occupation list, modes may be negative (n-1=4)
    yrast:N=8,K=4,g=0.08    lowest state of the (N, K) block, solved here
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .basis import BasisError, FockState, enumerate_basis, two_branches
from .bohmian import harmonic_notch_position, histogram_notch_depth, integrate
from .hamiltonian import (
    ConvergenceError,
    ModelParams,
    StateVector,
    fidelity_sweep,
    find_yrast,
)
from .meanfield import average_momentum, gpe_soliton, healing_length
from .sampling import (
    SampleSet,
    align_samples,
    histogram,
    metropolis_sample,
    notch_depth_histogram,
    sequential_sample,
)
from .wavefunction import conditional, two_mode_view

FIGURES = ("fig2", "fig3", "fig5", "fig7", "fig8", "fig9")


class UsageError(ValueError):
    """Bad configuration: maps to exit code 2."""


# ---------------------------------------------------------------------------
# state specs


def parse_state_spec(spec: str, L: float = 1.0, seed=12345, k_max: int | None = None):
    """FockState or solved StateVector from the mini-language."""
    try:
        kind, _, body = spec.partition(":")
        if kind == "fock":
            occupations = {}
            for item in body.split(","):
                key, _, val = item.partition("=")
                if not key.startswith("n"):
                    raise UsageError(f"bad occupation token {item!r}")
                occupations[int(key[1:])] = int(val)
            return FockState.from_occupations(occupations, k_max=k_max)
        if kind == "yrast":
            kv = dict(item.split("=") for item in body.split(","))
            params = ModelParams(
                N=int(kv["N"]),
                K=int(kv["K"]),
                k_max=int(kv.get("kmax", k_max or 4)),
                g=float(kv.get("g", 0.0)),
                L=float(kv.get("L", L)),
            )
            return find_yrast(params, seed=seed, check_degeneracy=False).state
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot parse state spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown state kind in {spec!r} (use fock: or yrast:)")


def _state_n(state) -> int:
    return state.particles if isinstance(state, FockState) else state.basis.N


def _dominant_fock(state) -> FockState:
    if isinstance(state, FockState):
        return state
    return state.top_components(1)[0][0]


# ---------------------------------------------------------------------------
# helpers


def _outdir(args) -> Path:
    out = args.outdir or os.environ.get("RINGGAS_OUTDIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _limit_threads(n: int | None):
    if not n:
        return
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=n)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(n)


def _hist_rows(hist):
    dens = hist.density
    return [
        (float(hist.bin_edges[i]), float(hist.bin_edges[i + 1]), int(hist.counts[i]), float(dens[i]))
        for i in range(hist.counts.size)
    ]


def _sample_for(state, args, L: float) -> SampleSet:
    method = getattr(args, "method", "auto")
    if method == "auto":
        fast = isinstance(state, FockState) and two_mode_view(state) is not None
        method = "sequential" if fast else "metropolis"
    if method == "sequential":
        return sequential_sample(state, args.n_samples, seed=args.seed, L=L)
    if method == "metropolis":
        return metropolis_sample(state, args.n_samples, seed=args.seed, L=L)
    raise UsageError(f"unknown sampling method {method!r}")


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_basis(args) -> int:
    basis = enumerate_basis(args.n, args.k, args.kmax)
    print(f"N={basis.N} K={basis.K} k_max={basis.k_max}: {len(basis)} states")
    for state in basis.states:
        print(f"  {state}")
    return 0


def cmd_branches(args) -> int:
    if args.n < 1 or args.kmax < 1:
        raise UsageError("need N >= 1 and k_max >= 1")
    table = two_branches(args.n, range(0, args.n + 1), args.l)
    cfg = {"command": "branches", "N": args.n, "k_max": args.kmax, "L": args.l}
    path = io.write_csv(_outdir(args) / (args.out or "branches.csv"),
                        ["K", "E_elementary", "E_yrast"], table, cfg)
    print(path)
    return 0


def cmd_yrast(args) -> int:
    params = ModelParams(N=args.n, K=args.k, k_max=args.kmax, g=args.g, L=args.l)
    res = find_yrast(params, tol=args.tol, seed=args.seed, method=args.method)
    payload = {
        "energy": res.energy,
        "residual": res.residual,
        "iterations": res.iterations,
        "degenerate": res.degenerate,
        "fidelity_with_free_yrast": res.fidelity_with_free_yrast()
        if 0 <= args.k <= args.n
        else None,
        "basis_size": len(res.state.basis),
        "top_amplitudes": [
            {"state": str(s), "re": c.real, "im": c.imag, "weight": abs(c) ** 2}
            for s, c in res.state.top_components(8)
        ],
    }
    cfg = {"command": "yrast", "N": args.n, "K": args.k, "k_max": args.kmax,
           "g": args.g, "L": args.l, "tol": args.tol, "method": args.method}
    path = io.write_json(_outdir(args) / (args.out or "yrast.json"), payload, cfg, args.seed)
    if args.amplitudes_csv:
        rows = [(i, c.real, c.imag) for i, c in enumerate(res.state.amplitudes)]
        io.write_csv(_outdir(args) / args.amplitudes_csv, ["index", "re", "im"], rows, cfg, args.seed)
    print(path)
    return 0


def cmd_fidelity_sweep(args) -> int:
    n_list = [int(x) for x in args.n_list.split(",")]
    if args.gn_grid:
        gn = [float(x) for x in args.gn_grid.split(",")]
    else:
        gn = [0.25, 0.5, 1.0, 2.0, 4.0]
    cfg = {"command": "fidelity-sweep", "N_list": n_list, "gN_grid": gn,
           "k_max": args.kmax, "L": args.l, "method": args.method}
    rows = []
    for N in n_list:
        table = fidelity_sweep([N], [g / N * args.l for g in gn], k_max=args.kmax,
                               L=args.l, tol=args.tol, seed=args.seed, method=args.method)
        for r in table:
            if r["error"]:
                print(f"warning: N={r['N']} g={r['g']}: {r['error']}", file=sys.stderr)
            xi_inv = math.sqrt(r["g"] * r["N"] / args.l)
            rows.append((r["N"], r["g"], xi_inv, r["fidelity"]))
    path = io.write_csv(_outdir(args) / (args.out or "fidelity_sweep.csv"),
                        ["N", "g", "xi_inverse", "fidelity"], rows, cfg, args.seed)
    print(path)
    return 0


def cmd_conditional(args) -> int:
    state = parse_state_spec(args.state, L=args.l, seed=args.seed, k_max=args.kmax)
    N = _state_n(state)
    fixed_source = "explicit"
    if args.fixed == "sample":
        draw_state = _dominant_fock(state)
        fixed_source = (
            "sequential" if draw_state is state else "dominant-fock-component"
        )
        fixed = sequential_sample(draw_state, 1, seed=args.seed, L=args.l,
                                  n_positions=N - 1).positions[0]
    else:
        fixed = np.array([float(x) for x in args.fixed.split(",")])
    if fixed.size != N - 1:
        raise UsageError(f"need N-1={N - 1} fixed positions, got {fixed.size}")
    cond = conditional(state, fixed, grid=args.grid, L=args.l)
    rows = list(zip(map(float, cond.grid), map(float, cond.density()), map(float, cond.phase())))
    cfg = {"command": "conditional", "state": args.state, "fixed_source": fixed_source,
           "fixed": [float(x) for x in fixed], "grid": args.grid, "L": args.l}
    path = io.write_csv(_outdir(args) / (args.out or "conditional.csv"),
                        ["x", "density", "phase"], rows, cfg, args.seed)
    print(path)
    return 0


def cmd_sample(args) -> int:
    state = parse_state_spec(args.state, L=args.l, seed=args.seed, k_max=args.kmax)
    samples = _sample_for(state, args, args.l)
    aligned = align_samples(samples) if args.align else samples
    hist = histogram(aligned, bins=args.bins)
    cfg = {"command": "sample", "state": args.state, "n_samples": args.n_samples,
           "bins": args.bins, "align": bool(args.align), "L": args.l,
           "method": samples.provenance["method"]}
    base = args.out or "sample"
    path = io.write_csv(_outdir(args) / f"{base}.csv",
                        ["bin_left", "bin_right", "count", "density"],
                        _hist_rows(hist), cfg, args.seed)
    io.write_json(_outdir(args) / f"{base}.json",
                  {"provenance_details": aligned.provenance, "total": hist.total}, cfg, args.seed)
    print(path)
    return 0


def cmd_notch_hist(args) -> int:
    state = parse_state_spec(args.state, L=args.l, seed=args.seed, k_max=args.kmax)
    if not isinstance(state, FockState):
        raise UsageError("notch-hist needs a Fock state spec")
    dh = notch_depth_histogram(state, args.n_samples, seed=args.seed, L=args.l, bins=args.bins)
    rows = [
        (float(dh.bin_edges[i]), float(dh.bin_edges[i + 1]), int(dh.counts[i]))
        for i in range(dh.counts.size)
    ]
    cfg = {"command": "notch-hist", "state": args.state, "n_samples": args.n_samples,
           "bins": args.bins, "L": args.l}
    path = io.write_csv(_outdir(args) / (args.out or "notch_hist.csv"),
                        ["depth_bin_left", "depth_bin_right", "count"], rows, cfg, args.seed)
    print(path)
    return 0


def cmd_bohmian(args) -> int:
    state = parse_state_spec(args.state, L=args.l, seed=args.seed, k_max=args.kmax)
    snaps = [float(t) for t in args.t_snapshots.split(",")]
    args.n_samples = args.n_real
    initial = align_samples(_sample_for(state, args, args.l))
    run = integrate(state, initial, dt=args.dt, t_snapshots=[0.0] + snaps, n_paths=args.n_paths)
    cfg = {"command": "bohmian", "state": args.state, "n_realizations": args.n_real,
           "dt": args.dt, "t_snapshots": snaps, "bins": args.bins, "L": args.l}
    outdir = _outdir(args)
    base = args.out or "bohmian"
    written = []
    summary = []
    for i, t in enumerate(run.times):
        hist = histogram(run.sample_set_at(i), bins=args.bins)
        p = io.write_csv(outdir / f"{base}_hist_t{t:g}.csv",
                         ["bin_left", "bin_right", "count", "density"],
                         _hist_rows(hist), cfg, args.seed)
        written.append(str(p))
        summary.append({
            "time": float(t),
            "notch_position": harmonic_notch_position(run.snapshots[:, i, :], args.l),
            "notch_depth": histogram_notch_depth(hist),
        })
    rows = []
    for ts in run.paths:
        for it, t in enumerate(ts.times):
            for l in range(ts.positions.shape[1]):
                rows.append((ts.realization, float(t), l, float(ts.positions[it, l])))
    p = io.write_csv(outdir / f"{base}_traj.csv", ["realization", "time", "particle", "x"],
                     rows, cfg, args.seed)
    written.append(str(p))
    io.write_json(outdir / f"{base}.json", {
        "snapshots": summary,
        "aborted": int(run.aborted.sum()),
        "halving_events": run.halving_events,
        "files": written,
    }, cfg, args.seed)
    print(outdir / f"{base}.json")
    return 0


def cmd_gpe(args) -> int:
    prof = gpe_soliton(args.gn, args.kavg, grid=args.grid, L=args.l, tol=args.tol)
    rows = list(zip(map(float, prof.grid), map(float, prof.density()), map(float, prof.phase())))
    cfg = {"command": "gpe", "gN": args.gn, "k_avg": args.kavg, "grid": args.grid, "L": args.l}
    path = io.write_csv(_outdir(args) / (args.out or "gpe.csv"),
                        ["x", "density", "phase"], rows, cfg)
    print(path)
    return 0


# ---------------------------------------------------------------------------
# figure bundles


def _fig_dir(args, name: str) -> Path:
    d = _outdir(args) / name
    d.mkdir(parents=True, exist_ok=True)
    return d


def reproduce_figure(name: str, args) -> Path:
    if name not in FIGURES:
        raise UsageError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    out = _fig_dir(args, name)
    manifest = {"figure": name, "files": {}, "notes": {}}
    seed = args.seed

    def put(key, path):
        manifest["files"][key] = os.path.relpath(path, out)

    if name == "fig2":
        N = args.n or 8
        g = 0.08 if args.g is None else args.g
        K = N // 2
        params = ModelParams(N=N, K=K, k_max=args.kmax or 4, g=g, L=1.0)
        res = find_yrast(params, seed=seed, check_degeneracy=False)
        fixed = sequential_sample(_dominant_fock(res.state), 1, seed=seed,
                                  n_positions=N - 1).positions[0]
        cond = conditional(res.state, fixed, grid=args.grid)
        cfg = {"figure": name, "N": N, "K": K, "g": g, "k_max": params.k_max}
        rows = list(zip(map(float, cond.grid), map(float, cond.density()), map(float, cond.phase())))
        put("conditional", io.write_csv(out / "conditional.csv", ["x", "density", "phase"],
                                        rows, cfg, seed))
        prof = gpe_soliton(g * N, K / N, grid=args.grid)
        rows = list(zip(map(float, prof.grid), map(float, prof.density()), map(float, prof.phase())))
        put("gpe", io.write_csv(out / "gpe.csv", ["x", "density", "phase"], rows, cfg, seed))
        manifest["notes"]["fidelity_with_twin_fock"] = res.fidelity_with_free_yrast()
        manifest["notes"]["healing_length"] = healing_length(g, N)
    elif name == "fig3":
        N = args.n or 8
        cfg = {"figure": name, "N": N}
        put("branches", io.write_csv(out / "branches.csv", ["K", "E_elementary", "E_yrast"],
                                     two_branches(N, range(0, N + 1)), cfg, seed))
    elif name == "fig5":
        n_list = [int(x) for x in (args.n_list or "4,8,16,32").split(",")]
        n_samples = args.n_samples or 1000
        bins = args.bins or 64
        cfg = {"figure": name, "N_list": n_list, "n_samples": n_samples, "bins": bins}
        for N in n_list:
            for frac in (2, 4):
                K = N // frac
                state = FockState.from_occupations({0: N - K, 1: K})
                samples = metropolis_sample(state, n_samples, seed=seed)
                hist = histogram(align_samples(samples), bins=bins)
                put(f"hist_N{N}_K{K}",
                    io.write_csv(out / f"hist_N{N}_K{K}.csv",
                                 ["bin_left", "bin_right", "count", "density"],
                                 _hist_rows(hist), {**cfg, "N": N, "K": K}, seed))
        for k_avg, tag in ((0.5, "black"), (0.25, "quarter")):
            prof = gpe_soliton(0.0, k_avg, grid=512)
            rows = list(zip(map(float, prof.grid), map(float, prof.density())))
            put(f"overlay_{tag}", io.write_csv(out / f"overlay_{tag}.csv", ["x", "density"],
                                               rows, {**cfg, "k_avg": k_avg}, seed))
    elif name == "fig7":
        N = args.n or 32
        n_samples = args.n_samples or 1000
        bins = args.bins or 50
        cfg = {"figure": name, "N": N, "n_samples": n_samples, "bins": bins}
        for frac in (2, 4):
            K = N // frac
            state = FockState.from_occupations({0: N - K, 1: K})
            dh = notch_depth_histogram(state, n_samples, seed=seed, bins=bins,
                                       bin_range=(0.0, 0.7))
            rows = [(float(dh.bin_edges[i]), float(dh.bin_edges[i + 1]), int(dh.counts[i]))
                    for i in range(dh.counts.size)]
            put(f"depth_K{K}", io.write_csv(out / f"depth_K{K}.csv",
                                            ["depth_bin_left", "depth_bin_right", "count"],
                                            rows, {**cfg, "K": K}, seed))
    elif name == "fig8":
        N = args.n or 8
        n_real = args.n_real or 1000
        snaps = [float(t) for t in (args.t_snapshots or "0.1,0.2,0.3,0.4").split(",")]
        bins = args.bins or 48
        K = N * 3 // 8
        state = FockState.from_occupations({0: N - K, 1: K})
        cfg = {"figure": name, "N": N, "state": str(state),
               "n_realizations": n_real, "t_snapshots": snaps, "dt": args.dt, "bins": bins}
        initial = align_samples(sequential_sample(state, n_real, seed=seed))
        run = integrate(state, initial, dt=args.dt, t_snapshots=[0.0] + snaps, n_paths=10)
        for i, t in enumerate(run.times):
            hist = histogram(run.sample_set_at(i), bins=bins)
            put(f"hist_t{t:g}", io.write_csv(out / f"hist_t{t:g}.csv",
                                             ["bin_left", "bin_right", "count", "density"],
                                             _hist_rows(hist), cfg, seed))
        rows = []
        for ts in run.paths:
            for it, t in enumerate(ts.times):
                for l in range(ts.positions.shape[1]):
                    rows.append((ts.realization, float(t), l, float(ts.positions[it, l])))
        put("trajectories", io.write_csv(out / "trajectories.csv",
                                         ["realization", "time", "particle", "x"], rows, cfg, seed))
        manifest["notes"]["aborted"] = int(run.aborted.sum())
    elif name == "fig9":
        n_list = [int(x) for x in (args.n_list or "8,16").split(",")]
        gn = [float(x) for x in (args.gn_grid or "0.25,0.5,1,2,4").split(",")]
        cfg = {"figure": name, "N_list": n_list, "gN_grid": gn, "k_max": args.kmax or 4}
        rows = []
        for N in n_list:
            table = fidelity_sweep([N], [g / N for g in gn], k_max=args.kmax or 4,
                                   seed=seed, method="lanczos")
            rows += [(r["N"], r["g"], math.sqrt(r["g"] * r["N"]), r["fidelity"]) for r in table]
        put("sweep", io.write_csv(out / "fidelity_sweep.csv",
                                  ["N", "g", "xi_inverse", "fidelity"], rows, cfg, seed))

    manifest_path = out / "manifest.json"
    io.write_json(manifest_path, manifest, {"figure": name, "seed": seed}, seed)
    return manifest_path


def cmd_fig(args) -> int:
    print(reproduce_figure(args.name, args))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ringgas",
                                description="Ring-gas yrast laboratory: exact solvers, "
                                            "sampling, Bohmian dynamics, mean-field overlays.")
    p.add_argument("--version", action="version", version=f"ringgas {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seeded=True):
        sp.add_argument("--outdir", default=None, help="output directory (env RINGGAS_OUTDIR)")
        sp.add_argument("--out", default=None, help="output file name override")
        sp.add_argument("--threads", type=int, default=None, help="cap BLAS threads")
        sp.add_argument("--l", type=float, default=1.0, help="ring length L")
        if seeded:
            sp.add_argument("--seed", type=int, default=12345)

    sp = sub.add_parser("basis", help="enumerate a momentum block")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--kmax", type=int, required=True)
    common(sp, seeded=False)
    sp.set_defaults(func=cmd_basis)

    sp = sub.add_parser("branches", help="two excitation branches of the ideal gas")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--kmax", type=int, default=4)
    common(sp, seeded=False)
    sp.set_defaults(func=cmd_branches)

    sp = sub.add_parser("yrast", help="lowest state of a momentum block")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--g", type=float, default=0.0)
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--method", choices=("power", "lanczos"), default="power")
    sp.add_argument("--amplitudes-csv", default=None, help="also dump the amplitude vector")
    common(sp)
    sp.set_defaults(func=cmd_yrast)

    sp = sub.add_parser("fidelity-sweep", help="twin-Fock fidelity vs coupling")
    sp.add_argument("--n-list", default="8,16")
    sp.add_argument("--gn-grid", default=None, help="comma list of gN values")
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--method", choices=("power", "lanczos"), default="lanczos")
    common(sp)
    sp.set_defaults(func=cmd_fidelity_sweep)

    sp = sub.add_parser("conditional", help="conditional wave function on a grid")
    sp.add_argument("--state", required=True)
    sp.add_argument("--fixed", default="sample",
                    help="comma list of N-1 positions, or 'sample'")
    sp.add_argument("--grid", type=int, default=1024)
    sp.add_argument("--kmax", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_conditional)

    sp = sub.add_parser("sample", help="measurement shots and histograms")
    sp.add_argument("--state", required=True)
    sp.add_argument("--n-samples", type=int, default=1000)
    sp.add_argument("--bins", type=int, default=64)
    sp.add_argument("--align", action="store_true")
    sp.add_argument("--method", choices=("auto", "metropolis", "sequential"), default="auto")
    sp.add_argument("--kmax", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("notch-hist", help="conditional depth histogram")
    sp.add_argument("--state", required=True)
    sp.add_argument("--n-samples", type=int, default=1000)
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--kmax", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_notch_hist)

    sp = sub.add_parser("bohmian", help="trajectories and dispersing histograms")
    sp.add_argument("--state", required=True)
    sp.add_argument("--n-real", type=int, default=1000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t-snapshots", default="0.1,0.2,0.3,0.4")
    sp.add_argument("--bins", type=int, default=48)
    sp.add_argument("--n-paths", type=int, default=10)
    sp.add_argument("--method", choices=("auto", "metropolis", "sequential"), default="auto")
    sp.add_argument("--kmax", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_bohmian)

    sp = sub.add_parser("gpe", help="mean-field soliton profile")
    sp.add_argument("--gn", type=float, required=True)
    sp.add_argument("--kavg", type=float, required=True)
    sp.add_argument("--grid", type=int, default=1024)
    sp.add_argument("--tol", type=float, default=1e-10)
    common(sp, seeded=False)
    sp.set_defaults(func=cmd_gpe)

    sp = sub.add_parser("fig", help="emit the data bundle of a standard figure")
    sp.add_argument("--name", required=True, choices=FIGURES)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--g", type=float, default=None)
    sp.add_argument("--n-list", default=None)
    sp.add_argument("--gn-grid", default=None)
    sp.add_argument("--n-samples", type=int, default=None)
    sp.add_argument("--n-real", type=int, default=None)
    sp.add_argument("--bins", type=int, default=None)
    sp.add_argument("--grid", type=int, default=1024)
    sp.add_argument("--kmax", type=int, default=None)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t-snapshots", default=None)
    common(sp)
    sp.set_defaults(func=cmd_fig)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _limit_threads(getattr(args, "threads", None))
    try:
        return args.func(args)
    except (UsageError, BasisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, RuntimeError) as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(diag), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
