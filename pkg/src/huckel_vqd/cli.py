"""Command-line front end: ``huckel-vqd {hamiltonian,spectrum,orbitals,bench-c60}``.

Machine-readable output (``--format records``) is one record per line,
made of space-separated ``key=value`` fields; the first field is always
``record=<kind>``. Values never contain spaces or ``=``.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import molgraph, oracle, pauli
from . import simulator as sim
from . import solver
from ._backend import NAME as BACKEND
from .optim import KINDS, OptimizerConfig

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_ASSERT = 0, 2, 3, 4
MLFIT_MAX_QUBITS = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


# ----------------------------------------------------------------- records

def format_value(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (float, np.floating)):
        return f"{float(v) + 0.0:.12g}"
    s = str(v)
    if not s or any(c.isspace() for c in s) or "=" in s:
        raise ValueError(f"value {s!r} is not record-safe")
    return s


def format_record(kind: str, **fields) -> str:
    return " ".join([f"record={kind}"] + [f"{k}={format_value(v)}" for k, v in fields.items()])


def parse_records(text: str) -> list[dict[str, str]]:
    """Inverse of :func:`format_record` (values stay strings)."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        rec = {}
        for tok in line.split():
            key, sep, val = tok.partition("=")
            if not sep or not key:
                raise ValueError(f"line {lineno}: malformed field {tok!r}")
            rec[key] = val
        if "record" not in rec:
            raise ValueError(f"line {lineno}: missing record kind")
        out.append(rec)
    return out


# ------------------------------------------------------------------ config

def _resolve_molecule(args) -> molgraph.MoleculeSpec:
    if args.molecule_file:
        return molgraph.load_molecule(args.molecule_file)
    if not args.molecule:
        raise CliError("give a molecule name or --molecule-file")
    if args.molecule in molgraph.corpus_names():
        return molgraph.lookup(args.molecule)
    if Path(args.molecule).is_file():
        return molgraph.load_molecule(args.molecule)
    return molgraph.lookup(args.molecule)  # raises with the list of built-ins


def _decomposer(args, n_qubits: int):
    if args.decomposition == "frobenius":
        return pauli.frobenius_decompose
    if n_qubits > MLFIT_MAX_QUBITS and not args.allow_large_fit:
        raise CliError(f"mlfit on {n_qubits} qubits is expensive; pass --allow-large-fit to run it anyway")
    return pauli.fit_decompose


def _solver_config(args, n_qubits: int) -> solver.SolverConfig:
    mode = args.setting
    base = solver.SolverConfig.default(n_qubits, mode, args.seed)
    ansatz = sim.AnsatzSpec(n_qubits, args.reps if args.reps else base.ansatz.reps, args.entangler)
    opt = base.optimizer
    if args.optimizer:
        opt = OptimizerConfig(args.optimizer, seed=args.seed,
                              max_evals=solver.SPSA_EVALS if args.optimizer == "spsa" else opt.max_evals)
    if args.max_evals:
        opt = replace(opt, max_evals=args.max_evals)
    noise = sim.NoiseConfig(args.p1, args.p2, args.p_readout, args.shots, args.seed)
    return solver.SolverConfig(ansatz, opt, mode, noise, args.restarts, args.seed, args.gamma,
                               args.mitigate_readout)


def _prepare(args):
    spec = _resolve_molecule(args)
    hm = molgraph.padded_solver_matrix(spec)
    return spec, hm


# ---------------------------------------------------------------- commands

def cmd_hamiltonian(args, out) -> int:
    spec = _resolve_molecule(args)
    hm = molgraph.pad_to_qubits(molgraph.build_huckel(spec))
    h = _decomposer(args, hm.n_qubits)(hm)
    if args.format == "records":
        print(format_record("hamiltonian", molecule=spec.name, qubits=h.n_qubits, terms=len(h),
                            sign="connectivity", decomposition=args.decomposition), file=out)
        for i, (c, p) in enumerate(h.terms):
            print(format_record("term", index=i, coeff=pauli.format_coeff(c), string=p), file=out)
    else:
        print(f"# {spec.name}: {h.n_qubits} qubits, {len(h)} terms ({args.decomposition})", file=out)
        out.write(h.to_text())
    return EXIT_OK


def _run_solver(args, hm):
    cfg = _solver_config(args, hm.n_qubits)
    decompose = _decomposer(args, hm.n_qubits)
    res = solver.solve_matrix(hm, cfg, args.algo, args.spurious, args.levels, decompose)
    return cfg, res


def cmd_spectrum(args, out) -> int:
    spec, hm = _prepare(args)
    exact = solver.exact_levels(hm)
    if args.algo == "exact":
        eig = oracle.eig_sym(hm.entries)
        weights = np.sum(eig.vectors[sorted(hm.dummy_indices), :] ** 2, axis=0)
        rows = [(e, bool(w > solver.SPURIOUS_WEIGHT), "exact", None) for e, w in zip(eig.values, weights)]
        n_spur = sum(r[1] for r in rows)
        rows = [r for r in rows if not r[1]]
        _print_spectrum(args, out, spec, hm, rows, n_spur, None, header={"algo": "exact"})
        return EXIT_OK
    cfg, res = _run_solver(args, hm)
    metrics = None
    phys = res.physical_energies
    if args.algo != "vqe" and phys.shape == exact.shape:
        metrics = solver.avg_error(res, exact)
    errs = iter(metrics.per_level) if metrics is not None else None
    rows = []
    for lv in res.levels:
        err = next(errs) if (errs is not None and not lv.spurious) else None
        rows.append((lv.energy, lv.spurious, lv.source, err))
    if args.algo == "vqe":
        rows[0] = rows[0][:3] + (abs(rows[0][0] - oracle.eig_sym(hm.entries).values[0]),)
    header = {"algo": args.algo, "setting": cfg.mode, "reps": cfg.ansatz.reps,
              "entangler": cfg.ansatz.entangler, "depth": sim.circuit_depth(cfg.ansatz),
              "optimizer": cfg.optimizer.kind, "gamma": res.gamma, "restarts": cfg.restarts, "seed": cfg.seed}
    _print_spectrum(args, out, spec, hm, rows, res.n_spurious, metrics, header)
    if not res.ok:
        print(f"error: level {res.failed_level} failed: {res.failure}", file=sys.stderr)
        return EXIT_SOLVER
    if metrics is None and args.algo != "vqe":
        print(f"warning: {len(phys)} physical levels found, {len(exact)} expected", file=sys.stderr)
    return EXIT_OK


def _print_spectrum(args, out, spec, hm, rows, n_spur, metrics, header):
    if args.format == "records":
        print(format_record("spectrum", molecule=spec.name, qubits=hm.n_qubits, centers=hm.n_real,
                            spurious=n_spur, **header), file=out)
        for i, (e, spur, src, err) in enumerate(rows):
            fields = dict(index=i, energy=e, spurious=spur, source=src)
            if err is not None:
                fields["error"] = err
            print(format_record("level", **fields), file=out)
        if metrics is not None:
            print(format_record("metrics", avg_error=metrics.avg_error, mean_abs_error=metrics.mean_abs,
                                max_abs_error=float(metrics.per_level.max())), file=out)
        return
    print(f"{spec.name}: {hm.n_real} centers on {hm.n_qubits} qubits, "
          + ", ".join(f"{k} {format_value(v)}" for k, v in header.items()), file=out)
    print(f"{'level':>5}  {'energy':>10}  {'spurious':>8}  {'source':>10}  {'|error|':>9}", file=out)
    for i, (e, spur, src, err) in enumerate(rows):
        es = f"{err:9.2e}" if err is not None else f"{'':>9}"
        print(f"{i:5d}  {e + 0.0:10.4f}  {'yes' if spur else 'no':>8}  {src:>10}  {es}", file=out)
    print(f"spurious states: {n_spur}", file=out)
    if metrics is not None:
        print(f"average error {metrics.avg_error:.3e}, mean absolute error {metrics.mean_abs:.3e}, "
              f"max absolute error {metrics.per_level.max():.3e}", file=out)
        _histogram(metrics.per_level, out)


def _histogram(errors, out):
    edges = [0.0, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1, np.inf]
    counts, _ = np.histogram(errors, bins=edges)
    labels = ["<1e-6", "<1e-4", "<1e-3", "<1e-2", "<1e-1", ">=1e-1"]
    for lab, c in zip(labels, counts):
        if c:
            print(f"  {lab:>7} {'#' * int(c)} {c}", file=out)


def _clean(x: float, digits: int) -> float:
    return round(float(x), digits) + 0.0  # no "-0.0000"


def _fmt_vec(v, dummy):
    return " ".join(f"[{_clean(x, 4):7.4f}]" if i in dummy else f"{_clean(x, 4):7.4f}" for i, x in enumerate(v))


def _canonical_sign(v):
    return -v if v[np.argmax(np.abs(v))] < 0 else v


def cmd_orbitals(args, out) -> int:
    if args.setting != "ideal":
        raise CliError("orbitals needs the ideal setting")
    if args.algo in ("exact", "vqe"):
        args.algo = "vqd"
    spec, hm = _prepare(args)
    eig = oracle.eig_sym(hm.entries)
    cfg, res = _run_solver(args, hm)
    dummy = hm.dummy_indices
    recs = args.format == "records"
    if recs:
        print(format_record("orbitals", molecule=spec.name, qubits=hm.n_qubits, levels=len(res.levels),
                            algo=args.algo), file=out)
    else:
        print(f"{spec.name}: orbital coefficients ({args.algo}, reps {cfg.ansatz.reps}); "
              "[x] marks padded entries", file=out)
    for i, lv in enumerate(res.levels):
        near = float(eig.values[np.argmin(np.abs(eig.values - lv.energy))])
        basis = eig.eigenspace(near)
        ov = oracle.subspace_overlap(lv.eigvec, eig, near)
        vec = _canonical_sign(lv.eigvec)
        # reference: projection onto the exact eigenspace (the eigenvector itself when non-degenerate)
        ref = basis @ (basis.T @ vec)
        ref = ref / np.linalg.norm(ref) if np.linalg.norm(ref) > 0 else ref
        if recs:
            print(format_record("orbital", index=i, energy=lv.energy, exact=near, spurious=lv.spurious,
                                overlap=ov, degeneracy=basis.shape[1],
                                coeffs=",".join(f"{_clean(x, 6):.6f}" for x in vec),
                                exact_coeffs=",".join(f"{_clean(x, 6):.6f}" for x in ref)), file=out)
        else:
            flag = "  SPURIOUS" if lv.spurious else ""
            print(f"level {i}: E {lv.energy + 0.0:.4f} (exact {near + 0.0:.4f}, degeneracy {basis.shape[1]}) "
                  f"overlap {ov:.6f}{flag}", file=out)
            print(f"  vqd    {_fmt_vec(vec, dummy)}", file=out)
            print(f"  exact  {_fmt_vec(ref, dummy)}", file=out)
    if not res.ok:
        print(f"error: level {res.failed_level} failed: {res.failure}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_bench_c60(args, out) -> int:
    spec = molgraph.generate_c60()
    hm = molgraph.padded_solver_matrix(spec)
    h = pauli.frobenius_decompose(hm)
    exact = solver.exact_levels(hm)
    args.setting = "ideal"
    args.reps = args.reps or 9
    cfg = _solver_config(args, hm.n_qubits)
    results, times = {}, {}
    for algo in ("vqd", "symvqd"):
        t0 = time.perf_counter()
        if algo == "vqd":
            results[algo] = solver.vqd_spectrum(h, hm.dim, cfg, hm.dummy_indices)
        else:
            results[algo] = solver.symvqd_spectrum(h, cfg, hm.dummy_indices)
        times[algo] = time.perf_counter() - t0
    metrics = {}
    for algo, res in results.items():
        if not res.ok:
            print(f"error: {algo} level {res.failed_level} failed: {res.failure}", file=sys.stderr)
            return EXIT_SOLVER
        if len(res.physical) != len(exact):
            print(f"error: {algo} kept {len(res.physical)} physical levels, expected {len(exact)}",
                  file=sys.stderr)
            return EXIT_ASSERT
        metrics[algo] = solver.avg_error(res, exact)
    recs = args.format == "records"
    summary = dict(pauli_terms=len(h), qubits=hm.n_qubits, reps=cfg.ansatz.reps, entangler=cfg.ansatz.entangler,
                   restarts=cfg.restarts, seed=cfg.seed, gamma=results["vqd"].gamma,
                   spurious=results["symvqd"].n_spurious, vqd_spurious=results["vqd"].n_spurious)
    if recs:
        print(format_record("bench", **summary), file=out)
    else:
        print("C60 benchmark: " + " ".join(f"{k}={format_value(v)}" for k, v in summary.items()), file=out)
        print(f"{'level':>5}  {'exact':>9}  {'vqd':>9}  {'|err|':>9}  {'symvqd':>9}  {'|err|':>9}  half", file=out)
    vq = results["vqd"].physical
    sq = results["symvqd"].physical
    for i, e in enumerate(exact):
        ev, es = vq[i].energy, sq[i].energy
        if recs:
            print(format_record("level", index=i, exact=e, vqd=ev, vqd_error=abs(ev - e), symvqd=es,
                                symvqd_error=abs(es - e), source=sq[i].source), file=out)
        else:
            print(f"{i:5d}  {e + 0.0:9.4f}  {ev + 0.0:9.4f}  {abs(ev - e):9.2e}  {es + 0.0:9.4f}  "
                  f"{abs(es - e):9.2e}  {sq[i].source}", file=out)
    mv, ms = metrics["vqd"].mean_abs, metrics["symvqd"].mean_abs
    ok = ms < mv
    final = dict(vqd_mean_abs_error=mv, symvqd_mean_abs_error=ms,
                 vqd_avg_error=metrics["vqd"].avg_error, symvqd_avg_error=metrics["symvqd"].avg_error,
                 symvqd_better=ok)
    if recs:
        print(format_record("summary", **final), file=out)
        print(f"wall_clock vqd={times['vqd']:.1f}s symvqd={times['symvqd']:.1f}s backend={BACKEND}",
              file=sys.stderr)
    else:
        for k, v in final.items():
            print(f"{k}={format_value(v)}", file=out)
        print(f"wall_clock vqd={times['vqd']:.1f}s symvqd={times['symvqd']:.1f}s backend={BACKEND}", file=out)
    return EXIT_OK if ok else EXIT_ASSERT


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("molecule", nargs="?", help="built-in name (e.g. C6H6) or molecule file path")
    common.add_argument("--molecule-file", help="molecule description file")
    common.add_argument("--decomposition", choices=("frobenius", "mlfit"), default="frobenius")
    common.add_argument("--allow-large-fit", action="store_true",
                        help=f"allow mlfit beyond {MLFIT_MAX_QUBITS} qubits")
    common.add_argument("--format", choices=("table", "records"), default="table")

    solve = argparse.ArgumentParser(add_help=False)
    solve.add_argument("--algo", choices=("exact", "vqe", "vqd", "symvqd"), default="vqd")
    solve.add_argument("--setting", choices=solver.MODES, default="ideal")
    solve.add_argument("--optimizer", choices=KINDS, help="default: quasi_newton (ideal), spsa (noisy)")
    solve.add_argument("--max-evals", type=int, help="objective evaluations per restart and level")
    solve.add_argument("--reps", type=int, help="repetition blocks (default depends on qubits and setting)")
    solve.add_argument("--entangler", choices=sim.ENTANGLERS, default="full")
    solve.add_argument("--restarts", type=int, default=5)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--levels", type=int, help="number of levels for vqd (default: full spectrum)")
    solve.add_argument("--gamma", type=float, help="deflation weight (default: spectral-width rule)")
    solve.add_argument("--shots", type=int, default=sim.NoiseConfig.shots)
    solve.add_argument("--p1", type=float, default=sim.NoiseConfig.p1, help="1-qubit gate error probability")
    solve.add_argument("--p2", type=float, default=sim.NoiseConfig.p2, help="2-qubit gate error probability")
    solve.add_argument("--p-readout", type=float, default=sim.NoiseConfig.p_readout)
    solve.add_argument("--spurious", choices=solver.SPURIOUS_MODES, default="filter")
    solve.add_argument("--no-readout-mitigation", dest="mitigate_readout", action="store_false",
                       help="noisy setting: report raw shot parities")

    p = argparse.ArgumentParser(prog="huckel-vqd", description="Hückel MO spectra from variational quantum simulation")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("hamiltonian", parents=[common], help="print the Pauli decomposition")
    sub.add_parser("spectrum", parents=[common, solve], help="solve for orbital energies")
    sub.add_parser("orbitals", parents=[common, solve], help="orbital coefficients against the exact ones")
    sub.add_parser("bench-c60", parents=[common, solve], help="plain VQD versus symVQD on C60")
    return p


COMMANDS = {"hamiltonian": cmd_hamiltonian, "spectrum": cmd_spectrum,
            "orbitals": cmd_orbitals, "bench-c60": cmd_bench_c60}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except pauli.FitConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except solver.SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except BrokenPipeError:
        sys.stderr.close()  # downstream closed early (e.g. piped into head)
        return EXIT_OK
    except (ValueError, OSError) as exc:  # validation: molecule files, configs
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
