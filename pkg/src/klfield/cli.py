"""Command-line entry point.

Exit codes: 0 success, 1 a statistical check failed, 2 config or usage
error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConvergenceError
from .kernels import Kernel
from .mercer import error_surface, reconstruction_report
from .quadrature import Grid
from .simulate import (
    MIN_KS_SAMPLES,
    KLModel,
    coefficient_statistics,
    empirical_covariance,
    field_at,
    marginal_normality,
    refinement_trajectories,
    sample_batch,
)
from .spectral import (
    JACOBI_MAX_SWEEPS,
    JACOBI_TOL,
    USABLE_RTOL,
    Method,
    analytic_spectrum_exponential,
    eigen_residuals,
    gram_matrix,
    nystrom_spectrum,
)

log = logging.getLogger("klfield")

EXIT_OK, EXIT_STAT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULT_SEED = 20240517
FIGURE_ORDERS = (2, 4, 6, 8)


class ConfigError(ValueError):
    pass


def _int(d, key, default, minimum=1):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {v}")
    return v


@dataclass
class RunConfig:
    kernel: Kernel = field(default_factory=Kernel)
    grid: Grid | None = None
    method: Method = Method.NYSTROM
    solver: str = "jacobi"
    n_modes: int = 50
    N_truncation: int = 6
    M: int = 20000
    seed: int = DEFAULT_SEED
    output_dir: str = "klfield-out"
    eval_n: int = 101
    eval_on_nodes: bool = False
    write_surface: bool = False
    t_marginal: float = 0.5
    refinement_N: list = field(default_factory=lambda: [2, 6, 20, 50])
    n_plot: int = 10

    KEYS = ("kernel", "grid", "method", "solver", "n_modes", "N_truncation", "M", "seed", "output_dir",
            "eval_n", "eval_on_nodes", "write_surface", "t_marginal", "refinement_N", "n_plot")

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(cls.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kernel = Kernel.from_dict(d.get("kernel", {}))
        grid_d = dict(d.get("grid", {"rule": "trapezoid", "n": 500}))
        grid_d.setdefault("domain", kernel.domain.to_list())
        grid = Grid.from_dict(grid_d)
        if grid.domain != kernel.domain:
            raise ConfigError("kernel and grid domains differ")
        method = Method(d.get("method", "nystrom"))
        solver = d.get("solver", "jacobi")
        if solver not in ("jacobi", "lapack"):
            raise ConfigError(f"unknown solver {solver!r}")
        n_modes = _int(d, "n_modes", min(50, grid.n))
        if n_modes > grid.n:
            raise ConfigError(f"n_modes={n_modes} exceeds the {grid.n} grid nodes")
        n_trunc = _int(d, "N_truncation", 6)
        if n_trunc > n_modes:
            raise ConfigError(f"N_truncation={n_trunc} exceeds n_modes={n_modes}")
        seed = _int(d, "seed", DEFAULT_SEED, minimum=0)
        if seed >= 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        refine = d.get("refinement_N", [2, 6, 20, 50])
        if (not isinstance(refine, list) or not refine
                or any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in refine)):
            raise ConfigError("refinement_N must be a nonempty list of positive integers")
        if refine != sorted(refine):
            raise ConfigError("refinement_N must be nondecreasing")
        t_marg = d.get("t_marginal", 0.5)
        if isinstance(t_marg, bool) or not isinstance(t_marg, (int, float)) or not kernel.domain.contains(t_marg):
            raise ConfigError(f"t_marginal must be a number inside the domain, got {t_marg!r}")
        flags = {}
        for key in ("eval_on_nodes", "write_surface"):
            v = d.get(key, False)
            if not isinstance(v, bool):
                raise ConfigError(f"{key} must be true or false")
            flags[key] = v
        out = d.get("output_dir", "klfield-out")
        if not isinstance(out, str):
            raise ConfigError("output_dir must be a string")
        return cls(
            kernel=kernel,
            grid=grid,
            method=method,
            solver=solver,
            n_modes=n_modes,
            N_truncation=n_trunc,
            M=_int(d, "M", 20000),
            seed=seed,
            output_dir=out,
            eval_n=_int(d, "eval_n", 101, minimum=2),
            t_marginal=float(t_marg),
            refinement_N=list(refine),
            n_plot=_int(d, "n_plot", 10),
            **flags,
        )

    def describe(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "grid": self.grid.to_dict(),
            "method": self.method.value,
            "solver": self.solver,
            "n_modes": self.n_modes,
            "N_truncation": self.N_truncation,
            "M": self.M,
            "seed": self.seed,
        }


# -- output helpers ---------------------------------------------------------


def _fmt(x) -> str:
    # repr of a Python float is the shortest string that parses back exactly
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    return out


# -- pipeline steps ---------------------------------------------------------


def compute_spectrum(cfg: RunConfig):
    if cfg.method is Method.ANALYTIC:
        return analytic_spectrum_exponential(cfg.kernel, cfg.n_modes, cfg.grid)
    return nystrom_spectrum(cfg.kernel, cfg.grid, cfg.n_modes, solver=cfg.solver)


def write_eigs(cfg: RunConfig, spectrum, out: Path):
    nodes = spectrum.grid.nodes
    e = spectrum.eigenfunctions
    rows = ([str(i + 1), _fmt(spectrum.eigenvalues[i])] + [_fmt(v) for v in e[:, i]] for i in range(spectrum.n_modes))
    _write_csv(out / "eigs.csv", ["mode_index", "eigenvalue"] + [_fmt(t) for t in nodes], rows)
    gram = gram_matrix(spectrum)
    _write_json(out / "eigs.json", {
        **cfg.describe(),
        "tolerances": {
            "jacobi_offdiag_rtol": JACOBI_TOL,
            "jacobi_max_sweeps": JACOBI_MAX_SWEEPS,
            "root_xtol": 1e-13,
            "usable_rtol": USABLE_RTOL,
        },
        "diagnostics": {
            "eigenvalue_sum": float(np.sum(spectrum.eigenvalues)),
            "kernel_trace": cfg.kernel.sigma2 * cfg.kernel.domain.length,
            "max_orthonormality_error": float(np.max(np.abs(gram - np.eye(gram.shape[0])))),
            "max_eigen_residual": float(np.max(eigen_residuals(spectrum))),
        },
    })


def write_mercer(cfg: RunConfig, spectrum, out: Path, surface_orders=()):
    lattice = spectrum.grid if cfg.eval_on_nodes else cfg.eval_n
    report = reconstruction_report(spectrum, cfg.kernel, spectrum.n_modes, lattice)
    _write_csv(out / "mercer_curve.csv", ["N", "max_abs_error", "l2_error"],
               ([str(n), _fmt(err), _fmt(l2)] for (n, err), l2 in zip(report.per_N_curve, report.l2_curve)))
    for n in surface_orders:
        s, t, exact, approx, diff = error_surface(spectrum, n, lattice)
        _write_csv(out / f"mercer_surface_N{n}.csv", ["s", "t", "R_X", "R_X^N", "difference"],
                   ([_fmt(a), _fmt(b), _fmt(c), _fmt(d), _fmt(f)]
                    for a, b, c, d, f in zip(s.ravel(), t.ravel(), exact.ravel(), approx.ravel(), diff.ravel())))
    n_trunc = cfg.N_truncation
    summary = {
        **cfg.describe(),
        "eval_lattice": "grid_nodes" if cfg.eval_on_nodes else cfg.eval_n,
        "N": n_trunc,
        "max_abs_error_at_N": report.per_N_curve[n_trunc - 1][1],
        "l2_error_at_N": report.l2_curve[n_trunc - 1],
        "max_abs_error_all_modes": report.max_abs_error,
    }
    _write_json(out / "mercer.json", summary)
    return report


def write_sample(cfg: RunConfig, spectrum, out: Path, M: int | None = None):
    model = KLModel(spectrum, cfg.N_truncation)
    M = cfg.M if M is None else M
    batch = sample_batch(model, M, cfg.seed)
    header = [_fmt(t) for t in spectrum.grid.nodes]
    _write_csv(out / "realizations.csv", header, ([_fmt(v) for v in row] for row in batch.fields))
    _write_csv(out / "coefficients.csv", [f"xi{i + 1}" for i in range(model.n_terms)],
               ([_fmt(v) for v in row] for row in batch.xi))
    _write_json(out / "sample_manifest.json", {
        **cfg.describe(),
        "M": M,
        "N": model.n_terms,
        "files": ["realizations.csv", "coefficients.csv"],
    })
    return batch


def verify_report(cfg: RunConfig, spectrum):
    if cfg.M < 2:
        raise ConfigError(f"verify needs M >= 2 samples, got {cfg.M}")
    model = KLModel(spectrum, cfg.N_truncation)
    batch = sample_batch(model, cfg.M, cfg.seed)
    stats = coefficient_statistics(batch)
    cov = empirical_covariance(batch)
    ks = marginal_normality(batch, cfg.t_marginal) if cfg.M >= MIN_KS_SAMPLES else None
    checks = {
        "coefficients": stats.passed,
        "covariance": cov.sup_vs_truncated <= cov.mc_envelope,
    }
    if ks is not None:
        checks["marginal_normality"] = ks.passed
    report = {
        **cfg.describe(),
        "coefficients": stats.to_dict(),
        "covariance": {
            "sup_vs_truncated": cov.sup_vs_truncated,
            "sup_vs_kernel": cov.sup_vs_kernel,
            "mc_envelope": cov.mc_envelope,
        },
        "marginal_normality": None if ks is None else ks.to_dict(),
        "checks": checks,
        "passed": all(checks.values()),
    }
    return report, batch


def write_figures(cfg: RunConfig, spectrum, out: Path):
    write_eigs(cfg, spectrum, out)
    orders = tuple(n for n in FIGURE_ORDERS if n <= spectrum.n_modes)
    write_mercer(cfg, spectrum, out, surface_orders=orders)
    write_sample(cfg, spectrum, out, M=min(cfg.n_plot, cfg.M))
    report, batch = verify_report(cfg, spectrum)
    _write_json(out / "verify.json", report)
    std = np.sqrt(KLModel(spectrum, cfg.N_truncation).variance(cfg.t_marginal))
    z = field_at(batch, cfg.t_marginal) / std
    _write_csv(out / "marginal.csv", ["standardized_value"], ([_fmt(v)] for v in z))
    refine = [n for n in cfg.refinement_N if n <= spectrum.n_usable]
    if refine:
        nodes = spectrum.grid.nodes
        curves = [refinement_trajectories(spectrum, refine, cfg.seed, realization=r) for r in (0, 1)]
        header = ["t"] + [f"r{r}_N{n}" for r in (0, 1) for n in refine]
        _write_csv(out / "refinement.csv", header,
                   ([_fmt(nodes[j])] + [_fmt(c[k, j]) for c in curves for k in range(len(refine))]
                    for j in range(nodes.size)))
    return report


# -- command dispatch -------------------------------------------------------


def _load_config(args) -> RunConfig:
    if args.config is None:
        d = {}
    else:
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if args.output_dir is not None:
        d = {**d, "output_dir": args.output_dir}
    if args.seed is not None:
        d = {**d, "seed": args.seed}
    return RunConfig.from_dict(d)


def run(command: str, cfg: RunConfig) -> int:
    out = _outdir(cfg)
    spectrum = compute_spectrum(cfg)
    if command == "eigs":
        write_eigs(cfg, spectrum, out)
    elif command == "mercer":
        write_mercer(cfg, spectrum, out, surface_orders=(cfg.N_truncation,) if cfg.write_surface else ())
    elif command == "sample":
        write_sample(cfg, spectrum, out)
    elif command == "verify":
        report, _ = verify_report(cfg, spectrum)
        _write_json(out / "verify.json", report)
        return EXIT_OK if report["passed"] else EXIT_STAT
    elif command == "figures":
        report = write_figures(cfg, spectrum, out)
        return EXIT_OK if report["passed"] else EXIT_STAT
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _report_error("usage", message)
        sys.exit(EXIT_CONFIG)


def _report_error(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message)}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="klfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "eigs": "eigenvalues and eigenfunctions (CSV + JSON sidecar)",
        "mercer": "truncated Mercer reconstruction errors",
        "sample": "seeded realizations of the truncated expansion",
        "verify": "statistical checks of a sampled batch (exit 1 on failure)",
        "figures": "every dataset behind the worked example, with its defaults",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("config", nargs="?" if name == "figures" else None, help="JSON run configuration")
        p.add_argument("--output-dir", help="override output_dir")
        p.add_argument("--seed", type=int, help="override seed")
    return parser


def _thread_limit():
    raw = os.environ.get("KLFIELD_THREADS")
    if not raw:
        return nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"KLFIELD_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("KLFIELD_THREADS must be >= 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        with _thread_limit():
            return run(args.command, cfg)
    except ConvergenceError as exc:
        _report_error("numeric", exc)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        _report_error("config", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
