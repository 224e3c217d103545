"""Classical optimizers for the variational loop.

Bounded L-BFGS-B, conjugate gradient and Nelder-Mead are delegated to
scipy; SPSA is implemented here. Every optimizer goes through a wrapper
that counts evaluations, rejects non-finite values and remembers the best
point seen, which is what gets returned.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import optimize

KINDS = ("quasi_newton", "spsa", "cg", "nelder_mead")
GRADIENT_MODES = ("parameter_shift", "finite_diff")
BOUND = 2.0 * np.pi
FD_STEP = 1e-6


class NonFiniteObjective(ArithmeticError):
    def __init__(self, theta, value):
        super().__init__(f"objective returned {value!r}")
        self.theta = np.array(theta, dtype=np.float64)
        self.value = value


class _Budget(Exception):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "quasi_newton"
    max_evals: int = 20000
    gradient_mode: str = "parameter_shift"
    tolerance: float = 1e-8
    seed: int = 0
    spsa_a: float = 0.2
    spsa_c: float = 0.1
    spsa_A: Optional[float] = None  # defaults to max_evals / 10
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown optimizer {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")


@dataclass
class OptimResult:
    theta: np.ndarray
    fun: float
    n_evals: int
    converged: bool
    trace: list = field(default_factory=list)  # (iteration, value)

    def trace_csv(self) -> str:
        return "iteration,value\n" + "".join(f"{i},{v!r}\n" for i, v in self.trace)


class _Tracked:
    """Objective wrapper: evaluation budget, finiteness check, best-seen point."""

    def __init__(self, fun, max_evals):
        self.fun = fun
        self.max_evals = max_evals
        self.n_evals = 0
        self.best_x = None
        self.best_f = np.inf

    def __call__(self, x):
        if self.n_evals >= self.max_evals:
            raise _Budget
        x = np.array(x, dtype=np.float64)
        f = float(self.fun(x))
        self.n_evals += 1
        if not np.isfinite(f):
            raise NonFiniteObjective(x, f)
        if f < self.best_f:
            self.best_f, self.best_x = f, x
        return f


def gradient(objective: Callable, theta, mode: str = "parameter_shift") -> np.ndarray:
    """Per-coordinate gradient by the +-pi/2 shift rule or central differences."""
    theta = np.array(theta, dtype=np.float64)
    if mode == "parameter_shift":
        step, scale = np.pi / 2, 0.5
    elif mode == "finite_diff":
        step, scale = FD_STEP, 0.5 / FD_STEP
    else:
        raise ValueError(f"unknown gradient mode {mode!r}")
    g = np.empty_like(theta)
    e = np.zeros_like(theta)
    for i in range(theta.shape[0]):
        e[i] = step
        fp = objective(theta + e)
        fm = objective(theta - e)
        e[i] = 0.0
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteObjective(theta, fp if not np.isfinite(fp) else fm)
        g[i] = (fp - fm) * scale
    return g


def minimize(objective: Callable, theta0, config: OptimizerConfig = OptimizerConfig(),
             value_and_grad: Optional[Callable] = None) -> OptimResult:
    """Minimize ``objective`` from ``theta0``; returns the best point seen.

    ``value_and_grad`` may supply an analytic ``(f, grad)`` for the
    gradient-based methods; otherwise gradients come from
    :func:`gradient` with ``config.gradient_mode``.
    """
    theta0 = np.array(theta0, dtype=np.float64).ravel()
    f = _Tracked(objective, config.max_evals)
    f0 = f(theta0)
    trace = [(0, f0)]
    if config.kind == "spsa":
        converged = _spsa(f, theta0, config, trace)
    else:
        converged = _scipy(f, theta0, config, trace, value_and_grad)
    return OptimResult(f.best_x.copy(), f.best_f, f.n_evals, converged, trace)


def _scipy(f: _Tracked, theta0, config, trace, value_and_grad) -> bool:
    if value_and_grad is not None:
        def fg(x):
            if f.n_evals >= f.max_evals:
                raise _Budget
            v, g = value_and_grad(np.array(x, dtype=np.float64))
            f.n_evals += 1
            v = float(v)
            if not np.isfinite(v) or not np.all(np.isfinite(g)):
                raise NonFiniteObjective(x, v)
            if v < f.best_f:
                f.best_f, f.best_x = v, np.array(x, dtype=np.float64)
            return v, np.asarray(g, dtype=np.float64)
    else:
        def fg(x):
            return f(x), gradient(f, x, config.gradient_mode)

    def callback(xk, *args):
        trace.append((len(trace), f.best_f))

    try:
        if config.kind == "quasi_newton":
            res = optimize.minimize(fg, theta0, jac=True, method="L-BFGS-B",
                                    bounds=[(-BOUND, BOUND)] * theta0.shape[0], callback=callback,
                                    options={"maxfun": config.max_evals, "maxiter": config.max_evals,
                                             "ftol": 1e-15, "gtol": config.tolerance})
        elif config.kind == "cg":
            res = optimize.minimize(fg, theta0, jac=True, method="CG", callback=callback,
                                    options={"maxiter": config.max_evals, "gtol": config.tolerance})
        else:
            res = optimize.minimize(f, theta0, method="Nelder-Mead", callback=callback,
                                    options={"maxfev": config.max_evals, "xatol": config.tolerance,
                                             "fatol": config.tolerance, "adaptive": True})
    except _Budget:
        return False
    return bool(res.success)


def _spsa(f: _Tracked, theta, config, trace) -> bool:
    rng = np.random.default_rng(config.seed)
    a, c = config.spsa_a, config.spsa_c
    big_a = config.spsa_A if config.spsa_A is not None else config.max_evals / 10.0
    theta = theta.copy()
    k = 0
    # keep one evaluation for the final iterate
    while f.n_evals + 3 <= f.max_evals:
        ak = a / (k + 1 + big_a) ** config.spsa_alpha
        ck = c / (k + 1) ** config.spsa_gamma
        delta = rng.choice((-1.0, 1.0), size=theta.shape[0])
        fp = f(theta + ck * delta)
        fm = f(theta - ck * delta)
        theta = theta - ak * (fp - fm) / (2.0 * ck) * delta
        k += 1
        trace.append((k, 0.5 * (fp + fm)))
    if f.n_evals < f.max_evals:
        trace.append((k, f(theta)))
    return True


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HUCKEL_VQD_THREADS", "1")))
    except ValueError:
        return 1


def multistart(objective: Callable, dim: int, config: OptimizerConfig, restarts: int = 5,
               seed: int = 0, value_and_grad: Optional[Callable] = None) -> OptimResult:
    """Best of ``restarts`` runs from uniform starts in [-pi, pi]^dim.

    Start points and per-run seeds depend only on ``seed``, and ties keep
    the lowest restart index, so the outcome is schedule independent.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(restarts)
    starts = [np.random.default_rng(ch).uniform(-np.pi, np.pi, dim) for ch in children]
    seeds = [int(ch.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for ch in children]

    def run(i):
        return minimize(objective, starts[i], replace(config, seed=seeds[i]), value_and_grad)

    workers = min(_threads(), restarts)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]
    best = min(range(restarts), key=lambda i: (results[i].fun, i))
    out = results[best]
    out.n_evals = sum(r.n_evals for r in results)
    return out
