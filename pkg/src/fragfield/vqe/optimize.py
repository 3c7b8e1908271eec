"""Derivative-free VQE drivers on top of scipy.optimize.

Both optimizers are deterministic. The wrapper counts every objective call,
keeps the best point seen and enforces a hard evaluation budget.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

log = logging.getLogger(__name__)

OPTIMIZERS = ("powell", "neldermead")


@dataclass
class OptimizeOptions:
    optimizer: str = "powell"
    ftol: float = 1e-8  # Hartree
    max_evals: int | None = 200_000
    xtol: float = 1e-4
    initial_step: float = 0.1

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")


@dataclass
class OptimizeResult:
    energy: float
    x: np.ndarray
    n_evals: int
    converged: bool
    message: str = ""
    wall_time: float = 0.0
    history: list[float] = field(default_factory=list, repr=False)


class _BudgetExhausted(Exception):
    pass


class _Counted:
    def __init__(self, f, max_evals):
        self.f = f
        self.max_evals = max_evals
        self.n = 0
        self.best_f = np.inf
        self.best_x = None
        self.history: list[float] = []

    def __call__(self, x):
        if self.max_evals is not None and self.n >= self.max_evals:
            raise _BudgetExhausted
        self.n += 1
        val = float(self.f(np.array(x, dtype=float)))
        self.history.append(val)
        if val < self.best_f:
            self.best_f, self.best_x = val, np.array(x, dtype=float)
        return val


def _run(method: str, f, x0, opts: OptimizeOptions) -> OptimizeResult:
    x0 = np.asarray(x0, dtype=float)
    fc = _Counted(f, opts.max_evals)
    t0 = time.perf_counter()
    if method == "powell":
        f0 = fc(x0)
        # scipy's Powell test is relative: 2|df| <= ftol (|f_old| + |f|)
        rel = opts.ftol / max(abs(f0), 1e-12)
        kwargs = dict(
            method="Powell",
            options=dict(ftol=rel, xtol=opts.xtol, maxiter=10**9, maxfev=10**9,
                         direc=opts.initial_step * np.eye(len(x0))),
        )
    else:
        kwargs = dict(
            method="Nelder-Mead",
            options=dict(fatol=opts.ftol, xatol=opts.xtol, maxiter=10**9, maxfev=10**9, adaptive=True,
                         initial_simplex=_simplex(x0, opts.initial_step)),
        )
    try:
        res = minimize(fc, x0, **kwargs)
        converged, message = bool(res.success), str(res.message)
    except _BudgetExhausted:
        converged, message = False, f"evaluation budget of {opts.max_evals} exhausted"
    wall = time.perf_counter() - t0
    log.info("%s: E = %.10f after %d evaluations (%s)", method, fc.best_f, fc.n, message)
    return OptimizeResult(fc.best_f, fc.best_x, fc.n, converged, message, wall, fc.history)


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(len(x0))])


def powell_minimize(f, x0, opts: OptimizeOptions | None = None) -> OptimizeResult:
    """Powell's conjugate-direction method with Brent line searches."""
    opts = opts or OptimizeOptions("powell")
    return _run("powell", f, x0, opts)


def neldermead_minimize(f, x0, opts: OptimizeOptions | None = None) -> OptimizeResult:
    """Adaptive Nelder-Mead simplex (dimension-dependent coefficients)."""
    opts = opts or OptimizeOptions("neldermead")
    return _run("neldermead", f, x0, opts)


def vqe_minimize(objective, initial, opts: OptimizeOptions | None = None) -> OptimizeResult:
    opts = opts or OptimizeOptions()
    fn = powell_minimize if opts.optimizer == "powell" else neldermead_minimize
    return fn(objective, initial, opts)
