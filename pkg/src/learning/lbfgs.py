"""
L-BFGS minimizer
================

Limited-memory quasi-Newton minimization with the two-loop recursion and a
backtracking Armijo line search. The "scipy" backend hands the same
objective to scipy.optimize.minimize(method="L-BFGS-B").
"""

from collections import deque
from dataclasses import dataclass
from typing import Callable, Deque, Optional, Tuple
import logging

import numpy as np
from scipy.optimize import minimize

from src.schemas import OptimizerConfig

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]

CURVATURE_EPS = 1e-12


@dataclass
class LBFGSResult:
    x: np.ndarray
    value: float
    gradient_norm: float
    iterations: int
    evaluations: int
    converged: bool
    message: str


def _two_loop(grad: np.ndarray, s_hist: Deque[np.ndarray], y_hist: Deque[np.ndarray]) -> np.ndarray:
    """H_k @ grad from the stored correction pairs."""
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_hist), reversed(y_hist)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        q -= a * y
        alphas.append((rho, a))
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), (rho, a) in zip(zip(s_hist, y_hist), reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return q


def _minimize_builtin(fun: Objective, x0: np.ndarray, config: OptimizerConfig) -> LBFGSResult:
    x = np.array(x0, dtype=np.float64, copy=True)
    f, g = fun(x)
    evaluations = 1
    gnorm = float(np.linalg.norm(g))
    if gnorm <= config.gradient_tolerance:
        return LBFGSResult(x, f, gnorm, 0, evaluations, True, "gradient below tolerance")

    s_hist: Deque[np.ndarray] = deque(maxlen=config.memory)
    y_hist: Deque[np.ndarray] = deque(maxlen=config.memory)
    message = "maximum iterations reached"
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iterations + 1):
        direction = -_two_loop(g, s_hist, y_hist)
        slope = float(g @ direction)
        if slope >= 0:
            # not a descent direction; restart from steepest descent
            s_hist.clear()
            y_hist.clear()
            direction = -g
            slope = -gnorm ** 2
        step = 1.0 if s_hist else min(1.0, 1.0 / gnorm)

        accepted = False
        for _ in range(config.max_line_search):
            x_new = x + step * direction
            f_new, g_new = fun(x_new)
            evaluations += 1
            if np.isfinite(f_new) and f_new <= f + config.armijo_c * step * slope:
                accepted = True
                break
            step *= config.backtrack
        if not accepted:
            message = "line search failed"
            iteration -= 1
            break

        s, y = x_new - x, g_new - g
        if float(s @ y) > CURVATURE_EPS * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
        x, f, g = x_new, f_new, g_new
        gnorm = float(np.linalg.norm(g))
        logger.debug("L-BFGS iteration %d: f=%.6g |g|=%.3e step=%.3g", iteration, f, gnorm, step)
        if gnorm <= config.gradient_tolerance:
            converged = True
            message = "gradient below tolerance"
            break
    return LBFGSResult(x, f, gnorm, iteration, evaluations, converged, message)


def _minimize_scipy(fun: Objective, x0: np.ndarray, config: OptimizerConfig) -> LBFGSResult:
    result = minimize(
        fun,
        np.asarray(x0, dtype=np.float64),
        method="L-BFGS-B",
        jac=True,
        options={
            "maxiter": config.max_iterations,
            "maxcor": config.memory,
            "gtol": config.gradient_tolerance,
            "maxls": config.max_line_search,
        },
    )
    gnorm = float(np.linalg.norm(result.jac)) if result.jac is not None else float("nan")
    return LBFGSResult(
        x=np.asarray(result.x),
        value=float(result.fun),
        gradient_norm=gnorm,
        iterations=int(result.nit),
        evaluations=int(result.nfev),
        converged=bool(result.success),
        message=str(result.message),
    )


def minimize_lbfgs(fun: Objective, x0: np.ndarray, config: Optional[OptimizerConfig] = None) -> LBFGSResult:
    """
    Minimize `fun` (returning value and gradient) from x0.

    With max_iterations == 0 the objective is evaluated once and x0 returned.
    """
    config = config or OptimizerConfig()
    if config.max_iterations == 0:
        f, g = fun(np.asarray(x0, dtype=np.float64))
        return LBFGSResult(np.array(x0, dtype=np.float64), f, float(np.linalg.norm(g)), 0, 1, False,
                           "maximum iterations reached")
    if config.backend == "scipy":
        return _minimize_scipy(fun, x0, config)
    return _minimize_builtin(fun, x0, config)


__all__ = ["LBFGSResult", "minimize_lbfgs"]
