"""
Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Small problems only (a handful of parameters): the normal equations are
solved directly, with Marquardt's diagonal scaling so that the iteration
does not care about the units of each parameter.  Jacobians come from
central finite differences unless the problem supplies its own.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import FitError, RankDeficiencyError


@dataclass
class FitProblem:
    residual_fn: Callable[[np.ndarray], np.ndarray]
    x0: Sequence[float]
    bounds: tuple | None = None
    names: Sequence[str] | None = None
    jacobian_fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float).ravel()
        if self.x0.size < 1:
            raise ValueError("need at least one parameter")
        if self.bounds is not None:
            lo, hi = self.bounds
            lo = np.broadcast_to(np.asarray(lo, dtype=float), self.x0.shape).copy()
            hi = np.broadcast_to(np.asarray(hi, dtype=float), self.x0.shape).copy()
            if np.any(lo > hi):
                raise ValueError("lower bound above upper bound")
            outside = (self.x0 < lo) | (self.x0 > hi)
            if outside.any():
                i = int(np.flatnonzero(outside)[0])
                name = self.names[i] if self.names else f"x[{i}]"
                raise ValueError(f"initial value of {name} = {self.x0[i]} outside bounds [{lo[i]}, {hi[i]}]")
            self.bounds = (lo, hi)
        if self.names is None:
            self.names = [f"p{i}" for i in range(self.x0.size)]

    @property
    def n_params(self):
        return self.x0.size

    def project(self, x):
        if self.bounds is None:
            return x
        return np.clip(x, *self.bounds)


@dataclass
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    n_iterations: int
    converged: bool
    history: list = field(default_factory=list)
    gradient_norm: float = np.nan
    message: str = ""
    n_evaluations: int = 0
    names: Sequence[str] = ()

    @property
    def stderr(self):
        return np.sqrt(np.diag(self.covariance))

    def as_dict(self):
        return {
            "params": dict(zip(self.names, map(float, self.params))),
            "stderr": dict(zip(self.names, map(float, self.stderr))),
            "covariance": self.covariance.tolist(),
            "residual_norm": float(self.residual_norm),
            "n_iterations": int(self.n_iterations),
            "converged": bool(self.converged),
            "gradient_norm": float(self.gradient_norm),
            "message": self.message,
        }


def _checked(residual_fn, x, what="residual"):
    r = np.asarray(residual_fn(x), dtype=float).ravel()
    if not np.all(np.isfinite(r)):
        raise FitError(f"non-finite {what} at parameters {x.tolist()}", params=x.copy())
    return r


def finite_difference_jacobian(residual_fn, x, rel_step=1e-6, abs_floor=1e-10,
                               r0=None, bounds=None, scheme="central"):
    """Finite-difference Jacobian, one column per parameter.

    The step for parameter ``i`` is ``max(rel_step * |x_i|, abs_floor)``.
    ``scheme`` is ``"central"`` or ``"forward"``; near a bound the central
    rule falls back to the one-sided rule pointing into the feasible set.
    """
    x = np.asarray(x, dtype=float)
    if r0 is None and scheme != "central":
        r0 = _checked(residual_fn, x)
    cols = []
    for i in range(x.size):
        h = max(rel_step * abs(x[i]), abs_floor)
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        use = scheme
        if bounds is not None:
            lo, hi = bounds
            if up[i] > hi[i]:
                use = "backward"
            elif down[i] < lo[i] and scheme == "central":
                use = "forward"
        try:
            if use == "central":
                col = (_checked(residual_fn, up) - _checked(residual_fn, down)) / (2 * h)
            else:
                if r0 is None:
                    r0 = _checked(residual_fn, x)
                if use == "forward":
                    col = (_checked(residual_fn, up) - r0) / h
                else:
                    col = (r0 - _checked(residual_fn, down)) / h
        except FitError as exc:
            raise FitError(f"Jacobian column {i}: {exc}", params=x.copy()) from None
        cols.append(col)
    return np.column_stack(cols)


def covariance_from_jacobian(J, residuals, rcond=None):
    """``s**2 (J^T J)^-1`` with ``s**2 = |r|**2 / (m - n)``.

    Raises :class:`RankDeficiencyError` when the Jacobian is singular to
    working precision.
    """
    m, n = J.shape
    u, s, vt = np.linalg.svd(J, full_matrices=False)
    if rcond is None:
        rcond = max(m, n) * np.finfo(float).eps
    if s.size < n or s[-1] <= rcond * s[0]:
        raise RankDeficiencyError(
            f"Jacobian is rank deficient (singular values {s.tolist()})")
    dof = m - n
    s2 = float(residuals @ residuals) / dof if dof > 0 else 1.0
    cov = (vt.T / s ** 2) @ vt * s2
    return 0.5 * (cov + cov.T)


def _gradient_cosine(J, r, floor=0.0):
    # Largest cosine between the residual vector and a Jacobian column.
    # Residuals below ``floor`` are rounding noise: the fit is exact.
    rn = np.linalg.norm(r)
    if rn <= floor:
        return 0.0
    cn = np.linalg.norm(J, axis=0)
    g = np.abs(J.T @ r)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(cn > 0, g / (cn * rn), 0.0)
    return float(cos.max())


def least_squares(problem: FitProblem, max_iter=100, gradient_tol=1e-6, step_tol=1e-10,
                  damping_init=1e-6, rel_step=1e-6, abs_step=1e-10,
                  compute_covariance=True) -> FitResult:
    """Minimise ``|residual_fn(x)|**2`` from ``problem.x0``.

    The iterate counts as converged when it is stationary: the largest
    cosine between the residual vector and any Jacobian column is below
    ``gradient_tol``, or the undamped Gauss-Newton step from it is shorter
    than ``step_tol`` relative to ``|x|``, or the residual has vanished to
    rounding.  Damping is divided by 10 on every accepted step and
    multiplied by 10 on every rejected one.
    """
    f = problem.residual_fn
    x = problem.project(problem.x0.copy())
    r = _checked(f, x)
    n_eval = 1
    norm = float(np.linalg.norm(r))
    history = [(x.copy(), norm)]
    floor = 1e-13 * norm

    def jac(x, r):
        nonlocal n_eval
        if problem.jacobian_fn is not None:
            return np.asarray(problem.jacobian_fn(x), dtype=float)
        n_eval += 2 * x.size
        return finite_difference_jacobian(f, x, rel_step, abs_step, r0=r, bounds=problem.bounds)

    def stationary(J, r, x):
        gcos = _gradient_cosine(J, r, floor)
        if gcos <= gradient_tol:
            return gcos, "gradient below tolerance"
        gn = np.linalg.lstsq(J, -r, rcond=None)[0]
        gn = problem.project(x + gn) - x
        if np.linalg.norm(gn) <= step_tol * (np.linalg.norm(x) + step_tol):
            return gcos, "Gauss-Newton step below tolerance"
        return gcos, None

    lam = damping_init
    J = jac(x, r)
    gcos, reason = stationary(J, r, x)
    converged = reason is not None
    message = reason or "iteration budget exhausted"
    it = 0
    while not converged and it < max_iter:
        it += 1
        JtJ = J.T @ J
        g = J.T @ r
        diag = np.diag(JtJ).copy()
        diag[diag <= 0] = max(diag.max(), 1.0) * 1e-12
        accepted = False
        while lam < 1e16:
            try:
                step = -np.linalg.solve(JtJ + lam * np.diag(diag), g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            x_new = problem.project(x + step)
            if np.linalg.norm(x_new - x) <= step_tol * (np.linalg.norm(x) + step_tol):
                break
            r_new = _checked(f, x_new)
            n_eval += 1
            norm_new = float(np.linalg.norm(r_new))
            if norm_new < norm:
                x, r, norm = x_new, r_new, norm_new
                lam = max(lam / 10, 1e-15)
                accepted = True
                break
            lam *= 10
        if not accepted:
            message = "no decrease possible"
            break
        history.append((x.copy(), norm))
        J = jac(x, r)
        gcos, reason = stationary(J, r, x)
        if reason is not None:
            converged, message = True, reason

    cov = np.full((x.size, x.size), np.nan)
    if compute_covariance:
        cov = covariance_from_jacobian(J, r)
    return FitResult(params=x, covariance=cov, residual_norm=norm, n_iterations=it,
                     converged=converged, history=history, gradient_norm=gcos,
                     message=message, n_evaluations=n_eval, names=list(problem.names))


def write_trace_csv(result: FitResult, path):
    """Write ``iteration,norm,<param names>`` for every accepted iterate."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "norm", *result.names])
        for i, (params, norm) in enumerate(result.history):
            w.writerow([i, repr(float(norm)), *(repr(float(p)) for p in params)])
    return path
