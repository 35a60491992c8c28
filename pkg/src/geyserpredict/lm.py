"""Levenberg-Marquardt solver for small dense least-squares problems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LMResult:
    params: np.ndarray
    sse: float
    initial_sse: float
    iterations: int
    converged: bool
    reason: str


def levenberg_marquardt(
    residual,
    jacobian,
    p0,
    max_iterations=200,
    relative_sse_tolerance=1e-10,
    parameter_tolerance=1e-8,
    sse_floor=1e-28,
):
    """Minimize ``sum(residual(p)**2)`` starting from ``p0``.

    Uses Marquardt's diagonal scaling with Nielsen's damping update. Each
    step solves the augmented system ``[J; sqrt(mu) D] dp = [-r; 0]`` by
    least squares, which avoids forming ``J.T @ J``. Only steps that
    reduce the sum of squares are accepted, so ``sse <= initial_sse``.

    Convergence is declared when an accepted step improves the sum of
    squares by less than ``relative_sse_tolerance`` (relative), when the
    step is smaller than ``parameter_tolerance`` relative to the parameter
    norm, when the sum of squares reaches ``sse_floor``, or when the damping
    grows so large that no descent step exists (a stationary point).
    """
    p = np.asarray(p0, dtype=float).copy()
    r = residual(p)
    sse = float(r @ r)
    initial_sse = sse
    if not np.isfinite(sse):
        return LMResult(p, sse, initial_sse, 0, False, "non-finite start")
    if sse <= sse_floor:
        return LMResult(p, sse, initial_sse, 0, True, "sse floor")

    J = jacobian(p)
    scale = np.maximum(np.sum(J * J, axis=0), 1e-12)
    mu = 1e-3
    nu = 2.0
    n_par = p.size
    for it in range(1, max_iterations + 1):
        D = np.sqrt(mu * scale)
        A = np.vstack([J, np.diag(D)])
        b = np.concatenate([-r, np.zeros(n_par)])
        dp = np.linalg.lstsq(A, b, rcond=None)[0]
        p_new = p + dp
        r_new = residual(p_new)
        sse_new = float(r_new @ r_new)

        predicted = sse - float(np.sum((r + J @ dp) ** 2))
        actual = sse - sse_new
        rho = actual / predicted if predicted > 0 else -1.0
        if np.isfinite(sse_new) and actual > 0 and rho > 0:
            step_small = np.linalg.norm(dp) <= parameter_tolerance * (np.linalg.norm(p) + parameter_tolerance)
            sse_small = actual <= relative_sse_tolerance * sse
            p, r, sse = p_new, r_new, sse_new
            if sse <= sse_floor:
                return LMResult(p, sse, initial_sse, it, True, "sse floor")
            if sse_small:
                return LMResult(p, sse, initial_sse, it, True, "relative sse")
            if step_small:
                return LMResult(p, sse, initial_sse, it, True, "parameter step")
            J = jacobian(p)
            scale = np.maximum(scale, np.sum(J * J, axis=0))
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
        else:
            mu *= nu
            nu *= 2.0
            if mu > 1e30:
                return LMResult(p, sse, initial_sse, it, True, "stationary")
    return LMResult(p, sse, initial_sse, max_iterations, False, "iteration cap")
