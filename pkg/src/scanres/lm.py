"""Shared Levenberg-Marquardt engine for the package's nonlinear fits.

All fits in the package report non-convergence as a flag (never an
exception), return best-so-far parameters, and derive 1-sigma parameter
uncertainties from the Gauss-Newton covariance at the optimum scaled by
the residual variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LMResult:
    params: np.ndarray
    cost: float                 # 0.5 * sum(residual^2)
    residual: np.ndarray
    iterations: int
    converged: bool
    stderr: np.ndarray          # 1-sigma uncertainty per parameter
    covariance: np.ndarray


def _covariance(jac: np.ndarray, residual: np.ndarray) -> np.ndarray:
    n_pts, n_par = jac.shape
    dof = max(n_pts - n_par, 1)
    s2 = float(residual @ residual) / dof
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj)
    return s2 * cov


def levenberg_marquardt(
    residual_jac,
    p0,
    *,
    max_iter: int = 200,
    rel_tol: float = 1e-10,
    damping_init: float = 1e-3,
    bounds=None,
) -> LMResult:
    """Minimize 0.5*||r(p)||^2 given a callable returning (r, J).

    residual_jac(p) must return the residual vector (n,) and its Jacobian
    (n, m).  `bounds`, if given, is a (lo, hi) pair of arrays; trial points
    are clipped into the box.  Steps are accepted only if they lower the
    cost, so the returned cost never exceeds the initial one.
    """
    p = np.array(p0, dtype=float)
    lo = hi = None
    if bounds is not None:
        lo = np.asarray(bounds[0], dtype=float)
        hi = np.asarray(bounds[1], dtype=float)
        p = np.clip(p, lo, hi)

    r, jac = residual_jac(p)
    r = np.asarray(r, dtype=float)
    jac = np.asarray(jac, dtype=float)
    cost = 0.5 * float(r @ r)
    lam = float(damping_init)
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        a = jac.T @ jac
        g = jac.T @ r
        # Marquardt scaling keeps the damping meaningful across badly
        # scaled parameters (f0 ~ 1e10 next to theta ~ 0.1).
        scale = np.sqrt(np.diag(a))
        scale[scale == 0] = 1.0

        accepted = False
        step = None
        for _ in range(60):
            m = a + lam * np.diag(scale**2)
            try:
                step = np.linalg.solve(m, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                if lam > 1e16:
                    raise np.linalg.LinAlgError(
                        "singular normal equations in Levenberg-Marquardt"
                    )
                continue
            p_new = p + step
            if lo is not None:
                p_new = np.clip(p_new, lo, hi)
                step = p_new - p
            r_new, jac_new = residual_jac(p_new)
            r_new = np.asarray(r_new, dtype=float)
            cost_new = 0.5 * float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                accepted = True
                break
            lam *= 10.0
            if lam > 1e16:
                break

        if not accepted:
            # no step lowers the cost: either a genuine minimum (e.g. the
            # float noise floor on noiseless data) or a damping ceiling;
            # converged if the undamped Gauss-Newton step is below rel_tol
            try:
                gn_step = np.linalg.lstsq(a, -g, rcond=None)[0]
                rel_gn = float(np.max(np.abs(gn_step) / (np.abs(p) + 1e-300)))
                converged = converged or rel_gn < rel_tol or cost == 0.0
            except np.linalg.LinAlgError:
                pass
            break

        rel_step = float(np.max(np.abs(step) / (np.abs(p) + 1e-300)))
        rel_drop = (cost - cost_new) / max(cost, 1e-300)
        p, r, jac, cost = p_new, r_new, np.asarray(jac_new, dtype=float), cost_new
        lam = max(lam * 0.3, 1e-14)
        # converged only when the relative residual drop or the relative
        # step falls below tolerance
        if rel_step < rel_tol or rel_drop < rel_tol or cost < 1e-300:
            converged = True
            break

    cov = _covariance(jac, r)
    stderr = np.sqrt(np.abs(np.diag(cov)))
    return LMResult(
        params=p,
        cost=cost,
        residual=r,
        iterations=n_iter,
        converged=converged,
        stderr=stderr,
        covariance=cov,
    )
