"""Exact solutions, discrete error norms and convergence diagnostics."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def exact_stationary(x, gamma, c, mu):
    """Exact solution of gamma*U + c*U' - mu*U'' = 0, U(0)=0, U(1)=1.

    Written with nonpositive exponents only, so large c/mu or gamma/mu never
    overflow: with rho = sqrt(c^2 + 4*gamma*mu)/mu,

        U(x) = exp((x-1)*(c/mu + rho)/2) * expm1(-rho*x) / expm1(-rho).
    """
    x = np.asarray(x, dtype=float)
    rho = np.sqrt(c * c + 4.0 * gamma * mu) / mu
    if rho < 1e-13:
        return x.copy()
    return np.exp(0.5 * (x - 1.0) * (c / mu + rho)) * np.expm1(-rho * x) / np.expm1(
        -rho
    )


class ExactEvolutiveSeries:
    """Exact solution of u_t + c*u_x - mu*u_xx = 0 with homogeneous data.

    The substitution u = exp(c*x/(2*mu) - c^2*t/(4*mu)) * v turns the problem
    into the heat equation for v, solved by a sine series with coefficients
    of u0(x)*exp(-c*x/(2*mu)).  Coefficients are computed once by composite
    trapezoid quadrature on a dense grid; only the first few matter because
    of the exp(-mu*(j*pi)^2*t) decay.
    """

    def __init__(self, c, mu, u0, n_terms=64, quad_points=20001):
        self.c = c
        self.mu = mu
        self.n_terms = n_terms
        x = np.linspace(0.0, 1.0, quad_points)
        v0 = np.asarray(u0(x), dtype=float) * np.exp(-c * x / (2.0 * mu))
        j = np.arange(1, n_terms + 1)
        self.coeff = 2.0 * np.trapezoid(
            v0[None, :] * np.sin(np.pi * np.outer(j, x)), x, axis=1
        )
        self.sigma = (j * np.pi) ** 2

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        j = np.arange(1, self.n_terms + 1)
        series = np.sin(np.pi * np.outer(x, j)) @ (
            self.coeff * np.exp(-self.mu * self.sigma * t)
        )
        return np.exp(
            self.c * x / (2.0 * self.mu) - self.c**2 * t / (4.0 * self.mu)
        ) * series


def p1_l2_norm(h, nodal):
    """Exact L2 norm of the P1 interpolant with the given nodal values."""
    v = np.asarray(nodal, dtype=float)
    a, b = v[:-1], v[1:]
    return np.sqrt(h / 3.0 * np.sum(a * a + a * b + b * b))


def p1_h1_seminorm(h, nodal):
    """Exact H1 seminorm of the P1 interpolant."""
    v = np.asarray(nodal, dtype=float)
    return np.sqrt(np.sum(np.diff(v) ** 2) / h)


def total_variation(nodal):
    return float(np.abs(np.diff(np.asarray(nodal, dtype=float))).sum())


def prolong_nodal(nodal, factor):
    """Nodal values of the same P1 function on a factor-times finer mesh.

    Linear interpolation is exact here because the fine mesh is nested.
    """
    v = np.asarray(nodal, dtype=float)
    n = len(v) - 1
    coarse = np.linspace(0.0, 1.0, n + 1)
    fine = np.linspace(0.0, 1.0, factor * n + 1)
    return np.interp(fine, coarse, v)


@dataclass
class ErrorReport:
    """Space-time error norms of a trajectory against a reference."""

    linf_l2: float
    l2_h1: float
    nodal_max: float
    per_step: np.ndarray  # columns: t, l2, h1_semi, nodal_max


def _reference_fields(traj, reference, comparison, refine):
    """Reference nodal fields aligned with traj's time levels.

    Returns (fields, h, factor): fields on the comparison grid, its mesh
    size, and the space refinement factor between traj and the grid.
    """
    n_coarse = traj.fields.shape[1] - 1
    if callable(reference):
        if comparison == "fine":
            n_fine = refine * n_coarse
            x = np.linspace(0.0, 1.0, n_fine + 1)
            fields = np.stack([np.asarray(reference(x, t), dtype=float) for t in traj.times])
            return fields, 1.0 / n_fine, refine
        x = np.linspace(0.0, 1.0, n_coarse + 1)
        fields = np.stack([np.asarray(reference(x, t), dtype=float) for t in traj.times])
        return fields, 1.0 / n_coarse, 1

    n_ref = reference.fields.shape[1] - 1
    if n_ref % n_coarse != 0:
        raise ValueError("reference mesh is not a refinement of the trajectory mesh")
    factor = n_ref // n_coarse
    # align time levels: the reference may use a smaller step
    if reference.n_steps % traj.n_steps != 0:
        raise ValueError("reference steps do not align with the trajectory")
    stride = reference.n_steps // traj.n_steps
    if not np.allclose(reference.times[::stride], traj.times, atol=1e-10):
        raise ValueError("reference time levels do not match the trajectory")
    ref_fields = reference.fields[::stride]
    if comparison == "fine":
        return ref_fields, reference.mesh.h, factor
    # nodal comparison: restrict the reference to the coarse nodes
    return ref_fields[:, ::factor], traj.mesh.h, 1


def error_norms(traj, reference, comparison="fine", refine=10):
    """ErrorReport of a trajectory against a reference.

    reference is either a finer/nested SolutionTrajectory or a callable
    u(x, t).  comparison 'fine' measures the error on the reference grid
    (the trajectory is prolonged, which is exact for nested P1 spaces);
    'nodal' restricts the reference to the trajectory's nodes.
    """
    if comparison not in ("fine", "nodal"):
        raise ValueError(f"comparison must be 'fine' or 'nodal', got {comparison!r}")
    ref_fields, h, factor = _reference_fields(traj, reference, comparison, refine)
    k = traj.times[1] - traj.times[0] if len(traj.times) > 1 else 0.0
    rows = []
    for i, t in enumerate(traj.times):
        u = traj.fields[i]
        if factor > 1:
            u = prolong_nodal(u, factor)
        e = u - ref_fields[i]
        rows.append((t, p1_l2_norm(h, e), p1_h1_seminorm(h, e), np.abs(e).max()))
    per_step = np.array(rows)
    # skip the initial datum in the accumulated norms
    active = per_step[1:] if len(per_step) > 1 else per_step
    return ErrorReport(
        linf_l2=float(active[:, 1].max()),
        l2_h1=float(np.sqrt(k * np.sum(active[:, 2] ** 2))) if k > 0 else float(active[0, 2]),
        nodal_max=float(active[:, 3].max()),
        per_step=per_step,
    )


def stationary_errors(nodal, gamma, c, mu, refine=10):
    """Errors of a stationary nodal solution against the exact profile.

    Fine-grid L2/H1 norms compare the prolonged P1 field with the exact
    solution interpolated on a refine-times finer mesh; nodal_max is taken
    at the coarse nodes.
    """
    v = np.asarray(nodal, dtype=float)
    n = len(v) - 1
    x_fine = np.linspace(0.0, 1.0, refine * n + 1)
    e_fine = prolong_nodal(v, refine) - exact_stationary(x_fine, gamma, c, mu)
    x = np.linspace(0.0, 1.0, n + 1)
    e_nodal = v - exact_stationary(x, gamma, c, mu)
    h_fine = 1.0 / (refine * n)
    return ErrorReport(
        linf_l2=p1_l2_norm(h_fine, e_fine),
        l2_h1=p1_h1_seminorm(h_fine, e_fine),
        nodal_max=float(np.abs(e_nodal).max()),
        per_step=np.array([[0.0, p1_l2_norm(h_fine, e_fine), p1_h1_seminorm(h_fine, e_fine), np.abs(e_nodal).max()]]),
    )


def stationary_error_table(nodal, gamma, c, mu, refine=10):
    """Both fine-grid and nodal-restricted error norms against the exact profile.

    Keys: l2_fine, h1_fine (error measured against the exact solution
    interpolated on a refine-times finer mesh), l2_nodal, h1_nodal (norms of
    the P1 interpolant of the nodal errors), nodal_max.
    """
    v = np.asarray(nodal, dtype=float)
    n = len(v) - 1
    h = 1.0 / n
    x_fine = np.linspace(0.0, 1.0, refine * n + 1)
    e_fine = prolong_nodal(v, refine) - exact_stationary(x_fine, gamma, c, mu)
    e_nodal = v - exact_stationary(np.linspace(0.0, 1.0, n + 1), gamma, c, mu)
    h_fine = h / refine
    return {
        "l2_fine": p1_l2_norm(h_fine, e_fine),
        "h1_fine": p1_h1_seminorm(h_fine, e_fine),
        "l2_nodal": p1_l2_norm(h, e_nodal),
        "h1_nodal": p1_h1_seminorm(h, e_nodal),
        "nodal_max": float(np.abs(e_nodal).max()),
    }


def convergence_slope(values, errors):
    """Least-squares slope of log(error) vs log(value), plus pairwise slopes."""
    v = np.asarray(values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(v) != len(e) or len(v) < 2:
        raise ValueError("need at least two (value, error) pairs")
    if np.any(e <= 0.0) or np.any(v <= 0.0):
        raise ValueError("values and errors must be positive for log-log fits")
    lv, le = np.log(v), np.log(e)
    slope = np.polyfit(lv, le, 1)[0]
    pairwise = np.diff(le) / np.diff(lv)
    return float(slope), pairwise


@dataclass
class ConvergenceStudy:
    """Errors over a parameter sweep with fitted slopes per norm."""

    parameter: str
    values: np.ndarray
    errors: dict
    slopes: dict = field(default_factory=dict)

    def fit(self):
        for name, errs in self.errors.items():
            self.slopes[name] = convergence_slope(self.values, errs)[0]
        return self.slopes


@dataclass(frozen=True)
class CFLQuantities:
    peclet: float
    cfl: float
    cfl_bound: float


def cfl_quantities(c, mu, h, k):
    """Mesh Peclet number, CFL number, and the oscillation-free CFL bound.

    The bound P/(3*(1-P)) only applies for P < 1 (the diffusive regime);
    larger mesh Peclet numbers raise ValueError.
    """
    if mu <= 0.0 or h <= 0.0 or k <= 0.0:
        raise ValueError("mu, h and k must be positive")
    p = abs(c) * h / (2.0 * mu)
    if p >= 1.0:
        raise ValueError(f"mesh Peclet number {p} >= 1: CFL bound formula inapplicable")
    return CFLQuantities(
        peclet=p, cfl=abs(c) * k / h, cfl_bound=p / (3.0 * (1.0 - p))
    )


def overshoot_metric(nodal, lo=0.0, hi=1.0, tv_reference=None):
    """Violation of [lo, hi] bounds, plus any total-variation increase.

    With tv_reference (typically TV of the initial datum) the metric also
    penalizes spurious oscillations that stay inside the bounds.
    """
    v = np.asarray(nodal, dtype=float)
    over = max(0.0, float(v.max()) - hi) + max(0.0, lo - float(v.min()))
    if tv_reference is not None:
        over += max(0.0, total_variation(v) - tv_reference)
    return over
