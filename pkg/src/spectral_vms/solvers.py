"""Galerkin, spectral VMS and tau-form VMS solvers.

Both the stationary advection-diffusion-reaction problem and one backward
Euler step of the evolutive advection-diffusion problem are instances of the
same scaled problem

    gamma_eff*U + c_eff*U' - mu_eff*U'' = g,   U(0) = U(1) = 0,

with (gamma, c, mu, f) in the stationary case and (1, k*c, k*mu, k*f + U^n)
in the evolutive case.  The stabilized system for this scaled problem is
assembled once and reused across time steps.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fem import (
    Mesh1D,
    SingularPivotError,
    assemble_galerkin,
    p1_load,
    thomas_solve,
    tri_combine,
)
from .stabilization import (
    _StackedMoments,
    assemble_stabilization,
    stabilization_matrix,
    stabilization_rhs,
    tau_exact,
    tau_truncated,
)
from .subscales import ElementSpectralBasis, OperatorScaling, build_bases


class SolverStepError(Exception):
    """A linear solve failed during time stepping."""

    def __init__(self, step, cause):
        super().__init__(f"linear solve failed at step {step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class Galerkin:
    label = "galerkin"


@dataclass(frozen=True)
class SpectralVMS:
    n_modes: int

    @property
    def label(self):
        return f"spectral-vms:{self.n_modes}"


@dataclass(frozen=True)
class TauVMS:
    n_modes: Optional[int] = None
    exact: bool = False

    def __post_init__(self):
        if not self.exact and (self.n_modes is None or self.n_modes < 0):
            raise ValueError("truncated tau mode requires n_modes >= 0")

    @property
    def label(self):
        return "tau-vms:exact" if self.exact else f"tau-vms:{self.n_modes}"


@dataclass(frozen=True)
class StationaryProblem:
    """gamma*U + c*U' - mu*U'' = f on (0,1), U(0)=0, U(1)=1.

    Internally solved for U = Ubar - x with homogeneous boundary values and
    source f(x) = -gamma*x - c; the reported solution is lifted back.
    """

    gamma: float
    c: float
    mu: float

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError("mu must be positive")

    def source_nodal(self, mesh):
        return -self.gamma * mesh.nodes - self.c

    def scaling(self):
        return OperatorScaling.stationary(self.gamma, self.c, self.mu)


def box_initial(x):
    """Indicator of |x - 0.45| <= 0.25."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x - 0.45) <= 0.25, 1.0, 0.0)


@dataclass(frozen=True)
class EvolutiveProblem:
    """dU/dt + c*U' - mu*U'' = f on (0,1)x(0,T], homogeneous Dirichlet data."""

    c: float
    mu: float
    k: float
    T: float
    source: object = None  # callable f(x) or None for zero
    u0: object = box_initial  # callable or nodal array

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError("mu must be positive")
        if self.k <= 0.0:
            raise ValueError("k must be positive")
        if self.T < self.k:
            raise ValueError("T must be at least one time step")

    def n_steps(self):
        n = int(round(self.T / self.k))
        if abs(n * self.k - self.T) > 1e-12:
            raise ValueError(
                f"T = {self.T} is not an integer multiple of k = {self.k}"
            )
        return n

    def source_nodal(self, mesh):
        if self.source is None:
            return np.zeros(mesh.n_elements + 1)
        return np.asarray(self.source(mesh.nodes), dtype=float)

    def initial_nodal(self, mesh):
        if callable(self.u0):
            u = np.asarray(self.u0(mesh.nodes), dtype=float).copy()
        else:
            u = np.asarray(self.u0, dtype=float).copy()
            if len(u) != mesh.n_elements + 1:
                raise ValueError("u0 length does not match mesh")
        u[0] = 0.0
        u[-1] = 0.0
        return u

    def scaling(self):
        return OperatorScaling.evolutive(self.c, self.mu, self.k)


@dataclass
class SolutionTrajectory:
    """Nodal fields per time level, boundary values included."""

    times: np.ndarray
    fields: np.ndarray  # shape (n_steps + 1, n_nodes)
    mesh: Mesh1D
    problem: object = None
    mode: object = None

    @property
    def n_steps(self):
        return len(self.times) - 1


def _scaled_system_matrix(mesh, scaling, mode):
    """Interior system matrix of the scaled problem, plus spectral bases."""
    gal = assemble_galerkin(mesh)
    a = tri_combine(
        [
            (scaling.gamma_eff, gal.mass),
            (scaling.c_eff, gal.convection),
            (scaling.mu_eff, gal.stiffness),
        ]
    )
    bases = None
    moments = None
    if isinstance(mode, SpectralVMS):
        bases = build_bases(mesh, scaling, mode.n_modes)
        if mode.n_modes > 0:
            blocks = assemble_stabilization(mesh, bases, scaling)
            a = a + stabilization_matrix(blocks, scaling)
            moments = _StackedMoments(bases)
    elif not isinstance(mode, Galerkin):
        raise ValueError(f"unsupported mode for the scaled system: {mode!r}")
    return a, bases, moments


def _scaled_rhs(mesh, scaling, moments, g_nodal):
    rhs = p1_load(mesh, g_nodal)
    if moments is not None:
        s1, s2 = stabilization_rhs(mesh, moments, scaling, g_nodal)
        rhs = rhs + s1 + s2
    return rhs


def solve_stationary(problem, mesh, mode):
    """Nodal values of the lifted solution Ubar = U + x at all nodes."""
    scaling = problem.scaling()
    a, _, moments = _scaled_system_matrix(mesh, scaling, mode)
    g = problem.source_nodal(mesh)
    rhs = _scaled_rhs(mesh, scaling, moments, g)
    u_int = thomas_solve(a, rhs)
    ubar = mesh.nodes.copy()
    ubar[1:-1] += u_int
    return ubar


def _p1_load_dtest(mesh, nodal):
    """Interior vector (w, phi_l') for a P1 field w over all nodes."""
    w = np.asarray(nodal, dtype=float)
    return 0.5 * (w[:-2] - w[2:])


class _EvolutiveStepper:
    """Precomputed backward-Euler step for a fixed problem/mesh/mode."""

    def __init__(self, problem, mesh, mode):
        self.problem = problem
        self.mesh = mesh
        self.mode = mode
        k, c, mu = problem.k, problem.c, problem.mu
        self.f_nodal = problem.source_nodal(mesh)
        scaling = problem.scaling()
        if isinstance(mode, TauVMS):
            gal = assemble_galerkin(mesh)
            if mode.exact:
                tau = tau_exact(k, c, mu, mesh.h)
            else:
                basis = ElementSpectralBasis(0.0, mesh.h, scaling, mode.n_modes)
                tau = tau_truncated(basis)
            self.tau = tau
            self.matrix = tri_combine(
                [
                    (1.0 - tau, gal.mass),
                    ((1.0 - tau) * k * c, gal.convection),
                    (k * mu, gal.stiffness),
                    (tau * k * c, gal.convection.transpose()),
                    (tau * (k * c) ** 2, gal.stiffness),
                ]
            )
            self.scaling = scaling
            self.moments = None
        else:
            self.tau = None
            self.scaling = scaling
            self.matrix, _, self.moments = _scaled_system_matrix(mesh, scaling, mode)

    def step(self, u_prev):
        k = self.problem.k
        if self.tau is None:
            g = k * self.f_nodal + u_prev
            rhs = _scaled_rhs(self.mesh, self.scaling, self.moments, g)
        else:
            tau, c = self.tau, self.problem.c
            rhs = (
                (1.0 - tau) * p1_load(self.mesh, k * self.f_nodal + u_prev)
                + tau * k**2 * c * _p1_load_dtest(self.mesh, self.f_nodal)
                + tau * k * c * _p1_load_dtest(self.mesh, u_prev)
            )
        u_int = thomas_solve(self.matrix, rhs)
        u = np.zeros_like(u_prev)
        u[1:-1] = u_int
        return u


def step_evolutive(u_prev, problem, mesh, mode):
    """One backward-Euler step (Galerkin or spectral VMS)."""
    if isinstance(mode, TauVMS):
        raise ValueError("use step_evolutive_tau for tau-form modes")
    return _EvolutiveStepper(problem, mesh, mode).step(np.asarray(u_prev, dtype=float))


def step_evolutive_tau(u_prev, problem, mesh, mode):
    """One backward-Euler step of the tau-form system."""
    if not isinstance(mode, TauVMS):
        raise ValueError("step_evolutive_tau requires a TauVMS mode")
    return _EvolutiveStepper(problem, mesh, mode).step(np.asarray(u_prev, dtype=float))


def solve_evolutive(problem, mesh, mode):
    """Backward-Euler trajectory over N = T/k steps."""
    n_steps = problem.n_steps()
    stepper = _EvolutiveStepper(problem, mesh, mode)
    fields = np.empty((n_steps + 1, mesh.n_elements + 1))
    fields[0] = problem.initial_nodal(mesh)
    for n in range(n_steps):
        try:
            fields[n + 1] = stepper.step(fields[n])
        except SingularPivotError as exc:
            raise SolverStepError(n + 1, exc) from exc
    times = problem.k * np.arange(n_steps + 1)
    return SolutionTrajectory(
        times=times, fields=fields, mesh=mesh, problem=problem, mode=mode
    )
