"""Uniform 1D mesh, P1 Galerkin matrices and a tridiagonal (Thomas) solver.

All assembled systems act on the interior nodes only (homogeneous Dirichlet
rows are eliminated), so for a mesh with r elements the matrices have
dimension r-1.
"""

from dataclasses import dataclass

import numpy as np


class SingularPivotError(Exception):
    """Raised when tridiagonal elimination hits a zero pivot."""

    def __init__(self, index):
        super().__init__(f"singular pivot at row {index}")
        self.index = index


@dataclass(frozen=True)
class Mesh1D:
    """Uniform partition of [0, 1] with n_elements elements of size h."""

    n_elements: int
    h: float
    nodes: np.ndarray

    @property
    def n_interior(self):
        return self.n_elements - 1

    @property
    def interior_nodes(self):
        return self.nodes[1:-1]


def build_mesh(n_elements):
    """Uniform mesh of [0, 1]; rejects fewer than two elements."""
    if n_elements < 2:
        raise ValueError(f"n_elements must be >= 2, got {n_elements}")
    n_elements = int(n_elements)
    nodes = np.linspace(0.0, 1.0, n_elements + 1)
    return Mesh1D(n_elements=n_elements, h=1.0 / n_elements, nodes=nodes)


@dataclass
class TridiagonalMatrix:
    """Tridiagonal matrix stored as (sub, diag, super) coefficient arrays."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        self.sub = np.asarray(self.sub, dtype=float)
        self.diag = np.asarray(self.diag, dtype=float)
        self.sup = np.asarray(self.sup, dtype=float)
        if len(self.sub) != len(self.diag) - 1 or len(self.sup) != len(self.diag) - 1:
            raise ValueError("inconsistent tridiagonal band lengths")

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n - 1), np.zeros(n), np.zeros(n - 1))

    @property
    def n(self):
        return len(self.diag)

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        return y

    def transpose(self):
        return TridiagonalMatrix(self.sup.copy(), self.diag.copy(), self.sub.copy())

    def dense(self):
        a = np.diag(self.diag)
        a += np.diag(self.sub, -1)
        a += np.diag(self.sup, 1)
        return a

    def norm_inf(self):
        return np.abs(self.dense()).sum(axis=1).max()

    def __add__(self, other):
        return TridiagonalMatrix(
            self.sub + other.sub, self.diag + other.diag, self.sup + other.sup
        )

    def __mul__(self, scalar):
        return TridiagonalMatrix(scalar * self.sub, scalar * self.diag, scalar * self.sup)

    __rmul__ = __mul__


def tri_combine(terms):
    """Linear combination sum(coef * T) of TridiagonalMatrix terms."""
    terms = [(c, t) for c, t in terms]
    n = terms[0][1].n
    out = TridiagonalMatrix.zeros(n)
    for coef, t in terms:
        out = out + coef * t
    return out


@dataclass
class GalerkinMatrices:
    """Interior-node P1 mass, convection and stiffness matrices."""

    mass: TridiagonalMatrix
    convection: TridiagonalMatrix
    stiffness: TridiagonalMatrix


def assemble_galerkin(mesh):
    """P1 matrices on the interior nodes of a uniform mesh.

    Rows are test functions: mass (h/6, 2h/3, h/6), stiffness
    (-1/h, 2/h, -1/h), convection (-1/2, 0, 1/2) from c*(U', phi_l).
    """
    n = mesh.n_interior
    h = mesh.h
    mass = TridiagonalMatrix(
        np.full(n - 1, h / 6.0), np.full(n, 2.0 * h / 3.0), np.full(n - 1, h / 6.0)
    )
    stiffness = TridiagonalMatrix(
        np.full(n - 1, -1.0 / h), np.full(n, 2.0 / h), np.full(n - 1, -1.0 / h)
    )
    convection = TridiagonalMatrix(
        np.full(n - 1, -0.5), np.zeros(n), np.full(n - 1, 0.5)
    )
    return GalerkinMatrices(mass=mass, convection=convection, stiffness=stiffness)


def p1_load(mesh, nodal):
    """Interior load vector (g, phi_l) for a P1 field g given by nodal values."""
    g = np.asarray(nodal, dtype=float)
    if len(g) != mesh.n_elements + 1:
        raise ValueError("nodal field length does not match mesh")
    h = mesh.h
    return h / 6.0 * g[:-2] + 2.0 * h / 3.0 * g[1:-1] + h / 6.0 * g[2:]


def galerkin_load_stationary(mesh, gamma, c):
    """Load vector for the source f(x) = -gamma*x - c: entries -h*(gamma*x_l + c)."""
    return -mesh.h * (gamma * mesh.interior_nodes + c)


def thomas_solve(a, rhs):
    """Solve the tridiagonal system a @ x = rhs by forward elimination.

    Raises SingularPivotError with the offending row when a pivot vanishes.
    """
    n = a.n
    rhs = np.asarray(rhs, dtype=float)
    if len(rhs) != n:
        raise ValueError("rhs length does not match matrix")
    cp = np.empty(n - 1) if n > 1 else np.empty(0)
    dp = np.empty(n)
    piv = a.diag[0]
    if piv == 0.0:
        raise SingularPivotError(0)
    if n > 1:
        cp[0] = a.sup[0] / piv
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = a.diag[i] - a.sub[i - 1] * cp[i - 1]
        if piv == 0.0:
            raise SingularPivotError(i)
        if i < n - 1:
            cp[i] = a.sup[i] / piv
        dp[i] = (rhs[i] - a.sub[i - 1] * dp[i - 1]) / piv
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x
