"""Sub-grid stabilization blocks and the element Green's-function machinery.

The four block matrices follow the convention

    B1_lm = sum_j sum_K beta_j (phi_l, p z_j)_K (phi_m, z_j)_K,
    B2_lm = ... (phi_l', p z_j) (phi_m, z_j),
    B3_lm = ... (phi_l, p z_j) (phi_m', z_j),
    B4_lm = ... (phi_l', p z_j) (phi_m', z_j),

i.e. the row index carries the weighted factor.  The weak form of the
stabilized problem puts the test function on the *unweighted* side, so the
system matrix uses the transposed blocks; see solvers.stabilization_matrix.
"""

from dataclasses import dataclass

import mpmath
import numpy as np

from .fem import TridiagonalMatrix
from .subscales import ElementSpectralBasis


@dataclass
class StabilizationBlocks:
    """Interior-node sub-grid matrices and stabilized right-hand sides."""

    b1: TridiagonalMatrix
    b2: TridiagonalMatrix
    b3: TridiagonalMatrix
    b4: TridiagonalMatrix
    rhs_s1: np.ndarray
    rhs_s2: np.ndarray


class _StackedMoments:
    """Per-element moment arrays stacked to shape (n_elements, n_modes)."""

    def __init__(self, bases):
        self.n_elements = len(bases)
        self.beta = np.stack([b.beta for b in bases])
        self.pl_pz = np.stack([b.phi_left_pz for b in bases])
        self.pr_pz = np.stack([b.phi_right_pz for b in bases])
        self.dpl_pz = np.stack([b.dphi_left_pz for b in bases])
        self.dpr_pz = np.stack([b.dphi_right_pz for b in bases])
        self.pl_z = np.stack([b.phi_left_z for b in bases])
        self.pr_z = np.stack([b.phi_right_z for b in bases])
        self.dpl_z = np.stack([b.dphi_left_z for b in bases])
        self.dpr_z = np.stack([b.dphi_right_z for b in bases])


def _scatter_matrix(n_interior, v_ll, v_lr, v_rl, v_rr):
    """Accumulate per-element 2x2 blocks into an interior tridiagonal matrix."""
    t = TridiagonalMatrix.zeros(n_interior)
    t.diag += v_ll[1:]
    t.diag += v_rr[:-1]
    t.sup += v_lr[1:-1]
    t.sub += v_rl[1:-1]
    return t


def _scatter_rhs(n_nodes, s_left, s_right):
    acc = np.zeros(n_nodes)
    acc[:-1] += s_left
    acc[1:] += s_right
    return acc[1:-1]


def assemble_stabilization(mesh, bases, scaling, f_nodal=None, u_prev=None):
    """Sub-grid matrices B1..B4 and stabilized right-hand sides.

    The right-hand sides are built from the data part of the element
    residual, g = f_nodal + u_prev (both P1 nodal fields over all nodes;
    for the evolutive step pass f_nodal already multiplied by the time
    step):

        rhs_s1_l = -gamma_eff * sum beta (g, p z_j) (phi_l, z_j),
        rhs_s2_l = +c_eff    * sum beta (g, p z_j) (phi_l', z_j).
    """
    if len(bases) != mesh.n_elements:
        raise ValueError("one spectral basis per element is required")
    n = mesh.n_interior
    if bases and bases[0].n_modes == 0:
        zero = lambda: TridiagonalMatrix.zeros(n)
        return StabilizationBlocks(zero(), zero(), zero(), zero(), np.zeros(n), np.zeros(n))

    m = _StackedMoments(bases)

    def block(p_l, p_r, z_l, z_r):
        v_ll = (m.beta * p_l * z_l).sum(axis=1)
        v_lr = (m.beta * p_l * z_r).sum(axis=1)
        v_rl = (m.beta * p_r * z_l).sum(axis=1)
        v_rr = (m.beta * p_r * z_r).sum(axis=1)
        return _scatter_matrix(n, v_ll, v_lr, v_rl, v_rr)

    b1 = block(m.pl_pz, m.pr_pz, m.pl_z, m.pr_z)
    b2 = block(m.dpl_pz, m.dpr_pz, m.pl_z, m.pr_z)
    b3 = block(m.pl_pz, m.pr_pz, m.dpl_z, m.dpr_z)
    b4 = block(m.dpl_pz, m.dpr_pz, m.dpl_z, m.dpr_z)

    g = None
    if f_nodal is not None:
        g = np.asarray(f_nodal, dtype=float).copy()
    if u_prev is not None:
        u_prev = np.asarray(u_prev, dtype=float)
        g = u_prev.copy() if g is None else g + u_prev
    if g is None:
        rhs_s1 = np.zeros(n)
        rhs_s2 = np.zeros(n)
    else:
        rhs_s1, rhs_s2 = stabilization_rhs(mesh, m, scaling, g)
    return StabilizationBlocks(b1, b2, b3, b4, rhs_s1, rhs_s2)


def stabilization_rhs(mesh, moments, scaling, g_nodal):
    """Stabilized right-hand sides for a P1 data field g (all nodes).

    moments is either a list of per-element bases or a prebuilt
    _StackedMoments; returns (rhs_s1, rhs_s2) over the interior nodes.
    """
    m = moments if isinstance(moments, _StackedMoments) else _StackedMoments(moments)
    g = np.asarray(g_nodal, dtype=float)
    if len(g) != mesh.n_elements + 1:
        raise ValueError("nodal field length does not match mesh")
    g_left = g[:-1][:, None]
    g_right = g[1:][:, None]
    gp = m.beta * (g_left * m.pl_pz + g_right * m.pr_pz)  # beta*(g, p z_j) per element
    s1_left = (gp * m.pl_z).sum(axis=1)
    s1_right = (gp * m.pr_z).sum(axis=1)
    s2_left = (gp * m.dpl_z).sum(axis=1)
    s2_right = (gp * m.dpr_z).sum(axis=1)
    n_nodes = mesh.n_elements + 1
    rhs_s1 = -scaling.gamma_eff * _scatter_rhs(n_nodes, s1_left, s1_right)
    rhs_s2 = scaling.c_eff * _scatter_rhs(n_nodes, s2_left, s2_right)
    return rhs_s1, rhs_s2


def stabilization_matrix(blocks, scaling):
    """System-matrix contribution of the sub-grid scales (weak-form rows).

    Equals -g^2*B1' - g*c*B2' + g*c*B3' + c^2*B4' with (g, c) the effective
    reaction and velocity and ' the transpose; the transposes appear because
    the blocks carry the weighted factor on the row index while the test
    function pairs with the unweighted one.
    """
    g, c = scaling.gamma_eff, scaling.c_eff
    return (
        (-(g**2)) * blocks.b1.transpose()
        + (-g * c) * blocks.b2.transpose()
        + (g * c) * blocks.b3.transpose()
        + (c**2) * blocks.b4.transpose()
    )


def _bubble_exponents(k, c, mu, h):
    if k <= 0.0 or mu <= 0.0 or h <= 0.0:
        raise ValueError("k, mu and h must be positive")
    root = h * np.sqrt(c * c * k + 4.0 * mu) / (np.sqrt(k) * mu)
    l1 = 0.5 * (c * h / mu - root)
    l2 = 0.5 * (c * h / mu + root)
    if l1 == l2:
        raise ValueError("degenerate bubble exponents (L1 == L2)")
    return l1, l2


def bubble_eval(xhat, k, c, mu, h):
    """Element bubble b(x) on the reference element [0, 1].

    Solves b + (k c / h) b' - (k mu / h^2) b'' = 1 with b(0) = b(1) = 0.
    All exponentials are normalized by exp(L2) (the largest exponent), so
    the evaluation never overflows.
    """
    l1, l2 = _bubble_exponents(k, c, mu, h)
    x = np.asarray(xhat, dtype=float)
    num = (
        -np.exp(l1 + l2 * (x - 1.0))
        + np.exp(l2 * (x - 1.0))
        + np.exp(l1 * x)
        - np.exp(l1 * x - l2)
        + np.exp(l1 - l2)
        - 1.0
    )
    return num / np.expm1(l1 - l2)


def tau_exact(k, c, mu, h):
    """Mean of the bubble over the element: the exact stabilization coefficient."""
    l1, l2 = _bubble_exponents(k, c, mu, h)
    if abs(l1) < 0.1 or abs(l2) < 0.1:
        # the closed form cancels severely for small exponents
        return _tau_exact_mp(l1, l2)
    term1 = np.expm1(l1) * (-np.expm1(-l2)) * l2
    term2 = l1 * (
        np.exp(l1 - l2) * (l2 + 1.0) - np.exp(l1) - l2 + 1.0 - np.exp(-l2)
    )
    return (term1 + term2) / (l1 * l2 * np.expm1(l1 - l2))


def _tau_exact_mp(l1, l2):
    with mpmath.workdps(60):
        e1 = mpmath.e**mpmath.mpf(l1)
        e2 = mpmath.e**mpmath.mpf(l2)
        l1m = mpmath.mpf(l1)
        l2m = mpmath.mpf(l2)
        num = (e1 - 1) * (e2 - 1) * l2m + l1m * (
            e1 * (l2m + 1) - e2 * (e1 + l2m - 1) - 1
        )
        return float(num / (l1m * l2m * (e1 - e2)))


def tau_truncated(basis):
    """Spectral truncation of the stabilization coefficient.

    (1/h) * sum_j beta_j * (int_K p z_j) * (int_K z_j), using the basis'
    closed-form moments.
    """
    if basis.n_modes == 0:
        return 0.0
    return float(np.dot(basis.beta, basis.one_pz * basis.one_z) / basis.h)


@dataclass(frozen=True)
class TauPair:
    """Exact and truncated stabilization coefficients for one element."""

    tau_exact: float
    tau_truncated: float
    n_modes: int
    peclet: float


def tau_pair(k, c, mu, h, n_modes, scaling_cls=None):
    """TauPair for the backward-Euler step operator on an element of size h."""
    from .subscales import OperatorScaling

    scaling = OperatorScaling.evolutive(c, mu, k)
    basis = ElementSpectralBasis(0.0, h, scaling, n_modes)
    return TauPair(
        tau_exact=tau_exact(k, c, mu, h),
        tau_truncated=tau_truncated(basis),
        n_modes=n_modes,
        peclet=abs(c) * h / (2.0 * mu),
    )


def green_truncated(basis, x, y):
    """Truncated element Green's function sum_{j<=M} beta_j (p z_j)(y) z_j(x)."""
    if basis.n_modes == 0:
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)[()]
    ty = (np.asarray(y, dtype=float) - basis.x_left) / basis.h
    tx = (np.asarray(x, dtype=float) - basis.x_left) / basis.h
    b = basis.j * np.pi
    pz_y = basis._pc * np.exp(-basis.a * ty[..., None]) * np.sin(b * ty[..., None])
    z_x = basis._zc * np.exp(basis.a * tx[..., None]) * np.sin(b * tx[..., None])
    return (basis.beta * pz_y * z_x).sum(axis=-1)


class GreenFunctionTruncation:
    """Callable wrapper g(x, y) around green_truncated for one element."""

    def __init__(self, basis):
        self.basis = basis
        self.n_modes = basis.n_modes

    def __call__(self, x, y):
        return green_truncated(self.basis, x, y)
