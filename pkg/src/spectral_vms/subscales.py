"""Per-element eigenmodes of the scaled advection-diffusion-reaction operator.

On an element K = [x_left, x_left + h] the operator

    L u = gamma_eff * u + c_eff * u' - mu_eff * u''

has eigenfunctions exp-weighted sines.  In element-local coordinates
t = (x - x_left)/h we use

    z_j(x)   = gauge * sqrt(2/h) * exp(a*t) * sin(j*pi*t),
    p(x)     = gauge**(-2) * exp(-2*a*t),        a = c_eff*h/(2*mu_eff),

so that (z_j, z_m)_p = delta_jm exactly.  The gauge constant only rescales
z_j and p*z_j in opposite directions; every assembled quantity multiplies
one moment of each kind, so results are gauge-invariant.  Keeping the
exponential local to the element (instead of exp(c*x/(2*mu)) globally)
is what prevents overflow at large Peclet numbers.

All elemental inner products against the P1 basis reduce to

    I0(s) = int_0^1 exp(s*t) * sin(j*pi*t) dt,
    I1(s) = int_0^1 t * exp(s*t) * sin(j*pi*t) dt,

with s = +a for z_j and s = -a for p*z_j.  With b = j*pi,

    I0(s) = b * (1 - (-1)^j * exp(s)) / (s^2 + b^2),
    I1(s) = -(-1)^j * b * exp(s) / (s^2 + b^2) - 2*s*I0(s) / (s^2 + b^2),

where 1 - (-1)^j * exp(s) is evaluated through expm1 for even j, so the
formulas are cancellation-free for any s (no series fallback needed).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OperatorScaling:
    """Effective (reaction, velocity, diffusion) coefficients of the operator."""

    gamma_eff: float
    c_eff: float
    mu_eff: float

    def __post_init__(self):
        if self.mu_eff <= 0.0:
            raise ValueError("mu_eff must be positive")
        if self.gamma_eff < 0.0:
            raise ValueError("gamma_eff must be nonnegative")

    @classmethod
    def stationary(cls, gamma, c, mu):
        return cls(gamma_eff=gamma, c_eff=c, mu_eff=mu)

    @classmethod
    def evolutive(cls, c, mu, k):
        """Backward-Euler step operator: u + k*c*u' - k*mu*u''."""
        return cls(gamma_eff=1.0, c_eff=k * c, mu_eff=k * mu)


@dataclass(frozen=True)
class EigenMode:
    j: int
    sigma_j: float
    eta_j: float
    beta_j: float


def laplace_eigenvalue(j, h):
    """Dirichlet Laplace eigenvalue (j*pi/h)^2 on an element of length h."""
    if j <= 0:
        raise ValueError(f"mode index must be >= 1, got {j}")
    return (j * np.pi / h) ** 2


def operator_eigenvalue(j, scaling, h):
    """eta_j = gamma_eff + mu_eff*(sigma_j + c_eff^2/(4*mu_eff^2))."""
    sigma = laplace_eigenvalue(j, h)
    return scaling.gamma_eff + scaling.mu_eff * (
        sigma + scaling.c_eff**2 / (4.0 * scaling.mu_eff**2)
    )


def _exp_sin_moments(s, b, parity):
    """I0 and I1 for exponents s (scalar) against sin(b*t), b = j*pi.

    parity is (-1)^j as an array aligned with b.
    """
    denom = s * s + b * b
    es = np.exp(s)
    # 1 - (-1)^j * e^s, via expm1 when the subtraction would cancel (even j)
    e_term = np.where(parity > 0, -np.expm1(s), 1.0 + es)
    i0 = b * e_term / denom
    i1 = -parity * b * es / denom - 2.0 * s * i0 / denom
    return i0, i1


class ElementSpectralBasis:
    """Eigenmodes j = 1..M on one element, with closed-form P1 moments.

    Moment arrays (indexed by mode) are kept for both the plain
    eigenfunctions z_j and the weighted ones p*z_j:

        phi_left_*,  phi_right_*   -- (phi, .)_K for the two hat functions
        dphi_left_*, dphi_right_*  -- (phi', .)_K
        one_*                      -- (1, .)_K
    """

    def __init__(self, x_left, h, scaling, n_modes, gauge=1.0, element=0):
        if n_modes < 0:
            raise ValueError("n_modes must be >= 0")
        if gauge <= 0.0:
            raise ValueError("gauge must be positive")
        self.element = element
        self.x_left = x_left
        self.x_right = x_left + h
        self.h = h
        self.scaling = scaling
        self.n_modes = int(n_modes)
        self.gauge = gauge
        self.a = scaling.c_eff * h / (2.0 * scaling.mu_eff)

        j = np.arange(1, self.n_modes + 1, dtype=float)
        self.j = j
        self.sigma = (j * np.pi / h) ** 2
        self.eta = scaling.gamma_eff + scaling.mu_eff * (
            self.sigma + scaling.c_eff**2 / (4.0 * scaling.mu_eff**2)
        )
        self.beta = 1.0 / self.eta

        b = j * np.pi
        parity = np.where(np.mod(j, 2.0) == 0.0, 1.0, -1.0)
        zc = gauge * np.sqrt(2.0 / h)
        pc = np.sqrt(2.0 / h) / gauge

        i0z, i1z = _exp_sin_moments(self.a, b, parity)
        i0p, i1p = _exp_sin_moments(-self.a, b, parity)

        self.one_z = zc * h * i0z
        self.phi_left_z = zc * h * (i0z - i1z)
        self.phi_right_z = zc * h * i1z
        self.dphi_left_z = -zc * i0z
        self.dphi_right_z = zc * i0z

        self.one_pz = pc * h * i0p
        self.phi_left_pz = pc * h * (i0p - i1p)
        self.phi_right_pz = pc * h * i1p
        self.dphi_left_pz = -pc * i0p
        self.dphi_right_pz = pc * i0p

        # second moment t*exp(s t)*sin, kept for affine sources
        self._i0z, self._i1z = i0z, i1z
        self._i0p, self._i1p = i0p, i1p
        self._zc, self._pc = zc, pc

    @property
    def modes(self):
        return [
            EigenMode(int(j), s, e, b)
            for j, s, e, b in zip(self.j, self.sigma, self.eta, self.beta)
        ]

    @property
    def peclet(self):
        """Element Peclet number c_eff*h/(2*mu_eff) (signed)."""
        return self.a

    def _local(self, x):
        t = (np.asarray(x, dtype=float) - self.x_left) / self.h
        return t

    def psi(self, x):
        return self.gauge * np.exp(self.a * self._local(x))

    def weight(self, x):
        """p(x) = psi(x)^(-2)."""
        return self.psi(x) ** -2

    def z_eval(self, x, j):
        t = self._local(x)
        return self._zc * np.exp(self.a * t) * np.sin(j * np.pi * t)

    def pz_eval(self, x, j):
        t = self._local(x)
        return self._pc * np.exp(-self.a * t) * np.sin(j * np.pi * t)

    def z_deriv(self, x, j):
        t = self._local(x)
        b = j * np.pi
        return (
            self._zc
            * np.exp(self.a * t)
            * (self.a * np.sin(b * t) + b * np.cos(b * t))
            / self.h
        )

    def z_deriv2(self, x, j):
        t = self._local(x)
        b = j * np.pi
        return (
            self._zc
            * np.exp(self.a * t)
            * ((self.a**2 - b**2) * np.sin(b * t) + 2.0 * self.a * b * np.cos(b * t))
            / self.h**2
        )

    def apply_operator(self, x, j):
        """Strong operator applied to z_j; equals eta_j * z_j."""
        s = self.scaling
        return (
            s.gamma_eff * self.z_eval(x, j)
            + s.c_eff * self.z_deriv(x, j)
            - s.mu_eff * self.z_deriv2(x, j)
        )

    def source_moments_pz(self, f_left, f_right):
        """(f, p*z_j)_K for f affine on K with endpoint values (f_left, f_right)."""
        return self._pc * self.h * (
            f_left * self._i0p + (f_right - f_left) * self._i1p
        )

    def source_moments_z(self, f_left, f_right):
        """(f, z_j)_K for f affine on K."""
        return self._zc * self.h * (
            f_left * self._i0z + (f_right - f_left) * self._i1z
        )


def build_bases(mesh, scaling, n_modes, gauge=1.0):
    """One spectral basis per element of a uniform mesh."""
    return [
        ElementSpectralBasis(
            mesh.nodes[e], mesh.h, scaling, n_modes, gauge=gauge, element=e
        )
        for e in range(mesh.n_elements)
    ]


def weighted_inner_products(basis, side, j):
    """The four scalars ((phi,p z), (phi',p z), (phi,z), (phi',z)) for one mode.

    side is 'left' or 'right' (hat function restricted to the element).
    """
    if not 1 <= j <= basis.n_modes:
        raise ValueError(f"mode index {j} outside 1..{basis.n_modes}")
    i = j - 1
    if side == "left":
        return (
            basis.phi_left_pz[i],
            basis.dphi_left_pz[i],
            basis.phi_left_z[i],
            basis.dphi_left_z[i],
        )
    if side == "right":
        return (
            basis.phi_right_pz[i],
            basis.dphi_right_pz[i],
            basis.phi_right_z[i],
            basis.dphi_right_z[i],
        )
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def source_inner_products(basis, j, f_endpoints):
    """(f, p*z_j)_K for an affine source given by its element endpoint values."""
    if not 1 <= j <= basis.n_modes:
        raise ValueError(f"mode index {j} outside 1..{basis.n_modes}")
    f_left, f_right = f_endpoints
    return basis.source_moments_pz(f_left, f_right)[j - 1]
