"""Analytic Mie series for a homogeneous sphere.

This is the ground-truth oracle of the package: the volume field solver
and the Cartesian multipole decomposition are validated against it.  Only
homogeneous spheres in a vacuum host are covered; the size parameter
x = 2*pi*radius/lambda and the relative index m absorb any host scaling.

Conventions follow Bohren & Huffman ch. 4 with the exp(-i*omega*t) time
dependence: the incident plane wave propagates along +z with the electric
field along x, outgoing waves are h_n = j_n + i*y_n, and absorbing
spheres have Im(m) >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .specfun import angular_function_arrays, riccati_bessel

#: Relative size of the last series term above which mie_coefficients
#: refuses to return a truncated expansion.
TAIL_TOLERANCE = 1e-8


class ConvergenceError(RuntimeError):
    """Raised when a Mie series is truncated before its terms have decayed."""


@dataclass(frozen=True)
class MieCoefficients:
    """Electric (a_n) and magnetic (b_n) Mie scattering moments.

    ``a`` and ``b`` are indexed by order: element k is order k + 1.
    ``x`` and ``m`` are None for synthetic moment sets that did not come
    from a sphere (e.g. hand-picked Kerker superpositions).
    """

    a: np.ndarray
    b: np.ndarray
    x: float | None = None
    m: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=complex)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=complex)))
        if self.a.shape != self.b.shape:
            raise ValueError("a and b must have the same length")

    @property
    def n_max(self) -> int:
        return self.a.size

    @classmethod
    def from_amplitudes(cls, a, b) -> "MieCoefficients":
        """Build a synthetic moment set from plain per-order amplitudes."""
        return cls(a=np.asarray(a, dtype=complex), b=np.asarray(b, dtype=complex))


def wiscombe_n_max(x: float) -> int:
    """Series truncation order, n_max = ceil(x + 4.05 x^(1/3) + 2)."""
    return int(np.ceil(x + 4.05 * x ** (1.0 / 3.0) + 2.0))


def mie_coefficients(x: float, m: complex, n_max: int | None = None) -> MieCoefficients:
    """Mie coefficients a_n, b_n of a homogeneous sphere.

    Parameters
    ----------
    x : float
        Size parameter 2*pi*radius/lambda, > 0.
    m : complex
        Relative refractive index; Im(m) >= 0 under exp(-i*omega*t).
    n_max : int, optional
        Truncation order.  Default is the Wiscombe criterion
        ceil(x + 4.05 x^(1/3) + 2).

    Returns
    -------
    MieCoefficients

    Raises
    ------
    ValueError
        If x <= 0 or Im(m) < 0.
    ConvergenceError
        If the last term still carries more than ``TAIL_TOLERANCE`` of the
        scattering sum.
    """
    if x <= 0:
        raise ValueError(f"size parameter must be positive, got {x}")
    m = complex(m)
    if m.imag < 0:
        raise ValueError("Im(m) < 0 is gain under the exp(-i*omega*t) convention")
    if n_max is None:
        n_max = wiscombe_n_max(x)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")

    rb_x = riccati_bessel(n_max, x)
    rb_mx = riccati_bessel(n_max, m * x)

    a = ((m * rb_mx.psi * rb_x.psi_prime - rb_x.psi * rb_mx.psi_prime)
         / (m * rb_mx.psi * rb_x.xi_prime - rb_x.xi * rb_mx.psi_prime))
    b = ((rb_mx.psi * rb_x.psi_prime - m * rb_x.psi * rb_mx.psi_prime)
         / (rb_mx.psi * rb_x.xi_prime - m * rb_x.xi * rb_mx.psi_prime))

    n = np.arange(1, n_max + 1)
    terms = (2 * n + 1) * (np.abs(a) ** 2 + np.abs(b) ** 2)
    total = terms.sum()
    if total > 0 and terms[-1] > TAIL_TOLERANCE * total:
        raise ConvergenceError(
            f"series tail {terms[-1] / total:.2e} of the scattering sum at "
            f"n_max = {n_max}; increase n_max"
        )
    return MieCoefficients(a=a, b=b, x=float(x), m=m)


class Efficiencies(NamedTuple):
    q_sca: float
    q_ext: float
    q_abs: float


def mie_efficiencies(c: MieCoefficients) -> Efficiencies:
    """Scattering, extinction and absorption efficiencies.

    Q_sca = (2/x^2) sum (2n+1)(|a_n|^2 + |b_n|^2),
    Q_ext = (2/x^2) sum (2n+1) Re(a_n + b_n),  Q_abs = Q_ext - Q_sca.
    """
    if c.x is None:
        raise ValueError("efficiencies need a sphere-derived coefficient set")
    n = np.arange(1, c.n_max + 1)
    pref = 2.0 / c.x**2
    q_sca = pref * np.sum((2 * n + 1) * (np.abs(c.a) ** 2 + np.abs(c.b) ** 2))
    q_ext = pref * np.sum((2 * n + 1) * (c.a + c.b).real)
    return Efficiencies(float(q_sca), float(q_ext), float(q_ext - q_sca))


def interior_coefficients(x: float, m: complex, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Interior expansion coefficients c_n, d_n of a homogeneous sphere."""
    m = complex(m)
    rb_x = riccati_bessel(n_max, x)
    rb_mx = riccati_bessel(n_max, m * x)
    # numerators are m times the Riccati-Bessel Wronskian, which is i under
    # the exp(-i*omega*t) convention
    c_n = (m * 1j) / (rb_mx.psi * rb_x.xi_prime - m * rb_x.xi * rb_mx.psi_prime)
    d_n = (m * 1j) / (m * rb_mx.psi * rb_x.xi_prime - rb_x.xi * rb_mx.psi_prime)
    return c_n, d_n


def internal_field(c: MieCoefficients, points, radius: float, e0: float = 1.0) -> np.ndarray:
    """Electric field inside the sphere for the canonical plane wave.

    The incident wave propagates along +z with E along x and amplitude
    ``e0``; the interior field is the (c_n, d_n) vector-spherical-harmonic
    expansion evaluated at ``points``.

    Parameters
    ----------
    c : MieCoefficients
        Must carry the sphere's x and m.
    points : array_like, shape (N, 3)
        Positions in the same length unit as ``radius``, all with
        |r| <= radius.
    radius : float
        Sphere radius, > 0.
    e0 : float
        Incident amplitude.

    Returns
    -------
    ndarray, shape (N, 3), complex
        Cartesian E at each point.
    """
    if c.x is None or c.m is None:
        raise ValueError("internal_field needs a sphere-derived coefficient set")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1)
    if np.any(r > radius * (1 + 1e-12)):
        raise ValueError("all points must lie inside the sphere")

    k = c.x / radius
    m = complex(c.m)
    n_max = c.n_max
    c_n, d_n = interior_coefficients(c.x, m, n_max)

    # spherical angles; points at the origin are evaluated on the z axis
    # (the field is continuous there)
    r_safe = np.maximum(r, 1e-12 * radius)
    ct = np.clip(points[:, 2] / r_safe, -1.0, 1.0)
    theta = np.arccos(ct)
    phi = np.arctan2(points[:, 1], points[:, 0])
    st = np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)

    rho = m * k * r_safe
    # j_n(rho) and psi_n'(rho)/rho for n = 1..n_max, per point
    n_arr = np.arange(0, n_max + 1)
    jn = _spherical_jn_complex(n_arr, rho)          # (n_max+1, N)
    jn_over_rho = jn[1:] / rho[None, :]
    psi_prime_over_rho = jn[:-1] - n_arr[1:, None] * jn_over_rho

    pi_nm, tau_nm = angular_function_arrays(n_max, theta)

    n = n_arr[1:, None].astype(float)
    e_n = e0 * (1j ** n_arr[1:, None]) * (2 * n + 1) / (n * (n + 1))
    cn = c_n[:, None]
    dn = d_n[:, None]

    e_r = np.sum(e_n * (-1j * dn) * n * (n + 1) * st[None, :] * pi_nm * jn_over_rho, axis=0) * cp
    e_th = np.sum(e_n * (cn * pi_nm * jn[1:] - 1j * dn * tau_nm * psi_prime_over_rho), axis=0) * cp
    e_ph = np.sum(e_n * (-cn * tau_nm * jn[1:] + 1j * dn * pi_nm * psi_prime_over_rho), axis=0) * sp

    r_hat = np.stack([st * cp, st * sp, ct], axis=1)
    th_hat = np.stack([ct * cp, ct * sp, -st], axis=1)
    ph_hat = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
    return (e_r[:, None] * r_hat + e_th[:, None] * th_hat + e_ph[:, None] * ph_hat)


def _spherical_jn_complex(n_arr: np.ndarray, z: np.ndarray) -> np.ndarray:
    """j_n(z) for orders ``n_arr`` = 0..n_max over complex points ``z``.

    Downward recurrence vectorized over points, normalized against j_0.
    """
    n_max = int(n_arr[-1])
    z = np.asarray(z, dtype=complex)
    n_start = n_max + int(np.ceil(np.max(np.abs(z)))) + 15
    f_hi = np.zeros_like(z)
    f_lo = np.full_like(z, 1e-30)
    out = np.empty((n_max + 1, z.size), dtype=complex)
    for n in range(n_start, 0, -1):
        f_next = (2 * n + 1) / z * f_lo - f_hi
        f_hi, f_lo = f_lo, f_next
        if n - 1 <= n_max:
            out[n - 1] = f_next
        big = np.abs(f_lo) > 1e250
        if np.any(big):
            f_hi[big] /= 1e250
            f_lo[big] /= 1e250
            out[min(n - 1, n_max):, big] /= 1e250
    # normalize per point against whichever of j_0, j_1 is larger (j_0
    # alone fails near zeros of sin)
    j0 = np.sin(z) / z
    if n_max >= 1:
        j1 = np.sin(z) / z**2 - np.cos(z) / z
        scale = np.where(np.abs(j0) >= np.abs(j1), j0 / out[0], j1 / out[1])
    else:
        scale = j0 / out[0]
    return out * scale[None, :]
