"""Special functions for the Mie series and angular pattern synthesis.

Everything in this module follows the exp(-i*omega*t) time convention
(see :data:`TIME_CONVENTION`): outgoing spherical waves carry the Hankel
function of the first kind, h_n = j_n + i*y_n, and the Riccati-Bessel
Wronskian is psi_n*xi_n' - psi_n'*xi_n = i.

The angular functions pi_n and tau_n are the Bohren & Huffman ones,

    pi_n(cos th)  = P_n^1(cos th) / sin th,
    tau_n(cos th) = d P_n^1(cos th) / d th,

with P_n^1 the associated Legendre polynomial of degree 1 *without* the
Condon-Shortley phase (so P_1^1(cos th) = sin th and pi_1 = 1).  They are
evaluated by upward recurrence directly in cos th, never dividing by
sin th, so the th = 0 and th = pi endpoints are exact.

References
----------
[1] Bohren, C. F. and Huffman, D. R., "Absorption and Scattering of Light
    by Small Particles" (Wiley, 1983), ch. 4 and appendix A.
[2] Wiscombe, W. J., "Improved Mie scattering algorithms",
    Appl. Opt. 19, 1505 (1980).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

#: Global time convention for every module in this package.  Fields evolve
#: as exp(-i*omega*t), absorbing media have Im(eps) >= 0, and the induced
#: polarization current is J = -i*omega*eps0*(eps_r - 1)*E.
TIME_CONVENTION = "exp(-i*omega*t)"

#: Extra downward-recurrence orders for the Miller algorithm (stability
#: margin on top of n_max + ceil|x|).
_MILLER_MARGIN = 15


@dataclass(frozen=True)
class AngularFunctions:
    """Angular functions of one order at one polar angle.

    Attributes
    ----------
    order : int
        Multipole order n >= 1.
    theta : float
        Polar angle in radians, 0 <= theta <= pi.
    pi : float
        pi_n(cos theta) = P_n^1(cos theta)/sin(theta).
    tau : float
        tau_n(cos theta) = dP_n^1(cos theta)/d theta.
    """

    order: int
    theta: float
    pi: float
    tau: float


def angular_function_arrays(n_max: int, theta) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate pi_n, tau_n for n = 1..n_max on an array of angles.

    Parameters
    ----------
    n_max : int
        Largest order, >= 1.
    theta : array_like
        Polar angles in radians, each in [0, pi].

    Returns
    -------
    pi, tau : ndarray, shape (n_max, len(theta))
        Row n-1 holds pi_n and tau_n.  Finite everywhere, including the
        sin(theta) = 0 endpoints.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(theta < -1e-12) or np.any(theta > np.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")

    mu = np.cos(theta)
    pi_nm = np.zeros((n_max, theta.size))
    tau_nm = np.zeros_like(pi_nm)

    pi_prev = np.zeros_like(mu)   # pi_0
    pi_cur = np.ones_like(mu)     # pi_1
    pi_nm[0] = pi_cur
    tau_nm[0] = mu * pi_cur - 2.0 * pi_prev
    for n in range(2, n_max + 1):
        pi_next = ((2 * n - 1) / (n - 1)) * mu * pi_cur - (n / (n - 1)) * pi_prev
        pi_prev, pi_cur = pi_cur, pi_next
        pi_nm[n - 1] = pi_cur
        tau_nm[n - 1] = n * mu * pi_cur - (n + 1) * pi_prev
    return pi_nm, tau_nm


def angular_functions(n_max: int, theta: float) -> list[AngularFunctions]:
    """pi_n and tau_n for all orders n = 1..n_max at a single angle.

    Raises
    ------
    ValueError
        If ``theta`` is outside [0, pi] or ``n_max`` < 1.
    """
    pi_nm, tau_nm = angular_function_arrays(n_max, theta)
    return [
        AngularFunctions(order=n, theta=float(theta),
                         pi=float(pi_nm[n - 1, 0]), tau=float(tau_nm[n - 1, 0]))
        for n in range(1, n_max + 1)
    ]


def spherical_jn_downward(n_max: int, x: complex) -> np.ndarray:
    """Spherical Bessel j_n(x), n = 0..n_max, by Miller's downward recurrence.

    Stable for all n including n >> |x|, where upward recurrence loses all
    significant digits.  The trial sequence starts at order
    n_max + ceil(|x|) + 15 and is normalized against j_0 (or j_1 when x is
    near a zero of sin).

    Parameters
    ----------
    n_max : int
        Largest order required.
    x : complex
        Argument, must be nonzero.

    Returns
    -------
    ndarray, shape (n_max + 1,), complex
    """
    x = complex(x)
    if x == 0:
        raise ValueError("argument must be nonzero")
    n_start = n_max + int(np.ceil(abs(x))) + _MILLER_MARGIN

    f_hi = 0.0 + 0.0j
    f_lo = 1e-30 + 0.0j
    f = np.empty(n_max + 1, dtype=complex)
    for n in range(n_start, 0, -1):
        f_next = (2 * n + 1) / x * f_lo - f_hi
        f_hi, f_lo = f_lo, f_next
        if n - 1 <= n_max:
            f[n - 1] = f_next
        # rescale to dodge overflow of the unnormalized sequence
        if abs(f_lo) > 1e250:
            f_hi /= 1e250
            f_lo /= 1e250
            top = min(n - 1, n_max)
            f[top:] /= 1e250

    j0 = np.sin(x) / x
    j1 = np.sin(x) / x**2 - np.cos(x) / x
    if abs(j0) >= abs(j1):
        scale = j0 / f[0]
    elif n_max >= 1:
        scale = j1 / f[1]
    else:
        scale = j1 / f_hi  # after the loop f_hi holds the order-1 trial value
    return f * scale


def spherical_yn_upward(n_max: int, x: complex) -> np.ndarray:
    """Spherical Bessel y_n(x), n = 0..n_max, by upward recurrence (stable)."""
    x = complex(x)
    if x == 0:
        raise ValueError("argument must be nonzero")
    y = np.empty(n_max + 1, dtype=complex)
    y[0] = -np.cos(x) / x
    if n_max >= 1:
        y[1] = -np.cos(x) / x**2 - np.sin(x) / x
    for n in range(1, n_max):
        y[n + 1] = (2 * n + 1) / x * y[n] - y[n - 1]
    return y


@dataclass(frozen=True)
class RiccatiBessel:
    """Riccati-Bessel functions psi_n = x*j_n and xi_n = x*(j_n + i*y_n).

    Arrays are indexed by order: element ``k`` is order ``k + 1``.
    ``converged`` is False when the requested n_max exceeds |x| + 20 and
    the high orders are far into the superexponentially small tail.
    """

    n_max: int
    x: complex
    psi: np.ndarray
    xi: np.ndarray
    psi_prime: np.ndarray
    xi_prime: np.ndarray
    converged: bool


def riccati_bessel(n_max: int, x: complex) -> RiccatiBessel:
    """Riccati-Bessel psi_n, xi_n and derivatives for n = 1..n_max.

    Uses downward (Miller) recurrence for j_n and upward recurrence for
    y_n; both are stable for the arguments a Mie series needs.  The
    derivatives follow from d/dx[x f_n(x)] = x f_{n-1}(x) - n f_n(x).

    Parameters
    ----------
    n_max : int
        Largest order, >= 1.
    x : complex
        Argument; a domain error is raised at x = 0.

    Returns
    -------
    RiccatiBessel

    Warns
    -----
    UserWarning
        When n_max > |x| + 20: the series the caller is building has long
        since converged and the extreme orders are denormally small.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    x = complex(x)
    if x == 0:
        raise ValueError("Riccati-Bessel functions are singular at x = 0")

    converged = not (n_max > abs(x) + 20)
    if not converged:
        warnings.warn(
            f"n_max = {n_max} exceeds |x| + 20 = {abs(x) + 20:.1f}; orders "
            "beyond the convergence point contribute only noise",
            stacklevel=2,
        )

    j = spherical_jn_downward(n_max, x)
    y = spherical_yn_upward(n_max, x)
    h = j + 1j * y

    n = np.arange(1, n_max + 1)
    psi = x * j[1:]
    xi = x * h[1:]
    psi_prime = x * j[:-1] - n * j[1:]
    xi_prime = x * h[:-1] - n * h[1:]
    return RiccatiBessel(n_max=n_max, x=x, psi=psi, xi=xi,
                         psi_prime=psi_prime, xi_prime=xi_prime,
                         converged=converged)
