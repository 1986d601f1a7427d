import numpy as np
import pytest

from miekerker.fields import FieldGrid, PlaneWave
from miekerker.mie import internal_field, mie_coefficients

# k0 = 0.01 / nm so that size parameters map to round radii
LAMBDA_NM = 2.0 * np.pi * 100.0


def cubic_sphere_points(radius_nm: float, voxels_per_radius: int):
    """Voxel centers of a cubic-lattice ball, plus the lattice spacing."""
    res = radius_nm / voxels_per_radius
    n1d = int(np.ceil(2.0 * radius_nm / res))
    xs = (np.arange(n1d) - (n1d - 1) / 2.0) * res
    gx, gy, gz = np.meshgrid(xs, xs, xs, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    return pts[np.linalg.norm(pts, axis=1) <= radius_nm], res


def oracle_sphere_grid(x: float, m: complex, voxels_per_radius: int = 10,
                       e0: float = 1.0) -> FieldGrid:
    """FieldGrid holding the analytic interior field of a Mie sphere."""
    radius = x / (2.0 * np.pi / LAMBDA_NM)
    pts, res = cubic_sphere_points(radius, voxels_per_radius)
    coeffs = mie_coefficients(x, m)
    e = internal_field(coeffs, pts, radius, e0=e0)
    return FieldGrid(points=pts, cell_volume=res**3, epsilon_r=m**2,
                     wavelength=LAMBDA_NM, source=PlaneWave(amplitude=e0),
                     E=e, lattice_spacing=res)


@pytest.fixture(scope="session")
def sphere_grid_x08():
    return oracle_sphere_grid(0.8, 2.0, voxels_per_radius=12)
