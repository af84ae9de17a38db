import numpy as np
import pytest

from driftflow.spectral import Grid, SpectralField, dealias, hermitize


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid2d():
    return Grid(2, 32, 2.0 * np.pi)


@pytest.fixture
def grid3d():
    return Grid(3, 16, 2.0 * np.pi)


def random_field(grid, rng, ncomp=1, band=None):
    """Dealiased Hermitian random field; band optionally restricts |xi|."""
    shape = grid.shape if ncomp == 1 else (ncomp,) + grid.shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    f = hermitize(dealias(SpectralField(grid, c)))
    if band is not None:
        mask = (grid.kmag >= band[0]) & (grid.kmag <= band[1])
        f = SpectralField(grid, f.coeffs * mask)
    idx = (0,) * grid.dim
    if ncomp == 1:
        f.coeffs[idx] = np.real(f.coeffs[idx])
    return f


def small_field(grid, rng, amplitude=0.05, ncomp=1, band=None):
    """Random field normalized to the given physical sup size."""
    from driftflow.spectral import to_physical

    f = random_field(grid, rng, ncomp, band)
    v = to_physical(f)
    sup = float(np.max(np.abs(v))) if ncomp == 1 else float(
        np.max(np.sqrt(np.sum(v**2, axis=0))))
    return f * (amplitude / max(sup, 1e-300))
