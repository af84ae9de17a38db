"""Grid, field, and operator tests for the spectral core."""

import numpy as np
import pytest

from driftflow.errors import FormatVersionMismatch, NegativePowerOfZeroMode
from driftflow.spectral import (
    Grid,
    SpectralField,
    apply_derivative,
    dealias,
    div,
    from_physical,
    grad,
    hermitian_defect,
    l2_norm,
    laplacian,
    leray_project,
    load_field,
    multiply,
    save_field,
    to_physical,
)

from conftest import random_field
from oracles import true_product_coeffs


class TestGrid:
    def test_field_roundtrip(self, grid2d, rng):
        v = rng.standard_normal(grid2d.shape)
        f = from_physical(grid2d, v)
        back = to_physical(f)
        assert np.max(np.abs(back - v)) < 1e-12 * np.max(np.abs(v))

    def test_rejects_odd_or_small(self):
        with pytest.raises(ValueError):
            Grid(2, 33, 1.0)
        with pytest.raises(ValueError):
            Grid(2, 6, 1.0)
        with pytest.raises(ValueError):
            Grid(4, 16, 1.0)

    def test_zero_mode_exists_and_lattice_unique(self, grid2d):
        # every (k1, k2) with |ki| <= N/2 (one sign of N/2) appears exactly once
        kints = grid2d.kint.reshape(2, -1).T
        seen = set(map(tuple, kints))
        assert (0, 0) in seen
        assert len(seen) == grid2d.npts**2

    def test_wavenumber_scale(self):
        g = Grid(2, 16, 4.0 * np.pi)
        assert np.isclose(np.sort(np.unique(np.abs(g.kvec[0])))[1], 0.5)


class TestDerivatives:
    def test_laplacian_eigenfunction(self, grid2d):
        x = grid2d.coords()
        k = np.array([2.0, 1.0])
        f = from_physical(grid2d, np.cos(k[0] * x[0] + k[1] * x[1]))
        lf = to_physical(laplacian(f))
        expected = -np.sum(k**2) * np.cos(k[0] * x[0] + k[1] * x[1])
        assert np.max(np.abs(lf - expected)) < 1e-11

    def test_lambda_zero_is_identity_on_mean_free(self, grid2d, rng):
        f = random_field(grid2d, rng)
        f.coeffs[0, 0] = 0.0
        out = apply_derivative(f, "lambda_s", s=0.0)
        assert np.max(np.abs(out.coeffs - f.coeffs)) < 1e-14

    def test_lambda_two_matches_minus_laplacian(self, grid2d, rng):
        f = random_field(grid2d, rng)
        a = apply_derivative(f, "lambda_s", s=2.0)
        b = laplacian(f)
        scale = np.max(np.abs(b.coeffs)) or 1.0
        assert np.max(np.abs(a.coeffs + b.coeffs)) < 1e-12 * scale

    def test_negative_power_rejects_mean(self, grid2d, rng):
        f = random_field(grid2d, rng)
        f.coeffs[0, 0] = 1.0
        with pytest.raises(NegativePowerOfZeroMode):
            apply_derivative(f, "lambda_s", s=-1.0)

    def test_grad_div_consistency(self, grid2d, rng):
        h = random_field(grid2d, rng)
        gh = grad(h)
        lap = to_physical(div(gh))
        lap2 = to_physical(laplacian(h))
        assert np.max(np.abs(lap - lap2)) < 1e-12 * max(np.max(np.abs(lap2)), 1.0)


class TestLeray:
    def test_pure_gradient_has_no_solenoidal_part(self, grid2d, rng):
        h = random_field(grid2d, rng)
        p, q = leray_project(grad(h))
        assert l2_norm(p) < 1e-12 * max(l2_norm(q), 1.0)

    def test_divergence_free_passes_through(self, grid2d, rng):
        psi = random_field(grid2d, rng)
        w = SpectralField(grid2d, np.stack([
            -grad(psi).coeffs[1], grad(psi).coeffs[0],
        ]))
        p, q = leray_project(w)
        assert l2_norm(q) < 1e-12 * max(l2_norm(p), 1.0)

    def test_parseval_orthogonality(self, grid2d, rng):
        f = random_field(grid2d, rng, ncomp=2)
        p, q = leray_project(f)
        total = l2_norm(p) ** 2 + l2_norm(q) ** 2
        assert abs(total - l2_norm(f) ** 2) < 1e-12 * l2_norm(f) ** 2

    def test_projection_idempotent(self, grid2d, rng):
        f = random_field(grid2d, rng, ncomp=2)
        p, _ = leray_project(f)
        p2, q2 = leray_project(p)
        assert np.max(np.abs(p2.coeffs - p.coeffs)) < 1e-12
        assert l2_norm(q2) < 1e-12

    def test_divergence_of_solenoidal_part(self, grid3d, rng):
        f = random_field(grid3d, rng, ncomp=3)
        p, q = leray_project(f)
        assert l2_norm(div(p)) < 1e-12 * max(l2_norm(f), 1.0)
        assert np.max(np.abs((p + q).coeffs - f.coeffs)) < 1e-14

    def test_zero_mode_goes_to_solenoidal_part(self, grid2d, rng):
        f = random_field(grid2d, rng, ncomp=2)
        f.coeffs[:, 0, 0] = [0.3, -0.1]
        p, q = leray_project(f)
        assert np.allclose(p.coeffs[:, 0, 0], [0.3, -0.1])
        assert np.allclose(q.coeffs[:, 0, 0], 0.0)


class TestDealias:
    def test_already_dealiased_unchanged(self, grid2d, rng):
        f = random_field(grid2d, rng)
        again = dealias(f)
        assert np.array_equal(f.coeffs, again.coeffs)

    def test_noise_support_after_dealias(self, grid2d, rng):
        c = rng.standard_normal(grid2d.shape) + 1j * rng.standard_normal(grid2d.shape)
        f = dealias(SpectralField(grid2d, c))
        kint = grid2d.kint
        outside = (np.abs(kint[0]) > grid2d.npts / 3) | (np.abs(kint[1]) > grid2d.npts / 3)
        assert np.max(np.abs(f.coeffs[outside])) == 0.0

    def test_product_matches_true_convolution(self, rng):
        # quadratic products of resolved modes must be alias-free
        g = Grid(2, 16, 2.0 * np.pi)
        a = random_field(g, rng)
        b = random_field(g, rng)
        prod = multiply(a, b)
        exact = true_product_coeffs(a.coeffs, b.coeffs)
        exact = exact * g.dealias_keep
        assert np.max(np.abs(prod.coeffs - exact)) < 1e-13

    def test_hermitian_preserved_by_operations(self, grid2d, rng):
        f = random_field(grid2d, rng)
        g = random_field(grid2d, rng)
        for out in (laplacian(f), multiply(f, g), dealias(f), grad(f)):
            assert hermitian_defect(out) < 1e-13


class TestSnapshot(object):
    def test_roundtrip_bit_exact(self, grid2d, rng, tmp_path):
        f = random_field(grid2d, rng, ncomp=2)
        path = tmp_path / "field.dfs"
        save_field(path, f)
        back = load_field(path)
        assert np.array_equal(back.coeffs, f.coeffs)
        assert back.grid.length == f.grid.length

    def test_bad_magic_rejected(self, grid2d, rng, tmp_path):
        f = random_field(grid2d, rng)
        path = tmp_path / "field.dfs"
        save_field(path, f)
        raw = bytearray(path.read_bytes())
        raw[0:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatVersionMismatch):
            load_field(path)
