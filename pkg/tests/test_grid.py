import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfluid.errors import ParamError
from qfluid.grid import TorusGrid


def random_bandlimited(grid, rng, kmax=4, ncomp=None):
    shape = grid.shape if ncomp is None else (ncomp,) + grid.shape
    f = rng.standard_normal(shape)
    return grid.project(f, kmax)


@pytest.mark.parametrize("dim,n", [(1, 7), (1, 6), (4, 8), (2, 9)])
def test_bad_grid(dim, n):
    with pytest.raises(ParamError):
        TorusGrid(dim, n)


@pytest.mark.parametrize("dim,n", [(1, 8), (2, 16), (3, 8)])
def test_grid_basics(dim, n):
    g = TorusGrid(dim, n)
    assert g.x.shape == (dim,) + (n,) * dim
    assert g.size == n**dim
    one = np.ones(g.shape)
    assert abs(g.integrate(one) - (2 * np.pi) ** dim) <= 1e-12 * (2 * np.pi) ** dim
    k = g.wavenumbers
    assert k.min() == -n // 2 + 1 and k.max() == n // 2
    assert sorted(k) == list(range(-n // 2 + 1, n // 2 + 1))


@pytest.mark.parametrize("dim,n", [(1, 32), (2, 16), (3, 8)])
def test_roundtrip_transform(dim, n):
    g = TorusGrid(dim, n)
    f = np.random.default_rng(0).standard_normal(g.shape)
    back = g.ifft(g.fft(f))
    assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))
    z = f + 1j * np.random.default_rng(1).standard_normal(g.shape)
    assert np.max(np.abs(g.ifft(g.fft(z), complex_=True) - z)) <= 1e-12 * np.max(np.abs(z))


def test_gradient_examples():
    g = TorusGrid(1, 64)
    x = g.x[0]
    assert np.max(np.abs(g.gradient(np.sin(x))[0] - np.cos(x))) <= 1e-12
    assert np.max(np.abs(g.gradient(np.full(g.shape, 3.7)))) == 0.0

    g2 = TorusGrid(2, 32)
    x, y = g2.x
    grad = g2.gradient(np.cos(2 * x) * np.sin(y))
    assert np.max(np.abs(grad[0] + 2 * np.sin(2 * x) * np.sin(y))) <= 1e-10
    assert np.max(np.abs(grad[1] - np.cos(2 * x) * np.cos(y))) <= 1e-10


def test_divergence_and_laplacian_examples():
    g = TorusGrid(1, 32)
    x = g.x[0]
    assert np.max(np.abs(g.divergence(np.cos(x)[None]) + np.sin(x))) <= 1e-12
    assert np.max(np.abs(g.laplacian_power(np.cos(2 * x), 2) - 16 * np.cos(2 * x))) <= 1e-12 * 16 * 2

    g2 = TorusGrid(2, 32)
    x, y = g2.x
    lap = g2.laplacian(np.cos(x) + np.cos(3 * y))
    assert np.max(np.abs(lap + np.cos(x) + 9 * np.cos(3 * y))) <= 1e-11


def test_divergence_tensor_rows():
    g = TorusGrid(2, 32)
    x, y = g.x
    sigma = np.array([[np.sin(x), np.cos(y)], [np.sin(y), np.cos(2 * x)]])
    out = g.divergence_tensor(sigma)
    assert np.max(np.abs(out[0] - (np.cos(x) - np.sin(y)))) <= 1e-12
    assert np.max(np.abs(out[1] - 0.0)) <= 1e-12


def test_sym_antisym_examples():
    g = TorusGrid(2, 32)
    x, y = g.x
    const = np.stack([np.full(g.shape, 2.0), np.full(g.shape, -1.0)])
    assert np.max(np.abs(g.sym_grad(const))) == 0.0
    assert np.max(np.abs(g.antisym_grad(const))) == 0.0

    phi = np.sin(x) * np.cos(2 * y) + np.cos(x + y)
    assert np.max(np.abs(g.antisym_grad(g.gradient(phi)))) <= 1e-10

    u = np.stack([np.sin(y), np.zeros(g.shape)])
    d = g.sym_grad(u)
    assert np.max(np.abs(d[0, 1] - np.cos(y) / 2)) <= 1e-12
    assert np.max(np.abs(d[1, 0] - np.cos(y) / 2)) <= 1e-12
    assert np.max(np.abs(d[0, 0])) <= 1e-12 and np.max(np.abs(d[1, 1])) <= 1e-12
    assert np.max(np.abs(g.sym_grad(u) + g.antisym_grad(u) - g.jacobian(u))) <= 1e-14


def test_integrate_examples():
    g = TorusGrid(1, 32)
    x = g.x[0]
    assert g.integrate(np.ones(g.shape)) == pytest.approx(2 * np.pi, rel=1e-14)
    assert abs(g.integrate(np.sin(x))) <= 1e-12
    assert g.integrate(1 + 0.5 * np.sin(x)) == pytest.approx(2 * np.pi, rel=1e-14)


def test_dealias_examples():
    g = TorusGrid(1, 64)
    x = g.x[0]
    f = np.cos(3 * x) + np.sin(21 * x)
    assert np.max(np.abs(g.dealias(f) - f)) <= 1e-13
    assert np.max(np.abs(g.dealias(np.sin(31 * x)))) <= 1e-13
    r = np.random.default_rng(3).standard_normal(g.shape)
    once = g.dealias(r)
    assert np.max(np.abs(g.dealias(once) - once)) <= 1e-13


def test_nyquist_dropped_in_first_derivative():
    g = TorusGrid(1, 16)
    x = g.x[0]
    assert np.max(np.abs(g.gradient(np.cos(8 * x)))) <= 1e-13
    # even order keeps it
    assert np.max(np.abs(g.laplacian(np.cos(8 * x)) + 64 * np.cos(8 * x))) <= 1e-11


@pytest.mark.parametrize("dim,n", [(1, 64), (2, 32), (3, 16)])
def test_operator_invariants(dim, n):
    g = TorusGrid(dim, n)
    rng = np.random.default_rng(dim)
    f = rng.standard_normal(g.shape)
    assert g.integrate(f**2) == pytest.approx(g.spectral_power(f), rel=1e-10)
    # first derivatives drop the Nyquist mode, so compare below it
    f = g.project(f, n // 2 - 1)
    assert np.max(np.abs(g.divergence(g.gradient(f)) - g.laplacian(f))) <= 1e-10 * max(1.0, np.max(np.abs(g.laplacian(f))))
    assert np.max(np.abs(g.laplacian_power(f, 1) - g.laplacian(f))) <= 1e-13 * max(1.0, np.max(np.abs(g.laplacian(f))))
    v = rng.standard_normal((dim,) + g.shape)
    assert abs(g.integrate(g.divergence(v))) <= 1e-11


@pytest.mark.parametrize("dim,n", [(1, 64), (2, 32)])
def test_product_rules(dim, n):
    g = TorusGrid(dim, n)
    rng = np.random.default_rng(11)
    rho = 2.0 + random_bandlimited(g, rng, kmax=4)
    u = random_bandlimited(g, rng, kmax=4, ncomp=dim)
    v = random_bandlimited(g, rng, kmax=4, ncomp=dim)
    lhs = g.divergence(rho * u)
    rhs = g.dot(g.gradient(rho), u) + rho * g.divergence(u)
    assert np.max(np.abs(lhs - rhs)) <= 3e-9
    lhs = g.divergence_tensor(rho * g.outer(u, v))
    rhs = (g.dot(g.gradient(rho), v) * u
           + rho * g.matvec(g.jacobian(u), v)
           + rho * g.divergence(v) * u)
    assert np.max(np.abs(lhs - rhs)) <= 3e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), kmax=st.integers(1, 10))
def test_dealias_idempotent_and_bandlimited_fixed(seed, kmax):
    g = TorusGrid(1, 64)
    f = random_bandlimited(g, np.random.default_rng(seed), kmax=kmax)
    assert np.max(np.abs(g.dealias(f) - f)) <= 1e-12
    r = np.random.default_rng(seed).standard_normal(g.shape)
    d = g.dealias(r)
    assert np.max(np.abs(g.dealias(d) - d)) <= 1e-13


def test_inverse_laplacian():
    g = TorusGrid(2, 32)
    x, y = g.x
    f = np.cos(x) * np.sin(2 * y) + 3.0
    s = g.inverse_laplacian(f)
    assert np.max(np.abs(g.laplacian(s) - (f - 3.0))) <= 1e-12
    assert abs(g.mean(s)) <= 1e-14
