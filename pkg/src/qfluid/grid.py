r"""Periodic grids on the torus :math:`[0, 2\pi)^d` and spectral operators.

Fields are plain numpy arrays laid out as

* scalar: ``(n,) * d``
* vector: ``(d,) + (n,) * d``
* tensor: ``(d, d) + (n,) * d``

so the spatial axes are always the trailing ``d`` axes.  Real fields are
transformed with ``rfftn``; complex fields (wave functions) with ``fftn``.
Tensor index convention follows the usual fluid one: ``(grad u)[i, j] =
d u_i / d x_j`` and ``div(sigma)[i] = sum_j d sigma[i, j] / d x_j``.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import ParamError

__all__ = ["TorusGrid"]


class TorusGrid:
    """Uniform periodic grid with ``n`` points per axis on ``[0, 2*pi)^dim``.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1, 2 or 3.
    n : int
        Points per axis; even and at least 8.
    """

    length = 2.0 * np.pi

    def __init__(self, dim: int, n: int):
        if dim not in (1, 2, 3):
            raise ParamError(f"dim must be 1, 2 or 3, got {dim}")
        if n < 8 or n % 2:
            raise ParamError(f"n must be an even integer >= 8, got {n}")
        self.dim = int(dim)
        self.n = int(n)
        self.shape = (self.n,) * self.dim
        self.axes = tuple(range(-self.dim, 0))
        self.dx = self.length / self.n
        self.cell_volume = self.dx**self.dim
        self.volume = self.length**self.dim
        self.dealias_cutoff = self.n / 3.0

    def __repr__(self):
        return f"TorusGrid(dim={self.dim}, n={self.n})"

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and (self.dim, self.n) == (other.dim, other.n)

    def __hash__(self):
        return hash((self.dim, self.n))

    @property
    def size(self) -> int:
        return self.n**self.dim

    @cached_property
    def x(self) -> np.ndarray:
        """Coordinates, shape ``(dim,) + shape``."""
        x1 = np.arange(self.n) * self.dx
        return np.array(np.meshgrid(*([x1] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer frequencies per axis in ``{-n/2+1, ..., n/2}`` (FFT order)."""
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        k[k == -self.n // 2] = self.n // 2
        return np.rint(k).astype(int)

    # -- spectral symbols -------------------------------------------------

    def _axis_k(self, complex_: bool):
        """Per-axis wavenumber vectors broadcast to the transform layout."""
        full = np.fft.fftfreq(self.n, 1.0 / self.n)
        half = np.fft.rfftfreq(self.n, 1.0 / self.n)
        ks = []
        for ax in range(self.dim):
            k1 = full if (complex_ or ax < self.dim - 1) else half
            shape = [1] * self.dim
            shape[ax] = k1.size
            ks.append(k1.reshape(shape))
        return ks

    def _symbols(self, complex_: bool):
        key = "_sym_c" if complex_ else "_sym_r"
        cached = self.__dict__.get(key)
        if cached is not None:
            return cached
        ks = self._axis_k(complex_)
        # odd-order derivative symbols drop the Nyquist mode
        dk = [1j * np.where(np.abs(k) == self.n // 2, 0.0, k) for k in ks]
        k2 = sum(k**2 for k in ks)
        keep = np.ones(np.broadcast_shapes(*(k.shape for k in ks)), dtype=bool)
        for k in ks:
            keep &= np.abs(k) <= self.dealias_cutoff
        sym = {"k": ks, "dk": dk, "k2": k2, "keep": keep}
        self.__dict__[key] = sym
        return sym

    # -- transforms -------------------------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        """Forward transform over the trailing spatial axes."""
        if np.iscomplexobj(f):
            return np.fft.fftn(f, axes=self.axes)
        return np.fft.rfftn(f, axes=self.axes)

    def ifft(self, fh: np.ndarray, complex_: bool = False) -> np.ndarray:
        """Inverse of :meth:`fft`; ``complex_`` selects the full-spectrum layout."""
        if complex_:
            return np.fft.ifftn(fh, axes=self.axes)
        return np.fft.irfftn(fh, s=self.shape, axes=self.axes)

    def _spectral(self, f, op):
        c = np.iscomplexobj(f)
        sym = self._symbols(c)
        return self.ifft(op(self.fft(f), sym), complex_=c)

    # -- differential operators ---------------------------------------------

    def derivative(self, f: np.ndarray, axis: int) -> np.ndarray:
        """Partial derivative along spatial ``axis`` of any field."""
        return self._spectral(f, lambda fh, s: s["dk"][axis] * fh)

    def gradient(self, f: np.ndarray) -> np.ndarray:
        """Gradient of a scalar field, shape ``(dim,) + shape``."""
        c = np.iscomplexobj(f)
        sym = self._symbols(c)
        fh = self.fft(f)
        return np.array([self.ifft(dk * fh, complex_=c) for dk in sym["dk"]])

    def divergence(self, v: np.ndarray) -> np.ndarray:
        """Divergence of a vector field."""
        c = np.iscomplexobj(v)
        sym = self._symbols(c)
        vh = self.fft(v)
        return self.ifft(sum(sym["dk"][j] * vh[j] for j in range(self.dim)), complex_=c)

    def divergence_tensor(self, sigma: np.ndarray) -> np.ndarray:
        """Row-wise divergence: ``out[i] = sum_j d_j sigma[i, j]``."""
        c = np.iscomplexobj(sigma)
        sym = self._symbols(c)
        sh = self.fft(sigma)
        out = sum(sym["dk"][j] * sh[:, j] for j in range(self.dim))
        return self.ifft(out, complex_=c)

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        """Velocity gradient ``J[i, j] = d u_i / d x_j``."""
        c = np.iscomplexobj(u)
        sym = self._symbols(c)
        uh = self.fft(u)
        out = np.stack([sym["dk"][j] * uh for j in range(self.dim)], axis=1)
        return self.ifft(out, complex_=c)

    def hessian(self, f: np.ndarray) -> np.ndarray:
        """Second derivatives of a scalar, symmetric by construction."""
        c = np.iscomplexobj(f)
        sym = self._symbols(c)
        fh = self.fft(f)
        d = self.dim
        ks = sym["k"]
        out = np.empty((d, d) + fh.shape, dtype=fh.dtype)
        for i in range(d):
            for j in range(i, d):
                # second derivatives keep the Nyquist mode along a single axis
                if i == j:
                    out[i, i] = -(ks[i] ** 2) * fh
                else:
                    out[i, j] = out[j, i] = sym["dk"][i] * sym["dk"][j] * fh
        return self.ifft(out, complex_=c)

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        """Laplacian of a scalar or, componentwise, of a vector field."""
        return self._spectral(f, lambda fh, s: -s["k2"] * fh)

    def laplacian_power(self, f: np.ndarray, p: int) -> np.ndarray:
        """Apply ``Delta**p`` (symbol ``(-|k|^2)**p``), ``p >= 1``."""
        if p < 1:
            raise ParamError(f"laplacian_power needs p >= 1, got {p}")
        return self._spectral(f, lambda fh, s: (-s["k2"]) ** p * fh)

    def inverse_laplacian(self, f: np.ndarray) -> np.ndarray:
        """Zero-mean solution of ``Delta g = f - mean(f)``."""

        def op(fh, s):
            k2 = s["k2"]
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(k2 > 0, -fh / np.where(k2 > 0, k2, 1.0), 0.0)
            return out

        return self._spectral(f, op)

    def sym_grad(self, u: np.ndarray) -> np.ndarray:
        """Symmetric part of the velocity gradient."""
        j = self.jacobian(u)
        return 0.5 * (j + np.swapaxes(j, 0, 1))

    def antisym_grad(self, u: np.ndarray) -> np.ndarray:
        """Antisymmetric part of the velocity gradient."""
        j = self.jacobian(u)
        return 0.5 * (j - np.swapaxes(j, 0, 1))

    # -- quadrature and filtering ---------------------------------------------

    def integrate(self, f: np.ndarray) -> float | np.ndarray:
        """Periodic trapezoidal quadrature over the trailing spatial axes."""
        return self.cell_volume * np.sum(f, axis=self.axes)

    def mean(self, f: np.ndarray):
        return np.mean(f, axis=self.axes)

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """Zero every Fourier coefficient with some ``|k_i| > n/3``."""
        return self._spectral(f, lambda fh, s: np.where(s["keep"], fh, 0.0))

    def project(self, f: np.ndarray, kmax: float) -> np.ndarray:
        """Keep only modes with every ``|k_i| <= kmax``."""

        def op(fh, s):
            keep = np.ones(fh.shape[-self.dim:], dtype=bool)
            for k in s["k"]:
                keep = keep & (np.abs(k) <= kmax)
            return np.where(keep, fh, 0.0)

        return self._spectral(f, op)

    def spectral_power(self, f: np.ndarray) -> float:
        """``(2 pi)^d * sum |c_k|^2`` with ``c_k`` the normalised coefficients."""
        c = np.fft.fftn(f, axes=self.axes) / self.size
        return float(self.volume * np.sum(np.abs(c) ** 2))

    # -- pointwise helpers ---------------------------------------------------

    @staticmethod
    def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise dot product of two vector fields."""
        return np.einsum("i...,i...->...", a, b)

    def norm2(self, a: np.ndarray) -> np.ndarray:
        """Pointwise squared Euclidean (vectors) or Frobenius (tensors) norm."""
        return np.sum(np.abs(a) ** 2, axis=tuple(range(a.ndim - self.dim)))

    @staticmethod
    def matvec(tensor: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Pointwise ``(T v)_i = sum_j T[i, j] v_j``."""
        return np.einsum("ij...,j...->i...", tensor, v)

    @staticmethod
    def outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Pointwise ``(a ⊗ b)[i, j] = a_i b_j``."""
        return np.einsum("i...,j...->ij...", a, b)

    def zeros_scalar(self) -> np.ndarray:
        return np.zeros(self.shape)

    def zeros_vector(self) -> np.ndarray:
        return np.zeros((self.dim,) + self.shape)
