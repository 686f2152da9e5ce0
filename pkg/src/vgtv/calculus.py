"""Exact discrete calculus on pixel grids.

Forward differences with a zero-flux (Neumann) boundary convention.  The
divergence is constructed as the exact negative adjoint of the gradient
under the h^2-weighted inner product, so the discrete Gauss-Green identity

    <grad v, xi> + <v, div xi> = 0

holds to rounding for every field.  The staggered storage puts the x-flux
of pixel (i, j) on the edge towards (i, j+1); fluxes across the domain
boundary are the entries in the last column (x) and last row (y), which
are kept identically zero on admissible fields.  That structural zero is
the discrete zero normal trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScalarImage",
    "VectorField",
    "default_spacing",
    "gradient",
    "divergence",
    "truncate",
    "pairing",
    "pairing_weighted",
    "boundary_flux_max",
    "inner",
    "norm2",
]


def default_spacing(shape):
    """Default grid spacing 1/max(H, W): the image sits in a unit-ish box."""
    return 1.0 / float(max(shape))


def _as_grid(data, name="data"):
    arr = np.array(data, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1 or max(arr.shape) < 2:
        raise ValueError(f"{name} needs at least two pixels, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarImage:
    """Real-valued function on an H x W pixel grid with spacing h."""

    data: np.ndarray
    h: float

    def __post_init__(self):
        object.__setattr__(self, "data", _as_grid(self.data))
        if not (float(self.h) > 0):
            raise ValueError(f"spacing h must be positive, got {self.h}")
        object.__setattr__(self, "h", float(self.h))

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class VectorField:
    """Two-channel field on the staggered edge grid.

    ``x[i, j]`` is the flux from pixel (i, j) towards (i, j+1), ``y[i, j]``
    the flux towards (i+1, j).  Entries in the last column of ``x`` and the
    last row of ``y`` cross the domain boundary; a field with
    ``zero_normal_trace=True`` certifies they all vanish (validated).
    """

    x: np.ndarray
    y: np.ndarray
    h: float
    zero_normal_trace: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x", _as_grid(self.x, "x"))
        object.__setattr__(self, "y", _as_grid(self.y, "y"))
        if self.x.shape != self.y.shape:
            raise ValueError(
                f"component shapes differ: {self.x.shape} vs {self.y.shape}"
            )
        if not (float(self.h) > 0):
            raise ValueError(f"spacing h must be positive, got {self.h}")
        object.__setattr__(self, "h", float(self.h))
        if self.zero_normal_trace and boundary_flux_max(self) != 0.0:
            raise ValueError("zero_normal_trace set but boundary flux entries are nonzero")

    @property
    def shape(self):
        return self.x.shape

    def magnitude(self):
        return np.hypot(self.x, self.y)


def boundary_flux_max(xi: VectorField) -> float:
    """Largest stored flux across the domain boundary (0 on admissible fields)."""
    mx = float(np.max(np.abs(xi.x[:, -1]))) if xi.x.shape[1] >= 1 else 0.0
    my = float(np.max(np.abs(xi.y[-1, :]))) if xi.y.shape[0] >= 1 else 0.0
    return max(mx, my)


def grad_arrays(u: np.ndarray, h: float):
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = (u[:, 1:] - u[:, :-1]) / h
    gy[:-1, :] = (u[1:, :] - u[:-1, :]) / h
    return gx, gy


def div_arrays(x: np.ndarray, y: np.ndarray, h: float) -> np.ndarray:
    # Negative adjoint of grad_arrays; the boundary entries x[:, -1], y[-1, :]
    # never enter, which is what makes the zero-trace convention structural.
    d = np.zeros_like(x)
    d[:, :-1] += x[:, :-1]
    d[:, 1:] -= x[:, :-1]
    d[:-1, :] += y[:-1, :]
    d[1:, :] -= y[:-1, :]
    d /= h
    return d


def gradient(v: ScalarImage) -> VectorField:
    """Forward-difference gradient; zero in the last column/row (Neumann)."""
    gx, gy = grad_arrays(v.data, v.h)
    return VectorField(gx, gy, v.h, zero_normal_trace=True)


def divergence(xi: VectorField) -> ScalarImage:
    """Exact negative adjoint of :func:`gradient`; sums to zero over the grid."""
    return ScalarImage(div_arrays(xi.x, xi.y, xi.h), xi.h)


def truncate(v: ScalarImage, m: float) -> ScalarImage:
    """Clamp all entries to [-m, m]."""
    if not m > 0:
        raise ValueError(f"truncation level must be positive, got {m}")
    return ScalarImage(np.clip(v.data, -m, m), v.h)


def inner(a: np.ndarray, b: np.ndarray, h: float) -> float:
    """h^2-weighted grid inner product."""
    return float(h * h * np.sum(a * b))


def norm2(a: np.ndarray, h: float) -> float:
    return float(h * np.sqrt(np.sum(a * a)))


def pairing(xi: VectorField, v: ScalarImage) -> float:
    """<xi, grad v> under the weighted inner product; equals -<v, div xi>."""
    gx, gy = grad_arrays(v.data, v.h)
    return float(v.h * v.h * np.sum(xi.x * gx + xi.y * gy))


def pairing_weighted(xi: VectorField, v: ScalarImage, psi: ScalarImage) -> float:
    """Weighted pairing tested against psi, via the integrated-by-parts form.

    Computed as  -<psi v, div xi> - <v, xi . grad psi>,  which by the exact
    discrete product rule equals the weighted flux sum
    ``h^2 sum(psi_shift_x * xi_x * dx v + psi_shift_y * xi_y * dy v)`` where
    the weight is forward-shifted per component.  psi should vanish near the
    boundary.
    """
    h = v.h
    d = div_arrays(xi.x, xi.y, h)
    px, py = grad_arrays(psi.data, h)
    term1 = -h * h * np.sum(psi.data * v.data * d)
    term2 = -h * h * np.sum(v.data * (xi.x * px + xi.y * py))
    return float(term1 + term2)
