"""Optimality certificates for the variable-growth denoising problem.

A candidate pair (u, xi) for ``min_u lam * E_phi(u) + 0.5 ||u - f||^2`` is
optimal exactly when the dual field xi has the right divergence, zero
normal trace, and attains pointwise equality in the Young inequality
between phi and its conjugate.  This module measures the defect of each of
those conditions and assembles a machine-readable report.

Conventions.  ``xi`` is stored lambda-scaled: the calibration satisfied at
an optimum is

    div xi = u - f        and, per pixel,
    lam * phi(x, |grad u|) + lam * phi*(x, |xi|/lam) = xi . grad u.

The unit-scale fields are xi/lam (which pairs with grad u) and -xi/lam
(which has divergence (f - u)/lam); the report carries residuals for both
sign conventions: ``div_residual`` for the constraint and the Young map for
the pairing.

The duality gap splits algebraically as

    gap = sum(young_map) + 0.5 ||div xi - (u - f)||^2

which is asserted in the test-suite; both summands are nonnegative, so the
gap is a true suboptimality bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from .calculus import ScalarImage, VectorField, boundary_flux_max, div_arrays, grad_arrays
from .phi import INF, PhiField, conjugate_values, phi_values

__all__ = [
    "CertificateTolerances",
    "CertificateReport",
    "duality_gap",
    "young_equality_map",
    "certify",
]

CLAMP_TOL = 1e-9  # slack on |xi|/lam at a bounded conjugate domain boundary

CONVENTION = (
    "xi is lambda-scaled: divergence constraint checked for -xi/lambda, "
    "Young equality for +xi/lambda"
)


@dataclass(frozen=True)
class CertificateTolerances:
    gap_rel: float = 1e-4
    div_rel: float = 1e-8
    # the normal trace is structural and must vanish exactly


def _energies(u: np.ndarray, xix: np.ndarray, xiy: np.ndarray, f: np.ndarray,
              phi_field: PhiField, lam: float, h: float):
    """(primal, dual, gap, clamped, infeasible) for raw arrays."""
    hh = h * h
    gx, gy = grad_arrays(u, h)
    mag = np.hypot(gx, gy)
    primal = lam * hh * float(np.sum(phi_values(phi_field, mag)))
    primal += 0.5 * hh * float(np.sum((u - f) ** 2))

    d = div_arrays(xix, xiy, h)
    s = np.hypot(xix, xiy) / lam
    conj, clamped, infeasible = conjugate_values(phi_field, s, clamp_tol=CLAMP_TOL)
    if infeasible > 0:
        return primal, -INF, INF, clamped, infeasible
    dual = -0.5 * hh * float(np.sum(d * d)) - hh * float(np.sum(d * f))
    dual -= lam * hh * float(np.sum(conj))
    return primal, dual, primal - dual, clamped, infeasible


def _check_compatible(u: ScalarImage, xi: VectorField, f: ScalarImage,
                      phi_field: PhiField, lam: float):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    shapes = {u.shape, xi.shape, f.shape, phi_field.shape}
    if len(shapes) != 1:
        raise ValueError(f"inconsistent shapes: {shapes}")
    spacings = {u.h, xi.h, f.h, phi_field.h}
    if len(spacings) != 1:
        raise ValueError(f"inconsistent grid spacings: {spacings}")


def duality_gap(u: ScalarImage, xi: VectorField, f: ScalarImage,
                phi_field: PhiField, lam: float):
    """Primal and dual objective values and their gap.

    primal = lam * E_phi(u) + 0.5||u - f||^2;
    dual   = -0.5||div xi||^2 - <div xi, f> - lam * sum phi*(x, |xi|/lam) h^2,
    all in the h^2-weighted inner product.  An xi outside the conjugate
    domain (beyond the boundary clamp tolerance) yields dual = -inf and
    gap = +inf.
    """
    _check_compatible(u, xi, f, phi_field, lam)
    primal, dual, gap, _, _ = _energies(u.data, xi.x, xi.y, f.data, phi_field, lam, u.h)
    return primal, dual, gap


def relative_gap(primal: float, dual: float) -> float:
    """gap / (1 + |primal| + |dual|), the usual scale-free convergence measure."""
    if not np.isfinite(dual):
        return INF
    return (primal - dual) / (1.0 + abs(primal) + abs(dual))


def young_equality_map(u: ScalarImage, xi_bar: VectorField, phi_field: PhiField,
                       lam: float) -> np.ndarray:
    """Per-pixel Young defect, ``>= 0`` up to rounding, zero exactly at calibration.

    Entry (i, j) is  h^2 * (lam phi(x,|grad u|) + lam phi*(x,|xi_bar|/lam)
    - xi_bar . grad u).  Pixels where the conjugate is infinite come out +inf.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if u.shape != xi_bar.shape or u.shape != phi_field.shape:
        raise ValueError(
            f"inconsistent shapes: {u.shape}, {xi_bar.shape}, {phi_field.shape}")
    h = u.h
    gx, gy = grad_arrays(u.data, h)
    mag = np.hypot(gx, gy)
    conj, _, _ = conjugate_values(phi_field, np.hypot(xi_bar.x, xi_bar.y) / lam,
                                  clamp_tol=CLAMP_TOL)
    residual = lam * phi_values(phi_field, mag) + lam * conj
    residual -= xi_bar.x * gx + xi_bar.y * gy
    return h * h * residual


@dataclass(frozen=True)
class CertificateReport:
    """All residuals of the optimality characterisation, plus the verdict."""

    div_residual: float
    trace_violation: float
    gap_abs: float
    gap_rel: float
    primal_energy: float
    dual_energy: float
    young_residual_map: np.ndarray
    young_residual_total: float
    young_residual_max: float
    infeasible_pixels: int
    clamped_pixels: int
    verdict: bool
    convention: str = CONVENTION

    def __post_init__(self):
        m = np.asarray(self.young_residual_map, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "young_residual_map", m)

    def to_dict(self, include_map: bool = True):
        def clean(x):
            x = float(x)
            if np.isfinite(x):
                return x
            return "inf" if x > 0 else "-inf"

        out = {
            "div_residual": clean(self.div_residual),
            "trace_violation": clean(self.trace_violation),
            "gap_abs": clean(self.gap_abs),
            "gap_rel": clean(self.gap_rel),
            "primal_energy": clean(self.primal_energy),
            "dual_energy": clean(self.dual_energy),
            "young_residual_total": clean(self.young_residual_total),
            "young_residual_max": clean(self.young_residual_max),
            "infeasible_pixels": int(self.infeasible_pixels),
            "clamped_pixels": int(self.clamped_pixels),
            "verdict": "pass" if self.verdict else "fail",
            "convention": self.convention,
        }
        if include_map:
            out["young_residual_map"] = [[clean(v) for v in row]
                                         for row in self.young_residual_map]
        return out

    def to_json(self, include_map: bool = True) -> str:
        return json.dumps(self.to_dict(include_map=include_map), sort_keys=True,
                          indent=1)


def certify(u: ScalarImage, xi: VectorField, f: ScalarImage, phi_field: PhiField,
            lam: float, tolerances: CertificateTolerances | None = None) -> CertificateReport:
    """Verify the subdifferential characterisation for a candidate pair.

    Passes iff the divergence residual is below ``tolerances.div_rel``, the
    stored boundary fluxes vanish exactly, the relative duality gap is below
    ``tolerances.gap_rel``, and no pixel leaves the conjugate domain.  The
    target divergence is always derived from (u, f, lam), never taken as an
    input.  Pure function: identical inputs give identical reports.
    """
    tol = tolerances or CertificateTolerances()
    _check_compatible(u, xi, f, phi_field, lam)
    h = u.h

    d = div_arrays(xi.x, xi.y, h)
    target = u.data - f.data  # div xi = u - f, i.e. div(-xi/lam) = (f - u)/lam
    num = float(h * np.sqrt(np.sum((d - target) ** 2)))
    den = float(h * np.sqrt(np.sum(target**2)))
    if den > 0:
        div_residual = num / den
    else:
        div_residual = 0.0 if num == 0.0 else INF

    trace = boundary_flux_max(xi)
    primal, dual, gap, clamped, infeasible = _energies(
        u.data, xi.x, xi.y, f.data, phi_field, lam, h)
    gap_rel = relative_gap(primal, dual)

    ymap = young_equality_map(u, xi, phi_field, lam)
    ytotal = float(np.sum(ymap)) if infeasible == 0 else INF
    ymax = float(np.max(ymap)) if ymap.size else 0.0

    verdict = (
        div_residual <= tol.div_rel
        and trace == 0.0
        and gap_rel <= tol.gap_rel
        and infeasible == 0
    )
    return CertificateReport(
        div_residual=div_residual,
        trace_violation=trace,
        gap_abs=gap,
        gap_rel=gap_rel,
        primal_energy=primal,
        dual_energy=dual,
        young_residual_map=ymap,
        young_residual_total=ytotal,
        young_residual_max=ymax,
        infeasible_pixels=infeasible,
        clamped_pixels=clamped,
        verdict=bool(verdict),
    )
