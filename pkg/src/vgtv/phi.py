"""Spatially varying convex integrands with closed-form conjugates.

Four families of integrands phi(x, t), t >= 0, are supported:

  classical_tv        phi(x, t) = t
  variable_exponent   phi(x, t) = t**p(x) / p(x),        p(x) >= 1
  double_phase        phi(x, t) = t + a(x) * t**q / q,   a(x) >= 0, q > 1
  power_weighted      phi(x, t) = w(x) * t,              w(x) >= w_min > 0

Each family carries its exact convex conjugate, which takes the value
+inf outside a bounded domain wherever the integrand grows linearly
(p(x) = 1, a(x) = 0, classical and weighted TV).  Infinity is an ordinary
float value here, never an exception; callers branch on it.

The module also provides numerical checkers for the structural conditions
a spatially varying integrand should satisfy (uniform normalisation,
almost-monotone growth comparisons with powers, and continuity moduli for
exponent and weight fields).  The continuity limits have no finite-grid
meaning; their checkers are shrinking-radius surrogates and are diagnostic
only, never used to gate the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .calculus import VectorField

__all__ = [
    "Family",
    "PhiField",
    "Condition",
    "ConditionReport",
    "phi_eval",
    "phi_values",
    "conjugate_eval",
    "conjugate_values",
    "recession",
    "recession_values",
    "numeric_legendre",
    "phi_total",
    "check_a0",
    "check_almost_monotone",
    "check_log_holder",
    "check_strong_holder_p",
    "check_double_phase_holder",
    "check_strong_holder_a",
]

INF = float("inf")


class Family(str, Enum):
    CLASSICAL_TV = "classical_tv"
    VARIABLE_EXPONENT = "variable_exponent"
    DOUBLE_PHASE = "double_phase"
    POWER_WEIGHTED = "power_weighted"


def _param_grid(arr, shape, name, low, strict=False):
    out = np.array(arr, dtype=float)
    if out.shape != tuple(shape):
        raise ValueError(f"{name} has shape {out.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    if strict:
        if not np.all(out > low):
            raise ValueError(f"{name} entries must be > {low}")
    elif not np.all(out >= low):
        raise ValueError(f"{name} entries must be >= {low}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PhiField:
    """One integrand family plus its parameter fields on an H x W grid."""

    family: Family
    shape: tuple
    h: float
    p_field: np.ndarray | None = None
    a_field: np.ndarray | None = None
    w_field: np.ndarray | None = None
    q: float | None = None

    def __post_init__(self):
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 2 or min(shape) < 1 or max(shape) < 2:
            raise ValueError(f"bad grid shape {shape}")
        object.__setattr__(self, "shape", shape)
        if not float(self.h) > 0:
            raise ValueError(f"spacing h must be positive, got {self.h}")
        object.__setattr__(self, "h", float(self.h))
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.VARIABLE_EXPONENT:
            if self.p_field is None:
                raise ValueError("variable_exponent needs p_field")
            object.__setattr__(self, "p_field", _param_grid(self.p_field, shape, "p_field", 1.0))
        elif fam is Family.DOUBLE_PHASE:
            if self.a_field is None or self.q is None:
                raise ValueError("double_phase needs a_field and q")
            if not float(self.q) > 1:
                raise ValueError(f"double_phase exponent q must be > 1, got {self.q}")
            object.__setattr__(self, "a_field", _param_grid(self.a_field, shape, "a_field", 0.0))
            object.__setattr__(self, "q", float(self.q))
        elif fam is Family.POWER_WEIGHTED:
            if self.w_field is None:
                raise ValueError("power_weighted needs w_field")
            object.__setattr__(self, "w_field", _param_grid(self.w_field, shape, "w_field", 0.0, strict=True))

    # -- constructors ------------------------------------------------------

    @classmethod
    def classical_tv(cls, shape, h):
        return cls(Family.CLASSICAL_TV, tuple(shape), h)

    @classmethod
    def variable_exponent(cls, p_field, h):
        p = np.asarray(p_field, dtype=float)
        return cls(Family.VARIABLE_EXPONENT, p.shape, h, p_field=p)

    @classmethod
    def double_phase(cls, a_field, q, h):
        a = np.asarray(a_field, dtype=float)
        return cls(Family.DOUBLE_PHASE, a.shape, h, a_field=a, q=q)

    @classmethod
    def power_weighted(cls, w_field, h):
        w = np.asarray(w_field, dtype=float)
        return cls(Family.POWER_WEIGHTED, w.shape, h, w_field=w)

    def check_pixel(self, pixel):
        i, j = int(pixel[0]), int(pixel[1])
        if not (0 <= i < self.shape[0] and 0 <= j < self.shape[1]):
            raise IndexError(f"pixel {pixel} outside grid {self.shape}")
        return i, j


# -- pointwise evaluation ---------------------------------------------------


def phi_values(field: PhiField, t: np.ndarray) -> np.ndarray:
    """phi(x, t(x)) elementwise; t broadcasts against the grid shape."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("phi is defined for t >= 0")
    fam = field.family
    if fam is Family.CLASSICAL_TV:
        return t * np.ones(field.shape)
    if fam is Family.POWER_WEIGHTED:
        return field.w_field * t
    if fam is Family.VARIABLE_EXPONENT:
        p = field.p_field
        return np.power(t, p) / p
    a, q = field.a_field, field.q
    return t + a * np.power(t, q) / q


def conjugate_values(field: PhiField, s: np.ndarray, clamp_tol: float = 0.0):
    """Conjugate phi*(x, s(x)) elementwise.

    Returns ``(values, clamped, infeasible)``.  On pixels where the conjugate
    domain is the bounded interval [0, bound], arguments in
    (bound, bound + clamp_tol] are treated as sitting on the boundary
    (``clamped`` counts them) and anything beyond is +inf (``infeasible``
    counts those).  With the default clamp_tol = 0 the domain is exact.
    """
    s = np.asarray(s, dtype=float) * np.ones(field.shape)
    if np.any(s < 0):
        raise ValueError("conjugate is evaluated at s >= 0")
    fam = field.family
    if fam is Family.CLASSICAL_TV or fam is Family.POWER_WEIGHTED:
        bound = np.ones(field.shape) if fam is Family.CLASSICAL_TV else field.w_field
        vals = np.where(s <= bound + clamp_tol, 0.0, INF)
        clamped = int(np.count_nonzero((s > bound) & (s <= bound + clamp_tol)))
        infeasible = int(np.count_nonzero(s > bound + clamp_tol))
        return vals, clamped, infeasible
    if fam is Family.VARIABLE_EXPONENT:
        p = field.p_field
        linear = p == 1.0
        vals = np.zeros(field.shape)
        clamped = infeasible = 0
        if np.any(linear):
            sl = s[linear]
            vals[linear] = np.where(sl <= 1.0 + clamp_tol, 0.0, INF)
            clamped = int(np.count_nonzero((sl > 1.0) & (sl <= 1.0 + clamp_tol)))
            infeasible = int(np.count_nonzero(sl > 1.0 + clamp_tol))
        smooth = ~linear
        if np.any(smooth):
            pc = p[smooth] / (p[smooth] - 1.0)
            vals[smooth] = np.power(s[smooth], pc) / pc
        return vals, clamped, infeasible
    a, q = field.a_field, field.q
    qc = q / (q - 1.0)
    linear = a == 0.0
    vals = np.zeros(field.shape)
    clamped = infeasible = 0
    if np.any(linear):
        sl = s[linear]
        vals[linear] = np.where(sl <= 1.0 + clamp_tol, 0.0, INF)
        clamped = int(np.count_nonzero((sl > 1.0) & (sl <= 1.0 + clamp_tol)))
        infeasible = int(np.count_nonzero(sl > 1.0 + clamp_tol))
    smooth = ~linear
    if np.any(smooth):
        excess = np.maximum(s[smooth] - 1.0, 0.0)
        # a**(1-qc) * excess**qc / qc, arranged to avoid overflow when a is tiny
        # and excess is 0: (excess/a)**(qc-1) * excess / qc.
        vals[smooth] = np.power(excess / a[smooth], qc - 1.0) * excess / qc
    return vals, clamped, infeasible


def recession_values(field: PhiField) -> np.ndarray:
    """Slope at infinity, lim phi(x, t)/t; +inf on superlinear pixels."""
    fam = field.family
    if fam is Family.CLASSICAL_TV:
        return np.ones(field.shape)
    if fam is Family.POWER_WEIGHTED:
        return field.w_field.copy()
    if fam is Family.VARIABLE_EXPONENT:
        return np.where(field.p_field == 1.0, 1.0, INF)
    return np.where(field.a_field == 0.0, 1.0, INF)


def phi_eval(field: PhiField, pixel, t: float) -> float:
    """phi(x, t) at one pixel."""
    i, j = field.check_pixel(pixel)
    if t < 0:
        raise ValueError(f"phi is defined for t >= 0, got {t}")
    t = float(t)
    fam = field.family
    if fam is Family.CLASSICAL_TV:
        return t
    if fam is Family.POWER_WEIGHTED:
        return float(field.w_field[i, j]) * t
    if fam is Family.VARIABLE_EXPONENT:
        p = float(field.p_field[i, j])
        return t**p / p
    a = float(field.a_field[i, j])
    return t + a * t**field.q / field.q


def conjugate_eval(field: PhiField, pixel, s: float) -> float:
    """phi*(x, s) at one pixel; +inf is a regular return value."""
    i, j = field.check_pixel(pixel)
    if s < 0:
        raise ValueError(f"conjugate is evaluated at s >= 0, got {s}")
    s = float(s)
    fam = field.family
    if fam is Family.CLASSICAL_TV:
        return 0.0 if s <= 1.0 else INF
    if fam is Family.POWER_WEIGHTED:
        return 0.0 if s <= float(field.w_field[i, j]) else INF
    if fam is Family.VARIABLE_EXPONENT:
        p = float(field.p_field[i, j])
        if p == 1.0:
            return 0.0 if s <= 1.0 else INF
        pc = p / (p - 1.0)
        return s**pc / pc
    a = float(field.a_field[i, j])
    if a == 0.0:
        return 0.0 if s <= 1.0 else INF
    qc = field.q / (field.q - 1.0)
    excess = max(s - 1.0, 0.0)
    return (excess / a) ** (qc - 1.0) * excess / qc


def recession(field: PhiField, pixel) -> float:
    i, j = field.check_pixel(pixel)
    fam = field.family
    if fam is Family.CLASSICAL_TV:
        return 1.0
    if fam is Family.POWER_WEIGHTED:
        return float(field.w_field[i, j])
    if fam is Family.VARIABLE_EXPONENT:
        return 1.0 if field.p_field[i, j] == 1.0 else INF
    return 1.0 if field.a_field[i, j] == 0.0 else INF


def numeric_legendre(field: PhiField, pixel, s, t_max: float, n_samples: int,
                     chunk: int = 65536):
    """Brute-force conjugate sup_{t in [0, t_max]} (s t - phi(x, t)).

    Grid-sampled oracle, independent of the closed forms; the finite value
    underestimates the true conjugate by at most the sampling error.
    Returns +inf where s exceeds the recession slope.  ``s`` may be a scalar
    or a 1-D array (one sweep over the t grid serves all of them).
    """
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max}")
    n_samples = int(n_samples)
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    i, j = field.check_pixel(pixel)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0):
        raise ValueError("conjugate is evaluated at s >= 0")

    fam = field.family
    if fam is Family.CLASSICAL_TV:
        phi_of = lambda t: t
    elif fam is Family.POWER_WEIGHTED:
        w = float(field.w_field[i, j])
        phi_of = lambda t: w * t
    elif fam is Family.VARIABLE_EXPONENT:
        p = float(field.p_field[i, j])
        phi_of = lambda t: t**p / p
    else:
        a, q = float(field.a_field[i, j]), field.q
        phi_of = lambda t: t + a * t**q / q

    best = np.zeros(s_arr.shape)  # value at t = 0
    chunk = max(256, min(chunk, (4 << 20) // max(s_arr.size, 1)))
    t_all = np.linspace(0.0, t_max, n_samples)
    for start in range(0, n_samples, chunk):
        t = t_all[start:start + chunk]
        cand = s_arr[:, None] * t[None, :] - phi_of(t)[None, :]
        np.maximum(best, cand.max(axis=1), out=best)
    best[s_arr > recession(field, pixel)] = INF
    return float(best[0]) if np.isscalar(s) or np.asarray(s).ndim == 0 else best


def phi_total(field: PhiField, grad: VectorField) -> float:
    """Discrete modular: sum of phi(x, |grad(x)|) * h^2 over the grid."""
    if grad.shape != field.shape:
        raise ValueError(f"field shape {grad.shape} does not match grid {field.shape}")
    vals = phi_values(field, grad.magnitude())
    return float(field.h * field.h * np.sum(vals))


# -- condition checkers ------------------------------------------------------


class Condition(str, Enum):
    A0 = "A0"
    AINC_P = "aIncP"
    ADEC_Q = "aDecQ"
    LOG_HOLDER = "LogHolder"
    STRONG_HOLDER_P = "StrongHolderP"
    ALMOST_HOLDER_A = "AlmostHolderA"
    STRONG_HOLDER_A = "StrongHolderA"


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of one structural check on sampled data."""

    condition: Condition
    holds: bool
    witness_constant: float
    worst_pixel_pair: tuple | None = None

    def to_dict(self):
        pair = self.worst_pixel_pair
        return {
            "condition": self.condition.value,
            "holds": bool(self.holds),
            "witness_constant": float(self.witness_constant),
            "worst_pixel_pair": None if pair is None else [list(pair[0]), list(pair[1])],
        }


def _a0_feasible(field: PhiField, beta: float) -> bool:
    lower = phi_values(field, np.full(field.shape, beta))
    upper = phi_values(field, np.full(field.shape, 1.0 / beta))
    return bool(np.max(lower) <= 1.0 and np.min(upper) >= 1.0)


def check_a0(field: PhiField, n_beta: int = 512, beta_min: float = 1e-3) -> ConditionReport:
    """Uniform normalisation: some beta in (0, 1] with phi(x, beta) <= 1 <= phi(x, 1/beta).

    Feasibility is downward closed in beta, so the witness is found by a log
    grid scan followed by bisection sharpening.
    """
    betas = np.geomspace(beta_min, 1.0, n_beta)
    betas[-1] = 1.0
    feasible = np.array([_a0_feasible(field, float(b)) for b in betas])
    if not feasible.any():
        return ConditionReport(Condition.A0, False, float("nan"), None)
    k = int(np.max(np.nonzero(feasible)[0]))
    lo = float(betas[k])
    if k + 1 < len(betas):
        hi = float(betas[k + 1])
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if _a0_feasible(field, mid):
                lo = mid
            else:
                hi = mid
    beta = lo
    lower = phi_values(field, np.full(field.shape, beta))
    upper = phi_values(field, np.full(field.shape, 1.0 / beta))
    slack = np.maximum(lower - 1.0, 1.0 - upper)
    worst = np.unravel_index(int(np.argmax(slack)), field.shape)
    worst = (int(worst[0]), int(worst[1]))
    return ConditionReport(Condition.A0, True, beta, (worst, worst))


def check_almost_monotone(field: PhiField, exponent: float, direction: str,
                          cap: float = 1e4, t_lo: float = 1e-3, t_hi: float = 1e3,
                          n_t: int = 200) -> ConditionReport:
    """Smallest L >= 1 making t -> phi(x, t)/t**exponent L-almost inc/dec on samples.

    The t range covers the dynamic range of normalised 8-bit image gradients
    with margin.  ``holds`` means L stays under the configured cap.
    """
    if exponent < 1:
        raise ValueError(f"exponent must be >= 1, got {exponent}")
    if direction not in ("inc", "dec"):
        raise ValueError(f"direction must be 'inc' or 'dec', got {direction!r}")
    t = np.geomspace(t_lo, t_hi, n_t)
    vals = np.stack([phi_values(field, np.full(field.shape, tv)) for tv in t], axis=-1)
    ratios = vals / t**exponent  # shape (H, W, n_t)
    flat = ratios.reshape(-1, n_t)
    if direction == "inc":
        # need f(s) <= L f(t) for s <= t: L = max over t of prefix-max(f)/f(t)
        need = np.maximum.accumulate(flat, axis=1) / flat
    else:
        # need L f(s) >= f(t) for s <= t: L = max over t of f(t)/prefix-min(f)
        need = flat / np.minimum.accumulate(flat, axis=1)
    per_pixel = need.max(axis=1)
    idx = int(np.argmax(per_pixel))
    L = max(1.0, float(per_pixel[idx]))
    worst = np.unravel_index(idx, field.shape)
    worst = (int(worst[0]), int(worst[1]))
    cond = Condition.AINC_P if direction == "inc" else Condition.ADEC_Q
    return ConditionReport(cond, bool(np.isfinite(L) and L <= cap), L, (worst, worst))


def _pairwise_max(values_y, denom_of_dist, coords, h, combine):
    """Max over ordered pixel pairs of combine(val[y], val[x], dist); chunked."""
    n = coords.shape[0]
    best = -INF
    best_pair = None
    chunksize = max(1, min(n, 4_000_000 // max(n, 1) + 1))
    for start in range(0, n, chunksize):
        stop = min(start + chunksize, n)
        dx = coords[start:stop, None, 0] - coords[None, :, 0]
        dy = coords[start:stop, None, 1] - coords[None, :, 1]
        dist = np.hypot(dx, dy) * h
        quot = combine(values_y[start:stop, None], values_y[None, :], dist)
        k = int(np.argmax(quot))
        val = float(quot.flat[k])
        if val > best:
            best = val
            ii, jj = np.unravel_index(k, quot.shape)
            best_pair = (tuple(coords[start + ii]), tuple(coords[jj]))
    return best, best_pair


def check_log_holder(p_field: np.ndarray, h: float, cap: float = 1.0) -> ConditionReport:
    """Smallest C with |1/p(x) - 1/p(y)| <= C / log(e + 1/|x-y|) over pixel pairs."""
    p = np.asarray(p_field, dtype=float)
    coords = np.indices(p.shape).reshape(2, -1).T
    invp = (1.0 / p).ravel()

    def combine(vy, vx, dist):
        with np.errstate(divide="ignore", invalid="ignore"):
            quot = np.abs(vy - vx) * np.log(np.e + 1.0 / dist)
        return np.where(dist > 0, quot, -INF)

    C, pair = _pairwise_max(invp, None, coords, h, combine)
    C = max(C, 0.0)
    pair = tuple((int(a), int(b)) for a, b in pair) if pair else None
    return ConditionReport(Condition.LOG_HOLDER, C <= cap, C, pair)


def _shrinking_radius_max(values, zero_set, coords_all, h, radii_px, ratio):
    """M(r) = max over {(x, y): y in zero set, 0 < |x-y| <= r} of ratio(x, dist)."""
    maxima = []
    worst = None
    for rad in radii_px:
        best = 0.0
        for (yi, yj) in zero_set:
            i0, i1 = max(0, yi - rad), min(values.shape[0], yi + rad + 1)
            j0, j1 = max(0, yj - rad), min(values.shape[1], yj + rad + 1)
            sub = values[i0:i1, j0:j1]
            ii, jj = np.mgrid[i0:i1, j0:j1]
            dist = np.hypot(ii - yi, jj - yj) * h
            mask = (dist > 0) & (dist <= rad * h + 1e-12)
            if not mask.any():
                continue
            vals = ratio(sub[mask], dist[mask])
            k = int(np.argmax(vals))
            if float(vals[k]) > best:
                best = float(vals[k])
                xi, xj = ii[mask][k], jj[mask][k]
                if rad == radii_px[-1]:
                    worst = ((int(xi), int(xj)), (int(yi), int(yj)))
        maxima.append(best)
    return maxima, worst


def check_strong_holder_p(p_field: np.ndarray, h: float, threshold: float = 1e-2,
                          radii_px=(8, 4, 2, 1)) -> ConditionReport:
    """Shrinking-radius surrogate for |1 - 1/p(x)| log(1/|x-y|) -> 0 at {p = 1}.

    Diagnostic only: the maxima over balls of radius 8h, 4h, 2h, h around the
    set {p = 1} must be non-increasing and end below the threshold.  Vacuously
    true when {p = 1} is empty.
    """
    p = np.asarray(p_field, dtype=float)
    zero_set = [tuple(idx) for idx in np.argwhere(p <= 1.0 + 1e-12)]
    if not zero_set:
        return ConditionReport(Condition.STRONG_HOLDER_P, True, 0.0, None)
    vals = np.abs(1.0 - 1.0 / p)

    def ratio(v, dist):
        with np.errstate(divide="ignore"):
            return v * np.log(1.0 / dist)

    maxima, worst = _shrinking_radius_max(vals, zero_set, None, h, list(radii_px), ratio)
    monotone = all(maxima[k] >= maxima[k + 1] - 1e-12 for k in range(len(maxima) - 1))
    final = maxima[-1]
    return ConditionReport(Condition.STRONG_HOLDER_P, monotone and final <= threshold,
                           final, worst)


def check_double_phase_holder(a_field: np.ndarray, q: float, n_dim: int = 2,
                              h: float = 1.0, cap: float = 1e3) -> ConditionReport:
    """Smallest C with a(y) <= C (a(x) + |x-y|**(n(q-1))) over all pixel pairs.

    The diagonal pair x = y is included (its ratio is 1 wherever a > 0), so a
    constant positive weight reports exactly C = 1.
    """
    a = np.asarray(a_field, dtype=float)
    z = n_dim * (q - 1.0)
    coords = np.indices(a.shape).reshape(2, -1).T
    av = a.ravel()

    def combine(vy, vx, dist):
        denom = vx + dist**z
        with np.errstate(divide="ignore", invalid="ignore"):
            quot = vy / denom
        return np.where(vy == 0.0, 0.0, np.where(denom > 0, quot, INF))

    C, pair = _pairwise_max(av, None, coords, h, combine)
    C = max(C, 0.0)
    pair = tuple((int(x), int(y)) for x, y in pair) if pair else None
    return ConditionReport(Condition.ALMOST_HOLDER_A, bool(np.isfinite(C) and C <= cap), C, pair)


def check_strong_holder_a(a_field: np.ndarray, q: float, n_dim: int = 2,
                          h: float = 1.0, threshold: float = 1e-2,
                          radii_px=(8, 4, 2, 1)) -> ConditionReport:
    """Shrinking-radius surrogate for a(x)/|x-y|**(n(q-1)) -> 0 at {a = 0}.

    Same ball construction as :func:`check_strong_holder_p`; vacuously true
    when the weight never vanishes.
    """
    a = np.asarray(a_field, dtype=float)
    z = n_dim * (q - 1.0)
    zero_set = [tuple(idx) for idx in np.argwhere(a <= 1e-300)]
    if not zero_set:
        return ConditionReport(Condition.STRONG_HOLDER_A, True, 0.0, None)

    def ratio(v, dist):
        return np.abs(v) / dist**z

    maxima, worst = _shrinking_radius_max(a, zero_set, None, h, list(radii_px), ratio)
    monotone = all(maxima[k] >= maxima[k + 1] - 1e-12 for k in range(len(maxima) - 1))
    final = maxima[-1]
    return ConditionReport(Condition.STRONG_HOLDER_A, monotone and final <= threshold,
                           final, worst)
