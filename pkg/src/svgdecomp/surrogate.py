"""Two-layer polynomial regression for locating a single variable's optimum.

The first layer fits a quadratic to 100 samples spread over the whole
variable range and centres a trust region (10% of the range) on its
minimizer.  The second layer samples the trust region again, fits a quintic
to every run of six consecutive samples, and the best window minimizer is
polished by a one-dimensional quasi-Newton search on the true slice.
"""

import csv
from dataclasses import dataclass

import numpy as np

from ._validation import DomainError

N_SAMPLES = 100
WINDOW = 6
TRUST_FRACTION = 0.1
DELTA_FLOOR = 1e-4
REFINE_MAX_ITER = 20
REFINE_TOL = 1e-8
# finite-difference half-width of the refinement, relative to the range
REFINE_SPAN = 0.005
NOISE_REL = 1e-14
# how far past the bounds (in ranges) the refinement may follow a slice
SEARCH_REACH = 1000.0
# window minima scoring this close (relative to the layer-2 sample range) to
# the best one are refined as well, at most MAX_CONTENDERS of them
CONTENDER_MARGIN = 1e-3
MAX_CONTENDERS = 3


class FitError(ValueError):
    """The least-squares system is underdetermined or numerically singular."""


@dataclass(frozen=True)
class PolyModel:
    """``PR(x) = sum_k coefficients[k] * u**(degree - k)``, ``u = (x - center) / scale``.

    Coefficients are stored highest degree first, as :func:`numpy.polyval`
    expects.  With the default ``center=0, scale=1`` they are the raw
    polynomial coefficients.
    """

    degree: int
    coefficients: np.ndarray
    center: float = 0.0
    scale: float = 1.0

    def __call__(self, x):
        return np.polyval(self.coefficients, (np.asarray(x, dtype=float) - self.center) / self.scale)

    @property
    def degenerate(self):
        c = np.abs(self.coefficients)
        return c[0] <= 1e-12 * max(1.0, float(c.max()))

    def raw_coefficients(self):
        """Coefficients in powers of ``x`` itself (may lose accuracy for large offsets)."""
        poly = np.poly1d([0.0])
        u = np.poly1d([1.0 / self.scale, -self.center / self.scale])
        for k, p in enumerate(self.coefficients):
            poly = poly + p * u ** (self.degree - k)
        raw = poly.coeffs
        return np.concatenate([np.zeros(self.degree + 1 - raw.size), raw])


@dataclass(frozen=True)
class TlprResult:
    """Located optimum of one variable.

    ``x_star`` lies within the variable's bounds.  ``x_free`` is the slice
    minimizer before clamping; it differs from ``x_star`` only when the
    optimum conditional on the other variables lies outside the box.
    """

    x_star: float
    delta: float
    fes_used: int
    x_free: float = None

    def __post_init__(self):
        if self.x_free is None:
            object.__setattr__(self, "x_free", self.x_star)


def fit_poly(xs, ys, degree, *, normalize=True):
    """Least-squares polynomial of ``degree`` through ``(xs, ys)``.

    With ``normalize`` the abscissae are centred and scaled to ``[-1, 1]``
    before fitting, which keeps quintic fits on narrow windows well
    conditioned.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitError("xs and ys must be 1-D arrays of equal length")
    if xs.size < degree + 1:
        raise FitError(f"degree {degree} needs at least {degree + 1} samples, got {xs.size}")
    if np.unique(xs).size != xs.size:
        raise FitError("sample abscissae must be distinct")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise FitError("samples must be finite")

    center, scale = 0.0, 1.0
    if normalize:
        lo, hi = xs.min(), xs.max()
        center = 0.5 * (lo + hi)
        scale = 0.5 * (hi - lo)
    u = (xs - center) / scale
    vander = np.vander(u, degree + 1)
    coef, _, rank, sv = np.linalg.lstsq(vander, ys, rcond=None)
    if rank < degree + 1 or sv[-1] <= 1e-12 * sv[0]:
        raise FitError("design matrix is numerically singular")
    return PolyModel(degree, coef, float(center), float(scale))


def poly_minimum(model, lo, hi):
    """Argmin of ``model`` over ``[lo, hi]``; ties go to the smaller argument."""
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    candidates = [lo, hi]
    deriv = np.polyder(model.coefficients)
    if np.any(deriv != 0):
        nz = np.flatnonzero(deriv)
        roots = np.roots(deriv[nz[0]:]) if nz.size else np.array([])
        for r in roots:
            if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)):
                x = model.center + model.scale * r.real
                if lo <= x <= hi:
                    candidates.append(float(x))
    candidates = np.array(sorted(candidates))
    values = model(candidates)
    best = values.min()
    tol = 1e-12 * max(1.0, abs(best))
    return float(candidates[np.flatnonzero(values <= best + tol)[0]])


def _three_point(x0, x1, x2, f0, f1, f2, at):
    """Slope and curvature at ``at`` of the parabola through three points."""
    d01 = (f1 - f0) / (x1 - x0)
    d12 = (f2 - f1) / (x2 - x1)
    curv = 2.0 * (d12 - d01) / (x2 - x0)
    slope = d01 + 0.5 * curv * (2.0 * at - x0 - x1)
    return slope, curv


def _roundoff(fx):
    # generous bound on the evaluation error of a summed objective
    return NOISE_REL * (1.0 + abs(fx))


def local_refine(slice_objective, x0, lo, hi, *, span=None, scale=None):
    """One-dimensional quasi-Newton descent on ``slice_objective``.

    Slope and curvature come from a three-point stencil of half-width
    ``span`` (default ``0.005 * (hi - lo)``).  The wide stencil keeps the
    Newton step accurate when the slice value carries roundoff far above the
    fitness variation near the optimum.  Steps are accepted on sufficient
    decrease after at most four halvings; once a step falls to the roundoff
    level of the stencil it is applied and the descent stops.  Two narrower
    stencils then remove the stencil bias of asymmetric slices, as long as
    their corrections stand above roundoff.

    ``scale`` (default ``hi - lo``) sets the stencil, the stopping tolerance
    ``1e-8 * scale`` and the step floor; pass the nominal variable range when
    ``[lo, hi]`` is a widened search interval.

    Returns ``(x_star, last_step, fes)`` where ``last_step`` is the magnitude
    of the last step taken, floored at ``DELTA_FLOOR * scale``.
    """
    x, last, fes, _ = _refine(slice_objective, x0, lo, hi, span, scale)
    return x, last, fes


def _refine(slice_objective, x0, lo, hi, span, scale):
    # local_refine plus the slice value at the returned point (inf on abort)
    if not lo <= x0 <= hi:
        raise DomainError(f"x0={x0} outside [{lo}, {hi}]")
    width = hi - lo if scale is None else scale
    h = REFINE_SPAN * width if span is None else span
    floor = DELTA_FLOOR * width
    tol = REFINE_TOL * width
    fes = 0

    def f(x):
        nonlocal fes
        fes += 1
        v = slice_objective(x)
        if not np.isfinite(v):
            raise FloatingPointError
        return v

    def stencil(x, fx, h):
        if x - h < lo:
            pts = (x, x + h, x + 2 * h)
            vals = (fx, f(pts[1]), f(pts[2]))
        elif x + h > hi:
            pts = (x - 2 * h, x - h, x)
            vals = (f(pts[0]), f(pts[1]), fx)
        else:
            pts = (x - h, x, x + h)
            vals = (f(pts[0]), fx, f(pts[2]))
        return pts, vals

    x, last = float(x0), 0.0
    converged = False
    try:
        fx = f(x)
        for _ in range(REFINE_MAX_ITER):
            pts, vals = stencil(x, fx, h)
            slope, curv = _three_point(*pts, *vals, at=x)
            k = int(np.argmin(vals))
            x_alt, f_alt = (pts[k], vals[k]) if vals[k] < fx else (x, fx)

            if curv > 0:
                step = -slope / curv
                if abs(step) <= max(tol, 3.0 * _roundoff(fx) / (h * curv)):
                    x_new = float(np.clip(x + step, lo, hi))
                    last = abs(x_new - x)
                    if x_new != x:
                        x, fx = x_new, f(x_new)
                    converged = True
                    break
            elif slope != 0:
                step = -np.sign(slope) * max(2 * abs(last), 10 * h)
            else:
                break
            step = float(np.clip(x + step, lo, hi) - x)

            accepted = False
            for _ in range(5):
                if abs(step) < tol:
                    break
                x_new = x + step
                f_new = f(x_new)
                if f_new <= fx + 1e-4 * step * slope and f_new <= f_alt:
                    x, fx, last, accepted = x_new, f_new, abs(step), True
                    break
                step *= 0.5
            if not accepted:
                if f_alt < fx:
                    last = abs(x_alt - x)
                    x, fx = x_alt, f_alt
                    continue
                converged = True
                break

        if converged:
            for shrink in (10.0, 100.0):
                hb = h / shrink
                pts, vals = stencil(x, fx, hb)
                slope, curv = _three_point(*pts, *vals, at=x)
                if curv <= 0:
                    break
                step = -slope / curv
                if abs(step) <= 3.0 * _roundoff(fx) / (hb * curv) or abs(step) > h:
                    break
                x_new = float(np.clip(x + step, lo, hi))
                last = abs(x_new - x)
                x, fx = x_new, f(x_new)
    except FloatingPointError:
        return float(x0), floor, fes, np.inf
    return float(np.clip(x, lo, hi)), max(last, floor), fes, fx


def _windows(count, size):
    starts = list(range(0, count - size + 1, size))
    if starts[-1] + size < count:
        starts.append(count - size)
    return [(s, s + size) for s in starts]


def _contenders(cands, xs, ys):
    """Best-scored window minima that differ by more than a window span.

    On multimodal slices neighbouring local minima score within model error
    of each other, so every distinct candidate scoring within
    ``CONTENDER_MARGIN`` of the sample range of the best one is refined.
    """
    span = (WINDOW - 1) * (xs[1] - xs[0])
    margin = CONTENDER_MARGIN * (ys.max() - ys.min())
    cands = sorted(cands)
    kept = []
    for score, x in cands:
        if score > cands[0][0] + margin or len(kept) == MAX_CONTENDERS:
            break
        if all(abs(x - k) > span for _, k in kept):
            kept.append((score, x))
    return kept


def tlpr(obj, t, lb, ub, cv, *, trace=None):
    """Locate the optimum of variable ``t`` with every other variable fixed at ``cv``.

    ``obj`` is a counting objective; ``cv`` is not modified.  When ``trace``
    is a list, ``(x, y, layer, window)`` rows of every true sample are
    appended to it.
    """
    lo, hi = float(lb[t]), float(ub[t])
    width = hi - lo
    start = obj.fes_used
    s = np.array(cv, dtype=float)

    def slice_value(v):
        s[t] = v
        return obj(s)

    # layer 1: global quadratic profile
    xs1 = np.linspace(lo, hi, N_SAMPLES)
    ys1 = np.array([slice_value(v) for v in xs1])
    if trace is not None:
        trace.extend((x, y, 1, -1) for x, y in zip(xs1, ys1))
    center = float(xs1[np.argmin(ys1)])
    try:
        quad = fit_poly(xs1, ys1, 2)
        if quad.coefficients[0] > 1e-12 * max(1.0, float(np.abs(quad.coefficients).max())):
            center = poly_minimum(quad, lo, hi)
    except FitError:
        pass

    # layer 2: piecewise quintic models inside the trust region
    a = max(lo, center - 0.5 * TRUST_FRACTION * width)
    b = min(hi, center + 0.5 * TRUST_FRACTION * width)
    xs2 = np.linspace(a, b, N_SAMPLES)
    ys2 = np.array([slice_value(v) for v in xs2])
    cands = [(float(ys2.min()), float(xs2[np.argmin(ys2)]))]
    for w, (i, j) in enumerate(_windows(N_SAMPLES, WINDOW)):
        xw, yw = xs2[i:j], ys2[i:j]
        if trace is not None:
            trace.extend((x, y, 2, w) for x, y in zip(xw, yw))
        try:
            model = fit_poly(xw, yw, 5)
        except FitError:
            continue
        cand = poly_minimum(model, float(xw[0]), float(xw[-1]))
        near = int(np.argmin(np.abs(xw - cand)))
        cands.append((float(yw[near] + model(cand) - model(xw[near])), cand))

    # the slice is followed past the box so that conditional optima beyond a
    # bound are still located exactly
    reach = (lo - SEARCH_REACH * width, hi + SEARCH_REACH * width)
    best = None
    for _, x0 in _contenders(cands, xs2, ys2):
        x_free, step, _, fx = _refine(slice_value, x0, *reach, None, width)
        if best is None or fx < best[0]:
            best = (fx, x_free, step)
    _, x_free, step = best
    delta = max(step, DELTA_FLOOR * width)
    x_star = min(max(x_free, lo), hi)
    return TlprResult(x_star, delta, obj.fes_used - start, x_free)


def write_trace(trace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "layer", "window"])
        for row in trace:
            writer.writerow([repr(float(row[0])), repr(float(row[1])), row[2], row[3]])
