"""One-dimensional proportional fractional operators with respect to a weight.

The central objects are the left and right proportional fractional integrals
of order ``alpha`` and proportion ``sigma`` taken with respect to a strictly
increasing weight function ``phi``::

    left:   (1 / (sigma^a * Gamma(a))) *
            integral_a^t exp(((sigma-1)/sigma) * (phi(t)-phi(tau)))
                         * (phi(t)-phi(tau))^(a-1) * f(tau) * phi'(tau) dtau

(and the mirrored form over ``[t, b]`` for the right side), together with the
fractional derivatives obtained by composing a first-order proportional
derivative with the integral of complementary order.

The kernel is weakly singular at ``tau = t``.  Both quadrature schemes work
in the variable ``v = |phi(t) - phi(tau)|`` where the weight is exactly
``v^(a-1)``:

* ``graded`` (default): a mesh graded toward the singular endpoint with the
  singular moments integrated exactly against a piecewise-linear interpolant
  of the smooth factor (product trapezoid rule).  Robust for every order in
  ``(0, 1]``, including orders approaching zero where the kernel mass
  concentrates far below any fixed mesh resolution.
* ``gauss_jacobi``: a Gauss-Jacobi rule with the ``v^(a-1)`` weight built in,
  spectrally accurate for smooth integrands but requiring the inverse of
  ``phi`` (supplied analytically or found by bisection).

Evaluation points may be scalars or numpy arrays; integrand callables must
accept numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import roots_jacobi

from .errors import DomainError, QuadratureError, StepError

_LOG2E = math.log2(math.e)
#: Grading exponents above this are clipped; the product rule integrates the
#: singular weight exactly, so extreme grading only degenerates the mesh.
GRADING_CAP = 10.0
#: Below this order the moment differences switch to an expm1/log evaluation.
_SMALL_ORDER = 1e-3
#: Element budget per chunk when batching targets (keeps matrices ~30 MB).
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class ScalarWeightFn:
    """Strictly increasing C^1 weight ``phi`` on a closed interval.

    ``phi`` and ``dphi`` must accept numpy arrays.  ``inv`` is an optional
    analytic inverse; when absent the Gauss-Jacobi scheme falls back to
    bisection (the graded scheme never needs the inverse).
    """

    phi: Callable
    dphi: Callable
    lo: float
    hi: float
    inv: Optional[Callable] = None

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all(t >= self.lo - 1e-12) and np.all(t <= self.hi + 1e-12))

    def validate(self, n: int = 64) -> None:
        """Check ``dphi > 0`` on a sample grid; raises :class:`DomainError`."""
        ts = np.linspace(self.lo, self.hi, n)
        d = np.asarray(self.dphi(ts), dtype=float)
        if not np.all(d > 0):
            raise DomainError("weight derivative must be strictly positive")

    def inverse(self, u):
        """Value ``t`` with ``phi(t) = u`` (analytic inverse or bisection)."""
        if self.inv is not None:
            return self.inv(u)
        return _bisect_inverse(self.phi, np.asarray(u, dtype=float), self.lo, self.hi)


@dataclass(frozen=True)
class ProportionalControl:
    """Interpolation coefficients ``chi1`` (value part) and ``chi0``
    (derivative part) of the first-order proportional derivative; each maps
    ``(sigma, t)`` to a nonnegative real."""

    chi1: Callable
    chi0: Callable


#: The affine instance ``chi1 = 1 - sigma``, ``chi0 = sigma``.
DEFAULT_CONTROL = ProportionalControl(
    chi1=lambda sigma, t: (1.0 - sigma) * np.ones_like(np.asarray(t, dtype=float)),
    chi0=lambda sigma, t: sigma * np.ones_like(np.asarray(t, dtype=float)),
)


@dataclass(frozen=True)
class Quadrature1D:
    """Discretization choice for the weakly singular integrals."""

    n: int = 512
    scheme: str = "graded"  # "graded" | "gauss_jacobi"
    grading: Optional[float] = None  # None = automatic 2/alpha (capped)
    tol: Optional[float] = None  # enable an internal two-level self check

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("node count must be at least 2")
        if self.scheme not in ("graded", "gauss_jacobi"):
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.grading is not None and self.grading < 1.0:
            raise ValueError("grading exponent must be >= 1")


@dataclass(frozen=True)
class FracSpec:
    """Order, proportion, and weight of a fractional operator.

    ``sigma = 0`` is accepted as the degenerate limit in which both the
    integral and the derivative collapse to the identity."""

    alpha: float
    sigma: float
    weight: ScalarWeightFn

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("fractional order must lie in (0, 1]")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("proportion must lie in [0, 1]")


def prop_derivative(
    f: Callable,
    df: Callable,
    w: ScalarWeightFn,
    sigma: float,
    t,
    control: ProportionalControl = DEFAULT_CONTROL,
):
    """First-order proportional derivative ``chi1*f + chi0*f'/phi'``."""
    t = np.asarray(t, dtype=float)
    if not w.contains(t):
        raise DomainError(f"evaluation point outside [{w.lo}, {w.hi}]")
    out = control.chi1(sigma, t) * f(t) + control.chi0(sigma, t) * df(t) / w.dphi(t)
    return out if out.ndim else out[()]


def hausdorff_derivative(l: Callable, dl: Callable, alpha: float, a: float, t):
    """Local fractal-time derivative ``l'(t) / (alpha * (t-a)^(alpha-1))``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("fractal order must lie in (0, 1]")
    t = np.asarray(t, dtype=float)
    if np.any(t <= a):
        raise DomainError("Hausdorff derivative needs t > a")
    out = dl(t) * (t - a) ** (1.0 - alpha) / alpha
    return out if out.ndim else out[()]


def prop_frac_integral(f: Callable, p: FracSpec, side: str, t, q: Quadrature1D):
    """Left or right proportional fractional integral of ``f`` at ``t``.

    ``side`` is ``"left"`` (integration from the lower interval end) or
    ``"right"`` (from the upper end).  ``t`` may be a scalar or an array.
    """
    _check_side(side)
    scalar = np.isscalar(t) or np.ndim(t) == 0
    t_arr = np.asarray(t, dtype=float)
    ts = np.atleast_1d(t_arr).ravel()
    w = p.weight
    if not w.contains(ts):
        raise DomainError(f"evaluation point outside [{w.lo}, {w.hi}]")
    anchor = w.lo if side == "left" else w.hi
    if side == "left" and np.any(ts < anchor - 1e-14):
        raise DomainError("left integral needs t >= lower end")
    if side == "right" and np.any(ts > anchor + 1e-14):
        raise DomainError("right integral needs t <= upper end")

    if p.sigma == 0.0:
        out = np.asarray(f(ts)) + 0.0j  # identity limit of the tempered kernel
    else:
        out = _integral_dispatch(f, p, side, ts, q)
        if q.tol is not None:
            coarse = _integral_dispatch(f, p, side, ts, _halved(q))
            err = np.max(np.abs(out - coarse))
            if err > q.tol * (1.0 + np.max(np.abs(out))):
                raise QuadratureError(
                    f"self-estimate {err:.3e} exceeds requested tolerance {q.tol:.3e}"
                )
    if scalar:
        return out[0]
    return out.reshape(t_arr.shape)


def prop_frac_derivative(
    f: Callable,
    p: FracSpec,
    side: str,
    t,
    q: Quadrature1D,
    h: Optional[float] = None,
    control: ProportionalControl = DEFAULT_CONTROL,
):
    """Proportional fractional derivative of order ``p.alpha``.

    Composes the first-order proportional step with the integral of
    complementary order ``1 - alpha``; the derivative of the inner integral
    is taken by a central difference of step ``h`` (clipped one-sided at the
    interval ends).  On the right side the derivative part enters with the
    opposite sign, which is what makes the right-sided composition with the
    right integral the identity.
    """
    _check_side(side)
    if p.alpha >= 1.0:
        raise ValueError("derivative order must lie in (0, 1)")
    w = p.weight
    span = w.hi - w.lo
    if h is None:
        h = span * 1e-4
    if h <= 0 or h >= span / 2.0:
        raise StepError(f"finite-difference step {h} invalid for span {span}")

    scalar = np.isscalar(t) or np.ndim(t) == 0
    t_arr = np.asarray(t, dtype=float)
    ts = np.atleast_1d(t_arr).ravel()
    if not w.contains(ts):
        raise DomainError(f"evaluation point outside [{w.lo}, {w.hi}]")
    if p.sigma == 0.0:
        out = np.asarray(f(ts)) + 0.0j
        return out[0] if scalar else out.reshape(t_arr.shape)

    inner = FracSpec(1.0 - p.alpha, p.sigma, w)
    tm = np.maximum(ts - h, w.lo)
    tp = np.minimum(ts + h, w.hi)
    stencil = np.concatenate([ts, tm, tp])
    g = prop_frac_integral(f, inner, side, stencil, q)
    n = ts.size
    g0, gm, gp = g[:n], g[n : 2 * n], g[2 * n :]
    dg = (gp - gm) / (tp - tm)
    sign = 1.0 if side == "left" else -1.0
    out = control.chi1(p.sigma, ts) * g0 + sign * control.chi0(p.sigma, ts) * dg / w.dphi(ts)
    return out[0] if scalar else out.reshape(t_arr.shape)


# ----------------------------------------------------------------------
# quadrature internals


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _halved(q: Quadrature1D) -> Quadrature1D:
    return Quadrature1D(max(2, q.n // 2), q.scheme, q.grading, None)


def _integral_dispatch(f, p, side, ts, q):
    if q.scheme == "gauss_jacobi":
        return _gauss_jacobi_integral(f, p, side, ts, q)
    return _graded_integral(f, p, side, ts, q)


#: Mesh grading toward the anchor end.  Compositions integrate functions
#: with an algebraic cusp there (a fractional integral of a smooth input
#: behaves like distance-to-anchor to its order), so the mesh clusters at
#: both ends: hard at the singular endpoint, mildly at the anchor.
_ANCHOR_GRADING = 3.0


@lru_cache(maxsize=64)
def _graded_fractions(n_nodes: int, grading: float) -> np.ndarray:
    x = np.arange(n_nodes, dtype=float) / (n_nodes - 1)
    frac = 1.0 - (1.0 - x**grading) ** _ANCHOR_GRADING
    # never sample the anchor itself: fractional integrals of smooth inputs
    # drop to zero in an exponentially thin layer there when the order is
    # tiny, and power-law inputs may blow up; the one-sided limit is the
    # value a composition should see
    frac[-1] = 1.0 - 1e-12
    return frac


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, beta_key: float):
    # weight (1+x)^(beta-1) on [-1, 1]
    return roots_jacobi(n, 0.0, beta_key - 1.0)


def _auto_grading(q: Quadrature1D, beta: float) -> float:
    if q.grading is not None:
        return min(q.grading, GRADING_CAP)
    return float(min(max(2.0 / beta, 1.0), GRADING_CAP))


def _graded_integral(f, p, side, ts, q):
    """Product-trapezoid rule on a mesh graded toward the moving endpoint."""
    out = np.empty(ts.shape, dtype=complex)
    n_nodes = max(2, q.n)
    chunk = max(1, _CHUNK_ELEMENTS // n_nodes)
    for start in range(0, ts.size, chunk):
        sl = slice(start, start + chunk)
        tau, wts = _graded_rule(p, side, ts[sl], q)
        out[sl] = np.sum(np.asarray(f(tau)) * wts, axis=1)
    return out


def _graded_rule(p: FracSpec, side: str, ts: np.ndarray, q: Quadrature1D):
    """Nodes and real weights of the product-trapezoid rule, one row per
    target; the tempered-exponential factor is folded into the weights so
    that ``sum(weights * f(nodes))`` approximates the integral."""
    beta, sigma, w = p.alpha, p.sigma, p.weight
    anchor = w.lo if side == "left" else w.hi
    u = _graded_fractions(max(2, q.n), _auto_grading(q, beta))
    c = (sigma - 1.0) / sigma
    pref = sigma ** (-beta)
    gamma_b1 = _gamma(beta + 1.0)

    t = ts[:, None]
    phits = np.asarray(w.phi(ts), dtype=float)
    if side == "left":
        tau = t - (t - anchor) * u[None, :]
        v = phits[:, None] - np.asarray(w.phi(tau), dtype=float)
    else:
        tau = t + (anchor - t) * u[None, :]
        v = np.asarray(w.phi(tau), dtype=float) - phits[:, None]
    v = np.maximum(v, 0.0)

    wts = _panel_weights(v, beta, gamma_b1)
    if c != 0.0:
        wts *= np.exp2((c * _LOG2E) * v)
    wts *= pref
    return tau, wts


def _panel_weights(v: np.ndarray, beta: float, gamma_b1: float) -> np.ndarray:
    """Node weights of the product-trapezoid rule in the singular variable
    ``v`` (rows ascending from 0), already divided by ``Gamma(beta)``."""
    vl, vh = v[:, :-1], v[:, 1:]
    vb_l, vb_h = vl**beta, vh**beta
    if beta < _SMALL_ORDER:
        # difference of nearly equal powers; go through expm1 of the log ratio
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(vl > 0, vh / np.where(vl > 0, vl, 1.0), 1.0)
            c0 = np.where(vl > 0, vb_l * np.expm1(beta * np.log(ratio)), vb_h)
        c0 /= gamma_b1
    else:
        c0 = (vb_h - vb_l) / gamma_b1
    m1 = (vb_h * vh - vb_l * vl) * (beta / ((beta + 1.0) * gamma_b1))
    dv = vh - vl
    with np.errstate(divide="ignore", invalid="ignore"):
        slope_coef = np.where(dv > 0, (m1 - vl * c0) / np.where(dv > 0, dv, 1.0), 0.0)

    wts = np.zeros_like(v)
    wts[:, :-1] += c0 - slope_coef
    wts[:, 1:] += slope_coef
    return wts


def integral_rule(p: FracSpec, side: str, t: float, q: Quadrature1D):
    """Nodes and weights so that ``sum(weights * f(nodes))`` approximates the
    proportional fractional integral at the scalar target ``t``.

    Exposing the rule lets callers batch one integrand over many parameters
    (for example a Cauchy kernel over many boundary points) with a single
    matrix product.  Weights are real for the graded scheme.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if q.scheme == "gauss_jacobi":
        tau, wts = _gauss_jacobi_rule_nodes(p, side, ts, q)
    else:
        tau, wts = _graded_rule(p, side, ts, q)
    return tau[0], wts[0]


def refined_rule(
    p: FracSpec,
    side: str,
    t: float,
    q: Quadrature1D,
    centers: np.ndarray,
    scales: np.ndarray,
    per_octave: int = 4,
):
    """Per-row rules with extra nodes geometrically clustered around
    near-singular locations of the integrand.

    ``centers`` and ``scales`` give locations and widths of sharp features
    (for instance Cauchy kernel poles just off the integration segment):
    1-D arrays describe one rule with several clusters, 2-D arrays one rule
    per row.  The base graded mesh is merged with two-sided geometric
    ladders spanning ``scale/2`` up to the interval length, so each feature
    is resolved at every octave.  Features far outside the segment simply
    produce harmless extra nodes.

    Returns ``(tau, wts)`` of shape ``(rows, columns)``; row sums
    ``sum(wts[r] * f(tau[r]))`` approximate the integral at ``t``.
    """
    t = float(t)
    w = p.weight
    anchor = w.lo if side == "left" else w.hi
    span = abs(t - anchor)
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    scales = np.atleast_2d(np.asarray(scales, dtype=float))
    scales = np.maximum(scales, span * 1e-9 + 1e-300)
    rows = centers.shape[0]

    u = _graded_fractions(max(2, q.n), _auto_grading(q, p.alpha))
    base = t - (t - anchor) * u if side == "left" else t + (anchor - t) * u

    octaves = 10
    ladder = 2.0 ** (np.arange(octaves * per_octave + 1) / per_octave - 1.0)
    offsets = np.concatenate([-ladder[::-1], [0.0], ladder])
    extras = (centers[:, :, None] + scales[:, :, None] * offsets[None, None, :]).reshape(rows, -1)
    nudge = 1e-12 * span  # keep extras off the exact anchor (see _graded_fractions)
    lo_t, hi_t = (anchor + nudge, t) if side == "left" else (t, anchor - nudge)
    extras = np.clip(extras, lo_t, hi_t)

    tau = np.concatenate([np.broadcast_to(base[None, :], (rows, base.size)), extras], axis=1)
    tau = np.sort(tau, axis=1)
    if side == "left":
        tau = tau[:, ::-1]  # rows must run from the singular end toward the anchor
    wts = _mesh_weights(p, side, t, tau)
    return tau, wts


def _mesh_weights(p: FracSpec, side: str, t: float, tau: np.ndarray) -> np.ndarray:
    """Product-trapezoid weights for explicit per-row meshes ordered from the
    singular end (``tau[:, 0] = t``) toward the anchor."""
    beta, sigma, w = p.alpha, p.sigma, p.weight
    c = (sigma - 1.0) / sigma
    pref = sigma ** (-beta)
    gamma_b1 = _gamma(beta + 1.0)
    phit = float(w.phi(np.asarray(t, dtype=float)))
    if side == "left":
        v = phit - np.asarray(w.phi(tau), dtype=float)
    else:
        v = np.asarray(w.phi(tau), dtype=float) - phit
    v = np.maximum(v, 0.0)
    wts = _panel_weights(v, beta, gamma_b1)
    if c != 0.0:
        wts *= np.exp2((c * _LOG2E) * v)
    wts *= pref
    return wts


def _gauss_jacobi_rule_nodes(p: FracSpec, side: str, ts: np.ndarray, q: Quadrature1D):
    beta, sigma, w = p.alpha, p.sigma, p.weight
    x, wj = _jacobi_rule(q.n, round(beta, 12))
    c = (sigma - 1.0) / sigma
    pref = sigma ** (-beta) / _gamma(beta)
    phits = np.asarray(w.phi(ts), dtype=float)
    phi_anchor = float(w.phi(np.asarray(w.lo if side == "left" else w.hi)))
    big_l = np.abs(phits - phi_anchor)

    L = big_l[:, None]
    v = L * (0.5 * (1.0 + x))[None, :]
    u_val = phits[:, None] - v if side == "left" else phits[:, None] + v
    tau = w.inverse(u_val)
    wts = np.broadcast_to(wj[None, :], v.shape).copy()
    if c != 0.0:
        wts *= np.exp2((c * _LOG2E) * v)
    wts *= pref * (L / 2.0) ** beta
    return tau, wts


def _gauss_jacobi_integral(f, p, side, ts, q):
    out = np.empty(ts.shape, dtype=complex)
    chunk = max(1, _CHUNK_ELEMENTS // max(2, q.n))
    for start in range(0, ts.size, chunk):
        sl = slice(start, start + chunk)
        tau, wts = _gauss_jacobi_rule_nodes(p, side, ts[sl], q)
        out[sl] = np.sum(np.asarray(f(tau)) * wts, axis=1)
    return out


def _bisect_inverse(phi, u, lo, hi, iters: int = 80):
    """Vectorized bisection for the inverse of an increasing function."""
    a = np.full(u.shape, lo, dtype=float)
    b = np.full(u.shape, hi, dtype=float)
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = np.asarray(phi(m), dtype=float) < u
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    return 0.5 * (a + b)


def tabulate(fn: Callable, lo: float, hi: float, n: int, grade_toward: Optional[float] = None):
    """Sample ``fn`` once and return a cubic-spline surrogate.

    Composing two fractional operators naively costs one full quadrature per
    node of the outer rule.  Tabulating the inner operator on a fine grid
    first (graded toward ``grade_toward`` when its profile has an algebraic
    endpoint there) reduces the composition to one batched evaluation plus
    cheap interpolation.  A spline is used rather than a broken line because
    compositions near order one differentiate the surrogate pointwise, where
    a broken line's slope error would not average out.
    """
    from scipy.interpolate import CubicSpline

    if grade_toward is None:
        xs = np.linspace(lo, hi, n)
    else:
        # keep the first sample a hair inside the graded end so tabulated
        # fractional integrals carry their one-sided limit, not the exact
        # anchor value (zero) from inside its thin boundary layer
        frac = 1e-12 + (1.0 - 1e-12) * np.linspace(0.0, 1.0, n) ** 3.0
        if abs(grade_toward - lo) <= abs(grade_toward - hi):
            xs = lo + (hi - lo) * frac
        else:
            xs = hi - (hi - lo) * frac[::-1]
    ys = np.asarray(fn(xs)) + 0.0j
    spline = CubicSpline(xs, ys)

    def interp(t):
        t = np.asarray(t, dtype=float)
        return spline(np.clip(t, lo, hi))

    return interp
