"""Trace-direction fractional operators on a bicomplex hyper-rectangle.

A product-type function ``F = f1*E + f2*E'`` on the rectangle is acted on by
four one-dimensional proportional fractional operators, one per real
coordinate (``x1, y1`` in the first component plane, ``x2, y2`` in the
second).  Each acts along the horizontal or vertical line through a fixed
base point ``W``, with the scalar weight obtained by restricting the
product-type weight ``phi`` to that line.  Anchors are the lower rectangle
edges for the ``a+`` side and the upper edges for ``b-``.

On top of the trace integrals and derivatives sit the composition identity
(derivative of integral equals trace sum plus an explicit remainder), the
proportional weighted Cauchy-Riemann operator, and its exponential
factorization through a multiplier ``lambda`` solving a first-order PDE.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EmptyProbesError, UnsupportedWeightsError
from .fracops1d import (
    FracSpec,
    Quadrature1D,
    ScalarWeightFn,
    prop_frac_derivative,
    prop_frac_integral,
    tabulate,
)
from .hypercomplex import BicomplexNumber, HyperbolicNumber, bc_invert
from .weighted_cr import PlaneFunction, ProductFunction, WeightPair


@dataclass(frozen=True)
class RectDomain:
    """Product of two axis-aligned rectangles, one per component plane."""

    a1: float
    b1: float
    c1: float
    d1: float
    a2: float
    b2: float
    c2: float
    d2: float

    def __post_init__(self):
        if not (self.a1 < self.b1 and self.c1 < self.d1 and self.a2 < self.b2 and self.c2 < self.d2):
            raise ValueError("rectangle bounds must satisfy a < b and c < d")

    @classmethod
    def from_pq(cls, P, Q) -> "RectDomain":
        a1, c1, a2, c2 = P
        b1, d1, b2, d2 = Q
        return cls(a1, b1, c1, d1, a2, b2, c2, d2)

    def axis_interval(self, axis: int) -> tuple:
        return (
            (self.a1, self.b1),
            (self.c1, self.d1),
            (self.a2, self.b2),
            (self.c2, self.d2),
        )[axis]

    def contains(self, Z: BicomplexNumber, tol: float = 1e-12) -> bool:
        x1, y1 = np.real(Z.z1), np.imag(Z.z1)
        x2, y2 = np.real(Z.z2), np.imag(Z.z2)
        return bool(
            np.all((x1 >= self.a1 - tol) & (x1 <= self.b1 + tol))
            and np.all((y1 >= self.c1 - tol) & (y1 <= self.d1 + tol))
            and np.all((x2 >= self.a2 - tol) & (x2 <= self.b2 + tol))
            and np.all((y2 >= self.c2 - tol) & (y2 <= self.d2 + tol))
        )

    def point(self, fx1: float, fy1: float, fx2: float, fy2: float) -> BicomplexNumber:
        """Interior point given per-axis fractions in (0, 1)."""
        return BicomplexNumber(
            complex(self.a1 + fx1 * (self.b1 - self.a1), self.c1 + fy1 * (self.d1 - self.c1)),
            complex(self.a2 + fx2 * (self.b2 - self.a2), self.c2 + fy2 * (self.d2 - self.c2)),
        )


@dataclass(frozen=True)
class Phi4:
    """Product-type positive weight ``phi = phi1*E + phi2*E'`` with strictly
    positive partials; restricted to axis lines it yields the scalar weights
    of the four trace directions."""

    comp1: PlaneFunction
    comp2: PlaneFunction

    @classmethod
    def linear(cls) -> "Phi4":
        pf = PlaneFunction(
            f=lambda x, y: x + y,
            dx=lambda x, y: np.ones_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float)),
            dy=lambda x, y: np.ones_like(np.asarray(x, dtype=float) + np.asarray(y, dtype=float)),
        )
        return cls(pf, pf)

    @classmethod
    def fractal(cls, d0: float, d1: float, d2: float, d3: float) -> "Phi4":
        """Components ``x^d + y^d`` (exponents per axis); needs a rectangle in
        the open positive quadrant."""

        def power_pf(dx_exp, dy_exp):
            return PlaneFunction(
                f=lambda x, y: np.asarray(x, dtype=float) ** dx_exp + np.asarray(y, dtype=float) ** dy_exp,
                dx=lambda x, y: dx_exp * np.asarray(x, dtype=float) ** (dx_exp - 1.0)
                + 0.0 * np.asarray(y, dtype=float),
                dy=lambda x, y: dy_exp * np.asarray(y, dtype=float) ** (dy_exp - 1.0)
                + 0.0 * np.asarray(x, dtype=float),
            )

        return cls(power_pf(d0, d1), power_pf(d2, d3))

    def component(self, l: int) -> PlaneFunction:
        return self.comp1 if l == 1 else self.comp2

    def eval4(self, x1, y1, x2, y2) -> tuple:
        return np.real(self.comp1.f(x1, y1)), np.real(self.comp2.f(x2, y2))

    def restriction(self, axis: int, W: BicomplexNumber, rect: RectDomain) -> ScalarWeightFn:
        """Scalar weight along one trace direction through ``W``."""
        lo, hi = rect.axis_interval(axis)
        comp = self.comp1 if axis < 2 else self.comp2
        wz = W.z1 if axis < 2 else W.z2
        if axis % 2 == 0:  # x-direction at fixed height Im(w)
            yw = float(np.imag(wz))
            return ScalarWeightFn(
                phi=lambda t, c=comp, yw=yw: np.real(c.f(t, yw)),
                dphi=lambda t, c=comp, yw=yw: np.real(c.dx(t, yw)),
                lo=lo,
                hi=hi,
            )
        xw = float(np.real(wz))
        return ScalarWeightFn(
            phi=lambda t, c=comp, xw=xw: np.real(c.f(xw, t)),
            dphi=lambda t, c=comp, xw=xw: np.real(c.dy(xw, t)),
            lo=lo,
            hi=hi,
        )

    def validate(self, rect: RectDomain, n: int = 16) -> None:
        for l in (1, 2):
            lo_x, hi_x = rect.axis_interval(0 if l == 1 else 2)
            lo_y, hi_y = rect.axis_interval(1 if l == 1 else 3)
            xs, ys = np.meshgrid(np.linspace(lo_x, hi_x, n), np.linspace(lo_y, hi_y, n))
            comp = self.component(l)
            if not (np.all(np.real(comp.dx(xs, ys)) > 0) and np.all(np.real(comp.dy(xs, ys)) > 0)):
                raise DomainError("weight partials must be strictly positive on the rectangle")


@dataclass(frozen=True)
class FracParams:
    """Orders, proportions, weight, and discretization of the trace operators.

    ``alpha`` and ``sigma_vec`` hold one entry per trace direction in the
    order ``(x1, y1, x2, y2)``.  A proportion entry of ``0`` selects the
    degenerate limit in which that direction's operators are the identity;
    this is how the composite proportion ``(s0 + i*s1)*E + (s2 + i*s3)*E'``
    can equal ``1`` while the live directions stay classical.
    """

    rect: RectDomain
    alpha: tuple
    sigma_vec: tuple
    phi: Phi4
    quadrature: Quadrature1D
    fd_step: Optional[float] = None

    def __post_init__(self):
        if len(self.alpha) != 4 or len(self.sigma_vec) != 4:
            raise ValueError("alpha and sigma_vec must have four entries")
        if not all(0.0 < a < 1.0 for a in self.alpha):
            raise ValueError("fractional orders must lie in (0, 1)")
        if not all(0.0 <= s <= 1.0 for s in self.sigma_vec):
            raise ValueError("proportions must lie in [0, 1]")
        s0, s1, s2, s3 = self.sigma_vec
        if abs(complex(s0, s1)) == 0 or abs(complex(s2, s3)) == 0:
            raise ValueError("composite proportion must be invertible")

    @property
    def sigma(self) -> BicomplexNumber:
        s0, s1, s2, s3 = self.sigma_vec
        return BicomplexNumber(complex(s0, s1), complex(s2, s3))

    @property
    def one_minus_sigma(self) -> BicomplexNumber:
        s = self.sigma
        return BicomplexNumber(1.0 - s.z1, 1.0 - s.z2)

    def fd_for_axis(self, axis: int) -> float:
        if self.fd_step is not None:
            return self.fd_step
        lo, hi = self.rect.axis_interval(axis)
        return (hi - lo) * 1e-4

    def axis_spec(self, axis: int, W: BicomplexNumber, order: Optional[float] = None) -> FracSpec:
        """1-D operator spec along one direction; default order ``1 - alpha``."""
        beta = 1.0 - self.alpha[axis] if order is None else order
        return FracSpec(beta, self.sigma_vec[axis], self.phi.restriction(axis, W, self.rect))


@dataclass(frozen=True)
class LambdaWeights:
    """Exponential multiplier components of the factorization identity."""

    lam1: PlaneFunction
    lam2: PlaneFunction

    def component(self, l: int) -> PlaneFunction:
        return self.lam1 if l == 1 else self.lam2

    @classmethod
    def zero(cls) -> "LambdaWeights":
        z = PlaneFunction.constant(0.0)
        return cls(z, z)


def dphi(phi: Phi4, Z: BicomplexNumber, rect: Optional[RectDomain] = None) -> HyperbolicNumber:
    """Sum of the two partials per component, a strictly positive hyperbolic
    value used to scale the weighted derivative."""
    if rect is not None and not rect.contains(Z):
        raise DomainError("point outside the rectangle")
    x1, y1 = np.real(Z.z1), np.imag(Z.z1)
    x2, y2 = np.real(Z.z2), np.imag(Z.z2)
    return HyperbolicNumber(
        np.real(phi.comp1.dx(x1, y1) + phi.comp1.dy(x1, y1)),
        np.real(phi.comp2.dx(x2, y2) + phi.comp2.dy(x2, y2)),
    )


def _axis_line(F: ProductFunction, W: BicomplexNumber, axis: int) -> Callable:
    comp = F.f1 if axis < 2 else F.f2
    wz = W.z1 if axis < 2 else W.z2
    if axis % 2 == 0:
        yw = float(np.imag(wz))
        return lambda t: comp.f(t, yw)
    xw = float(np.real(wz))
    return lambda t: comp.f(xw, t)


def _axis_coord(Z: BicomplexNumber, axis: int) -> float:
    z = Z.z1 if axis < 2 else Z.z2
    return float(np.real(z)) if axis % 2 == 0 else float(np.imag(z))


def _check_points(p: FracParams, *points) -> None:
    for P in points:
        if not p.rect.contains(P):
            raise DomainError("point outside the rectangle")


def axis_integral(F, W, p: FracParams, side: str, axis: int, targets):
    """Batched trace integral of order ``1 - alpha[axis]`` along one axis."""
    return prop_frac_integral(
        _axis_line(F, W, axis), p.axis_spec(axis, W), side, targets, p.quadrature
    )


def axis_derivative(line: Callable, W, p: FracParams, side: str, axis: int, targets,
                    h: Optional[float] = None):
    """Batched trace derivative of order ``1 - alpha[axis]`` of a line map."""
    return prop_frac_derivative(
        line, p.axis_spec(axis, W), side, targets, p.quadrature,
        h=p.fd_for_axis(axis) if h is None else h,
    )


def trace_integral(F, W: BicomplexNumber, p: FracParams, side: str, Z: BicomplexNumber) -> BicomplexNumber:
    """Four-direction fractional integral ``(I F)(Z, W)`` of order ``1 - alpha``."""
    _check_points(p, Z, W)
    vals = [axis_integral(F, W, p, side, ax, _axis_coord(Z, ax)) for ax in range(4)]
    return BicomplexNumber(vals[0] + vals[1], vals[2] + vals[3])


def trace_derivative(F, W: BicomplexNumber, p: FracParams, side: str, Z: BicomplexNumber) -> BicomplexNumber:
    """Four-direction fractional derivative ``(D F)(Z, W)`` of order ``1 - alpha``."""
    _check_points(p, Z, W)
    vals = [
        axis_derivative(_axis_line(F, W, ax), W, p, side, ax, _axis_coord(Z, ax))
        for ax in range(4)
    ]
    return BicomplexNumber(vals[0] + vals[1], vals[2] + vals[3])


def trace_sum(F: ProductFunction, W: BicomplexNumber, Z: BicomplexNumber) -> BicomplexNumber:
    """Sum of ``F`` along the horizontal and vertical traces through ``W``."""
    x1, y1 = np.real(Z.z1), np.imag(Z.z1)
    x2, y2 = np.real(Z.z2), np.imag(Z.z2)
    return BicomplexNumber(
        F.f1.f(x1, float(np.imag(W.z1))) + F.f1.f(float(np.real(W.z1)), y1),
        F.f2.f(x2, float(np.imag(W.z2))) + F.f2.f(float(np.real(W.z2)), y2),
    )


def _one(t):
    return np.ones_like(np.asarray(t, dtype=float))


def remainder_R(F, W: BicomplexNumber, p: FracParams, Z: BicomplexNumber) -> BicomplexNumber:
    """Cross terms (integral along one direction times derivative of the
    constant one along the other) left over by the composition identity."""
    _check_points(p, Z, W)
    i_vals = [axis_integral(F, W, p, "left", ax, _axis_coord(Z, ax)) for ax in range(4)]
    d_one = [
        axis_derivative(_one, W, p, "left", ax, _axis_coord(Z, ax)) for ax in range(4)
    ]
    e_comp = i_vals[1] * d_one[0] + i_vals[0] * d_one[1]
    edag_comp = i_vals[2] * d_one[3] + i_vals[3] * d_one[2]
    return BicomplexNumber(e_comp, edag_comp)


def compose_derivative_of_integral(F, W, p: FracParams, Z: BicomplexNumber) -> BicomplexNumber:
    """Honest numerical composition: the four-direction derivative applied to
    the map ``Z' -> (I F)(Z', W)``, each direction acting on the trace of
    that map through the current point ``Z``.

    The inner integral is tabulated once per direction on a graded grid of
    the quadrature's resolution, so the composition costs one batched
    quadrature per direction instead of one per outer node.  The outer
    difference step shrinks like ``1/sqrt(n)`` rather than staying at the
    default: differencing across a tabulated integrand amplifies quadrature
    noise by ``1/h``, and this balance keeps both contributions falling
    under refinement.
    """
    _check_points(p, Z, W)
    n_tab = max(256, p.quadrature.n)
    out = []
    for l, (ax_x, ax_y) in ((1, (0, 1)), (2, (2, 3))):
        lo_x, hi_x = p.rect.axis_interval(ax_x)
        lo_y, hi_y = p.rect.axis_interval(ax_y)
        ix = tabulate(
            lambda t, ax=ax_x: axis_integral(F, W, p, "left", ax, t),
            lo_x, hi_x, n_tab, grade_toward=lo_x,
        )
        iy = tabulate(
            lambda t, ax=ax_y: axis_integral(F, W, p, "left", ax, t),
            lo_y, hi_y, n_tab, grade_toward=lo_y,
        )
        cx, cy = _axis_coord(Z, ax_x), _axis_coord(Z, ax_y)
        const_y, const_x = iy(cy), ix(cx)
        h_x = max(p.fd_for_axis(ax_x), 0.05 * (hi_x - lo_x) / np.sqrt(p.quadrature.n))
        h_y = max(p.fd_for_axis(ax_y), 0.05 * (hi_y - lo_y) / np.sqrt(p.quadrature.n))
        dx_val = axis_derivative(lambda t: ix(t) + const_y, W, p, "left", ax_x, cx, h=h_x)
        dy_val = axis_derivative(lambda t: iy(t) + const_x, W, p, "left", ax_y, cy, h=h_y)
        out.append(dx_val + dy_val)
    return BicomplexNumber(out[0], out[1])


def inversion_check(F, W: BicomplexNumber, p: FracParams, Z: BicomplexNumber) -> HyperbolicNumber:
    """Residual of the composition identity: derivative of the integral minus
    the trace sum minus the remainder.  Everything is evaluated numerically,
    so the residual size tracks quadrature plus differencing error."""
    di = compose_derivative_of_integral(F, W, p, Z)
    target = trace_sum(F, W, Z) + remainder_R(F, W, p, Z)
    return (di - target).mod_k()


def _axis_partials(F, W, p: FracParams, side: str, axis: int, coord: float, use_richardson: bool = True):
    """Derivative of the 1-D trace integral at ``coord`` by central
    differences (Richardson-extrapolated when the stencil fits)."""
    lo, hi = p.rect.axis_interval(axis)
    h = p.fd_for_axis(axis)
    if use_richardson and (coord - 2 * h >= lo) and (coord + 2 * h <= hi):
        pts = np.array([coord - 2 * h, coord - h, coord + h, coord + 2 * h])
        g = axis_integral(F, W, p, side, axis, pts)
        d_h = (g[2] - g[1]) / (2 * h)
        d_2h = (g[3] - g[0]) / (4 * h)
        return (4.0 * d_h - d_2h) / 3.0
    xm, xp = max(coord - h, lo), min(coord + h, hi)
    g = axis_integral(F, W, p, side, axis, np.array([xm, xp]))
    return (g[1] - g[0]) / (xp - xm)


def frac_cr_apply(
    F, W: BicomplexNumber, p: FracParams, wp: WeightPair, side: str, Z: BicomplexNumber
) -> BicomplexNumber:
    """Proportional weighted Cauchy-Riemann operator of the trace integral:
    ``(1 - sigma) * (I F) + sigma * (weighted CR of I F) / Dphi``."""
    _check_points(p, Z, W)
    i_vals = [axis_integral(F, W, p, side, ax, _axis_coord(Z, ax)) for ax in range(4)]
    if_val = BicomplexNumber(i_vals[0] + i_vals[1], i_vals[2] + i_vals[3])
    cr = _weighted_cr_of_integral(F, W, p, wp, side, Z)
    dphi_inv = bc_invert(dphi(p.phi, Z).as_bicomplex())
    return p.one_minus_sigma * if_val + p.sigma * cr * dphi_inv


def _weighted_cr_of_integral(F, W, p, wp, side, Z) -> BicomplexNumber:
    comps = []
    for l, (ax_x, ax_y) in ((1, (0, 1)), (2, (2, 3))):
        x, y = _axis_coord(Z, ax_x), _axis_coord(Z, ax_y)
        gx = _axis_partials(F, W, p, side, ax_x, x)
        gy = _axis_partials(F, W, p, side, ax_y, y)
        th_fn, ph_fn = wp.component(l)
        comps.append(th_fn.f(x, y) * gx + ph_fn.f(x, y) * gy)
    return BicomplexNumber(comps[0], comps[1])


def frac_cr_apply_sigma_free(
    F, W: BicomplexNumber, p: FracParams, wp: WeightPair, side: str, Z: BicomplexNumber
) -> BicomplexNumber:
    """Reference path for the degenerate proportion: the weighted CR
    derivative of the trace integral scaled by ``Dphi``, with no proportional
    terms at all.  Matches :func:`frac_cr_apply` when the composite
    proportion equals one."""
    _check_points(p, Z, W)
    cr = _weighted_cr_of_integral(F, W, p, wp, side, Z)
    dphi_inv = bc_invert(dphi(p.phi, Z).as_bicomplex())
    return cr * dphi_inv


def lambda_residual(lam: LambdaWeights, wp: WeightPair, p: FracParams, probes) -> float:
    """Largest pointwise residual of the multiplier PDE
    ``theta * dlam/dx + phi_w * dlam/dy = Dphi * (1 - sigma) / sigma``."""
    probes = list(probes)
    if not probes:
        raise EmptyProbesError("probe list is empty")
    sigma_inv = bc_invert(p.sigma)
    factor = p.one_minus_sigma * sigma_inv
    worst = 0.0
    for P in probes:
        rhs = dphi(p.phi, P).as_bicomplex() * factor
        for l, rhs_c in ((1, rhs.z1), (2, rhs.z2)):
            x, y = _axis_coord(P, 0 if l == 1 else 2), _axis_coord(P, 1 if l == 1 else 3)
            th_fn, ph_fn = wp.component(l)
            lam_fn = lam.component(l)
            lhs = th_fn.f(x, y) * lam_fn.dx(x, y) + ph_fn.f(x, y) * lam_fn.dy(x, y)
            worst = max(worst, float(abs(lhs - rhs_c)))
    return worst


def lambda_for_constant_weights(wp: WeightPair, p: FracParams) -> LambdaWeights:
    """Solve the multiplier PDE for constant weights and constant ``Dphi``
    with the particular solution linear in ``x``."""
    if wp.const_values is None:
        raise UnsupportedWeightsError("multiplier construction needs constant weights")
    if p.sigma.z1 == 1 and p.sigma.z2 == 1:
        return LambdaWeights.zero()
    center = p.rect.point(0.5, 0.5, 0.5, 0.5)
    corner = p.rect.point(0.1, 0.9, 0.9, 0.1)
    d_center, d_corner = dphi(p.phi, center), dphi(p.phi, corner)
    if abs(d_center.l1 - d_corner.l1) > 1e-10 or abs(d_center.l2 - d_corner.l2) > 1e-10:
        raise UnsupportedWeightsError(
            "multiplier construction needs constant Dphi (linear weight preset)"
        )
    factor = p.one_minus_sigma * bc_invert(p.sigma)
    rhs = d_center.as_bicomplex() * factor
    th1, ph1, th2, ph2 = wp.const_values
    comps = []
    for rhs_c, th in ((rhs.z1, th1), (rhs.z2, th2)):
        slope = rhs_c / th
        comps.append(
            PlaneFunction(
                f=lambda x, y, s=slope: s * x + 0.0 * np.asarray(y, dtype=float),
                dx=lambda x, y, s=slope: s * _one(x) * _one(y),
                dy=lambda x, y: 0j * np.asarray(x, dtype=float) * _one(y),
            )
        )
    return LambdaWeights(comps[0], comps[1])


def factorization_check(
    F,
    W: BicomplexNumber,
    p: FracParams,
    wp: WeightPair,
    lam: LambdaWeights,
    side: str,
    Z: BicomplexNumber,
) -> HyperbolicNumber:
    """Residual between the proportional weighted CR operator and its
    exponential factorization ``exp(-lambda) * Dphi^{-1} * sigma *
    (weighted CR of exp(lambda) * I F)``."""
    lhs = frac_cr_apply(F, W, p, wp, side, Z)

    comps = []
    for l, (ax_x, ax_y) in ((1, (0, 1)), (2, (2, 3))):
        x, y = _axis_coord(Z, ax_x), _axis_coord(Z, ax_y)
        lam_fn = lam.component(l)
        th_fn, ph_fn = wp.component(l)
        h = p.fd_for_axis(ax_x)
        lo_x, hi_x = p.rect.axis_interval(ax_x)
        lo_y, hi_y = p.rect.axis_interval(ax_y)
        xm, xp = max(x - h, lo_x), min(x + h, hi_x)
        hy = p.fd_for_axis(ax_y)
        ym, yp = max(y - hy, lo_y), min(y + hy, hi_y)

        ix = axis_integral(F, W, p, side, ax_x, np.array([xm, xp, x]))
        iy = axis_integral(F, W, p, side, ax_y, np.array([ym, yp, y]))

        def m_val(xx, yy, ix_v, iy_v):
            return np.exp(lam_fn.f(xx, yy)) * (ix_v + iy_v)

        dmx = (m_val(xp, y, ix[1], iy[2]) - m_val(xm, y, ix[0], iy[2])) / (xp - xm)
        dmy = (m_val(x, yp, ix[2], iy[1]) - m_val(x, ym, ix[2], iy[0])) / (yp - ym)
        cr_m = th_fn.f(x, y) * dmx + ph_fn.f(x, y) * dmy
        comps.append(np.exp(-lam_fn.f(x, y)) * cr_m)

    cr_part = BicomplexNumber(comps[0], comps[1])
    rhs = p.sigma * bc_invert(dphi(p.phi, Z).as_bicomplex()) * cr_part
    return (lhs - rhs).mod_k()
