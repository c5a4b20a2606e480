"""Exact geometric and spectral constants for balls and axis-aligned boxes.

All domains are centered at the origin (the problems are translation
invariant, so this loses no generality).  The quantities computed here are
the ingredients of the non-existence and uniqueness thresholds: the best
Poincare constant C_P = 1/lambda_1, the star-shape constant
alpha = inf_{boundary} x.nu, and the measures |Omega|, |dOmega|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class GeometryError(ValueError):
    """Invalid or unsupported domain description."""


@dataclass(frozen=True)
class DomainGeometry:
    """A ball of given radius or a box with given half-sides, in dimension d >= 2.

    kind is "ball" or "box".  For a ball, ``radius`` is set; for a box,
    ``half_sides`` holds the d half-side lengths.
    """

    kind: str
    d: int
    radius: float | None = None
    half_sides: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.d < 2:
            raise GeometryError(f"dimension must be >= 2, got {self.d}")
        if self.kind == "ball":
            if self.radius is None or not self.radius > 0:
                raise GeometryError("ball needs a positive radius")
        elif self.kind == "box":
            if len(self.half_sides) != self.d:
                raise GeometryError(
                    f"box needs {self.d} half-sides, got {len(self.half_sides)}"
                )
            if not all(h > 0 for h in self.half_sides):
                raise GeometryError("box half-sides must be positive")
        else:
            raise GeometryError(f"unsupported domain kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "ball":
            return f"ball(d={self.d}, R={self.radius:g})"
        sides = ",".join(f"{h:g}" for h in self.half_sides)
        return f"box(d={self.d}, h=({sides}))"


def ball(d: int, radius: float = 1.0) -> DomainGeometry:
    return DomainGeometry(kind="ball", d=d, radius=float(radius))


def box(half_sides) -> DomainGeometry:
    hs = tuple(float(h) for h in half_sides)
    return DomainGeometry(kind="box", d=len(hs), half_sides=hs)


# -- Bessel J_nu and its first zero ------------------------------------------
#
# The ascending series is used directly: on [0, 12] the truncation error with
# 80 terms is far below 1e-14, so plain bisection on the series gives the
# zero to full precision without a special-function dependency.

_SERIES_TERMS = 80


def _bessel_j(nu: float, x: float) -> float:
    half = 0.5 * x
    # log of the k = 0 term; the remaining terms follow by recurrence.
    log_t0 = nu * math.log(half) - math.lgamma(nu + 1.0) if x > 0 else None
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    term = math.exp(log_t0)
    total = term
    q = half * half
    for k in range(1, _SERIES_TERMS):
        term *= -q / (k * (nu + k))
        total += term
        if abs(term) < 1e-18 * abs(total) + 1e-300:
            break
    return total


def bessel_first_zero(nu: float) -> float:
    """First positive zero of the Bessel function J_nu, nu >= 0.

    Bracketing scan followed by bisection on the ascending series; the
    result is accurate to ~1e-12 relative.
    """
    if nu < 0:
        raise GeometryError(f"nu must be >= 0, got {nu}")
    # j_{nu,1} ~ nu + 1.8557*nu^(1/3) + ... ; scan from just above the origin.
    lo = max(nu, 1e-3)
    hi = nu + 4.0 * nu ** (1.0 / 3.0) + 4.0 if nu > 0 else 4.0
    step = 0.05
    x_prev, f_prev = lo, _bessel_j(nu, lo)
    x = lo
    bracket = None
    while x < hi + step:
        x += step
        f = _bessel_j(nu, x)
        if f_prev > 0.0 >= f:
            bracket = (x_prev, x)
            break
        x_prev, f_prev = x, f
    if bracket is None:
        raise GeometryError(f"failed to bracket the first zero of J_{nu}")
    a, b = bracket
    for _ in range(100):
        m = 0.5 * (a + b)
        if _bessel_j(nu, m) > 0.0:
            a = m
        else:
            b = m
        if b - a < 1e-13 * b:
            break
    return 0.5 * (a + b)


# -- spectral and geometric constants ----------------------------------------

def first_dirichlet_eigenvalue(geom: DomainGeometry) -> float:
    if geom.kind == "ball":
        j = bessel_first_zero(geom.d / 2.0 - 1.0)
        return (j / geom.radius) ** 2
    if geom.kind == "box":
        return sum((math.pi / (2.0 * h)) ** 2 for h in geom.half_sides)
    raise GeometryError(f"unsupported domain kind {geom.kind!r}")


def poincare_constant(geom: DomainGeometry) -> float:
    """Best constant C_P in int u^2 <= C_P int |grad u|^2 over H^1_0."""
    return 1.0 / first_dirichlet_eigenvalue(geom)


def star_shape_alpha(geom: DomainGeometry) -> float:
    """inf over the boundary of x.nu(x): R for a ball, min half-side for a box."""
    if geom.kind == "ball":
        return geom.radius
    return min(geom.half_sides)


def unit_sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def measures(geom: DomainGeometry) -> tuple[float, float]:
    """(volume, boundary surface area) of the domain."""
    if geom.kind == "ball":
        omega = unit_sphere_area(geom.d)
        r = geom.radius
        return omega * r ** geom.d / geom.d, omega * r ** (geom.d - 1)
    vol = 1.0
    for h in geom.half_sides:
        vol *= 2.0 * h
    surf = sum(2.0 * vol / (2.0 * h) for h in geom.half_sides)
    return vol, surf
