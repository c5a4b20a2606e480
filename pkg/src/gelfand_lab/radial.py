"""Shooting solver and branch machinery for the four problems on balls.

The multiplicative problem is solved by the scaling trick: shoot the
lambda-free profile from amplitude a, find its first zero s0, and read off
lambda = s0^2 (after the amplitude rescaling of ``_shoot`` this becomes
lambda = exp(2 x_event - log f(a))).  The additive problem cannot be scaled
this way, so the amplitude matching s0(a; mu) = R is root-found along the
minimal branch.

All integrals over a solution (kappa, mass, Dirichlet energy, the
Pohozaev volume terms) are composite Gauss-Legendre sums over the
integrator's own accepted steps, evaluated on the step interpolants in the
log-radius variable.  Integrands are assembled in log scale, so branch
points deep in the singular regime (exponential amplitudes ~1e4) neither
overflow nor lose the thin core of the profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from . import _shoot
from ._fermi import fd_log_f
from .geometry import unit_sphere_area
from .nonlinearity import (
    Exponential,
    FermiDirac,
    NonlinearitySpec,
    PurePower,
    ShiftedPower,
)


class ShootingError(RuntimeError):
    """The radial IVP could not be driven to a first zero."""


class NoSolutionError(RuntimeError):
    """No amplitude/parameter matches the requested target."""


@dataclass(frozen=True)
class SolverOptions:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = 0.25


DEFAULT_OPTIONS = SolverOptions()

# problem tags ----------------------------------------------------------------


@dataclass(frozen=True)
class MultLocal:
    lam: float


@dataclass(frozen=True)
class AddLocal:
    mu: float


@dataclass(frozen=True)
class MultNonLocal:
    kappa: float


@dataclass(frozen=True)
class AddNonLocal:
    mass: float
    mu: float


@dataclass
class BranchPoint:
    a: float
    lam: float
    kappa: Optional[float] = None
    mass: Optional[float] = None
    mu: Optional[float] = None
    sup_norm: Optional[float] = None
    boundary_flux: Optional[float] = None
    note: str = ""


# -- forcing parameters for the jit core ---------------------------------------

_EMPTY = np.empty(0)
_EMPTY_C = np.empty((4, 0))
_FD_SPLINE_CACHE: dict = {}


def _fermi_spline(delta: float, lo: float, hi: float):
    """Cached cubic spline of log f_delta on a bucketed interval [lo, hi]."""
    lo_b = max(8.0 * math.floor(lo / 8.0), -1024.0)
    hi_b = 8.0 * math.ceil(hi / 8.0) + 8.0
    key = (delta, lo_b, hi_b)
    hit = _FD_SPLINE_CACHE.get(key)
    if hit is not None:
        return hit
    pieces = []
    if lo_b < -60.0:
        pieces.append(np.arange(lo_b, -60.0, 2.0))
    mid_lo, mid_hi = max(lo_b, -60.0), min(hi_b, 60.0)
    pieces.append(np.arange(mid_lo, mid_hi, 0.02))
    if hi_b > 60.0:
        n = int(math.ceil(math.log(hi_b / 60.0) / 0.01)) + 1
        pieces.append(np.geomspace(60.0, hi_b, n))
    knots = np.unique(np.concatenate(pieces + [np.array([hi_b])]))
    vals = fd_log_f(delta, knots)
    spl = CubicSpline(knots, vals)
    out = (spl.x, spl.c)
    _FD_SPLINE_CACHE[key] = out
    return out


def _forcing(spec: NonlinearitySpec, A: float, depth: float):
    """(code, pa, pb, pc, sx, sc, phi) with phi = log f(A)."""
    if isinstance(spec, Exponential):
        return _shoot.CODE_EXP, 0.0, 0.0, 0.0, _EMPTY, _EMPTY_C, A
    if isinstance(spec, ShiftedPower):
        base = 1.0 + A
        if base <= 0.0:
            raise ValueError(f"profile argument {A} at or below -1")
        lb = math.log(base)
        return _shoot.CODE_POWER, base, spec.p, lb, _EMPTY, _EMPTY_C, spec.p * lb
    if isinstance(spec, PurePower):
        if A <= 0.0:
            raise ValueError(f"profile argument {A} at or below 0")
        la = math.log(A)
        return _shoot.CODE_POWER, A, spec.p, la, _EMPTY, _EMPTY_C, spec.p * la
    if isinstance(spec, FermiDirac):
        sx, sc = _fermi_spline(spec.delta, A - 1.25 * depth - 5.0, A + 5.0)
        phi = fd_log_f(spec.delta, A)
        return _shoot.CODE_FERMI, A, phi, 0.0, sx, sc, phi
    raise TypeError(f"unsupported nonlinearity {spec!r}")


# -- the shot and its quadratures ----------------------------------------------

_GL8_NODES, _GL8_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL8_THETA = 0.5 * (_GL8_NODES + 1.0)  # on [0, 1]


@dataclass
class _Shot:
    """One integrated radial profile in scaled log-radius variables."""

    spec: NonlinearitySpec
    d: int
    a: float
    shift: float  # 0.0 for the multiplicative problems
    A: float
    phi: float  # log f(A)
    x_ev: float
    xs: np.ndarray
    vs: np.ndarray
    vxs: np.ndarray
    hs: np.ndarray
    ks: np.ndarray
    _samples: Optional[tuple] = field(default=None, repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.hs)

    @property
    def log_s0(self) -> float:
        return self.x_ev - 0.5 * self.phi

    @property
    def s0(self) -> float:
        return math.exp(self.log_s0)

    def vx_at_event(self) -> float:
        i = self.n_steps - 1
        theta = (self.x_ev - self.xs[i]) / self.hs[i]
        y0 = np.array([self.vs[i], self.vxs[i]])
        return float(_shoot.dense_eval(self.xs[i], self.hs[i], y0, self.ks[i], theta)[0, 1])

    def quad_samples(self):
        """(x, v, vx, w) Gauss-Legendre samples over all steps up to x_ev."""
        if self._samples is not None:
            return self._samples
        i_ev = self.n_steps - 1
        th_ev = (self.x_ev - self.xs[i_ev]) / self.hs[i_ev]
        x0 = self.xs[:-1]
        h = self.hs.copy()
        # final step only runs to the event
        h[i_ev] *= th_ev
        theta_full = _GL8_THETA[None, :] * (h / self.hs)[:, None]
        powers = np.stack(
            [theta_full, theta_full**2, theta_full**3, theta_full**4], axis=-1
        )  # (n, 8, 4)
        q = np.einsum("kj,ngj->ngk", _shoot.DENSE_P.T, powers)  # wrong orient fix below
        # dense: y = y0 + h_step * sum_k K[k,:] * (P @ [th..])_k
        poly = np.einsum("kj,ngj->nkg", _shoot.DENSE_P, powers)  # (n, 7, 8)
        y0 = np.stack([self.vs[:-1], self.vxs[:-1]], axis=-1)  # (n, 2)
        vals = y0[:, None, :] + self.hs[:, None, None] * np.einsum(
            "nkc,nkg->ngc", self.ks, poly
        )
        x = (x0[:, None] + theta_full * self.hs[:, None]).ravel()
        v = vals[..., 0].ravel()
        vx = vals[..., 1].ravel()
        w = (0.5 * h[:, None] * _GL8_WEIGHTS[None, :]).ravel()
        self._samples = (x, v, vx, w)
        return self._samples


def _integrate_shot(spec, d, a, shift, options: SolverOptions) -> _Shot:
    A = a + shift
    code, pa, pb, pc, sx, sc, phi = _forcing(spec, A, depth=a)
    x_cap = math.log(_shoot.S_CAP) + 0.5 * phi
    status, x_ev, n, xs, vs, vxs, hs, ks = _shoot.integrate(
        code, pa, pb, pc, sx, sc, float(d), float(a), x_cap,
        options.rtol, options.atol, options.max_step,
    )
    if status == _shoot.STATUS_NO_ZERO:
        raise ShootingError(
            f"profile from a={a:g} (shift {shift:g}) has no zero before s={_shoot.S_CAP:g}"
        )
    if status != _shoot.STATUS_EVENT:
        raise ShootingError(f"step limit exceeded for a={a:g} (shift {shift:g})")
    return _Shot(spec, d, a, shift, A, phi, x_ev, xs, vs, vxs, hs, ks)


# -- solutions -------------------------------------------------------------------

_GRID_SUBDIV = 4
_GRID_R_FLOOR = 1e-12


@dataclass
class RadialSolution:
    """A radial profile on the ball of radius R with its problem tag.

    grid/u/uprime are built lazily from the integrator steps (4 dense
    samples per accepted step, radii below 1e-12 R dropped, center and
    boundary included exactly).
    """

    spec: NonlinearitySpec
    d: int
    R: float
    amplitude: float
    problem: object
    shift: float = 0.0
    _shot: Optional[_Shot] = field(default=None, repr=False)
    _grid: Optional[np.ndarray] = field(default=None, repr=False)
    _u: Optional[np.ndarray] = field(default=None, repr=False)
    _uprime: Optional[np.ndarray] = field(default=None, repr=False)

    def _build_grid(self):
        if self._grid is not None:
            return
        shot = self._shot
        thetas = np.arange(1, _GRID_SUBDIV + 1) / _GRID_SUBDIV
        powers = np.stack([thetas, thetas**2, thetas**3, thetas**4], axis=-1)
        poly = np.einsum("kj,gj->kg", _shoot.DENSE_P, powers)  # (7, s)
        y0 = np.stack([shot.vs[:-1], shot.vxs[:-1]], axis=-1)
        vals = y0[:, None, :] + shot.hs[:, None, None] * np.einsum(
            "nkc,kg->ngc", shot.ks, poly
        )
        x = (shot.xs[:-1, None] + thetas[None, :] * shot.hs[:, None]).ravel()
        v = vals[..., 0].ravel()
        vx = vals[..., 1].ravel()
        x = np.concatenate([shot.xs[:1], x])
        v = np.concatenate([shot.vs[:1], v])
        vx = np.concatenate([shot.vxs[:1], vx])
        keep = x < shot.x_ev
        x, v, vx = x[keep], v[keep], vx[keep]
        r = self.R * np.exp(x - shot.x_ev)
        keep = r > _GRID_R_FLOOR * self.R
        r, v, vx = r[keep], v[keep], vx[keep]
        u = self.amplitude + v
        up = vx / r
        # exact center and boundary values
        r = np.concatenate([[0.0], r, [self.R]])
        u = np.concatenate([[self.amplitude], u, [0.0]])
        up = np.concatenate([[0.0], up, [shot.vx_at_event() / self.R]])
        self._grid, self._u, self._uprime = r, u, up

    @property
    def grid(self) -> np.ndarray:
        self._build_grid()
        return self._grid

    @property
    def u(self) -> np.ndarray:
        self._build_grid()
        return self._u

    @property
    def uprime(self) -> np.ndarray:
        self._build_grid()
        return self._uprime

    def interpolant(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.grid, self.u, self.uprime)

    def boundary_flux(self) -> float:
        """Total outward flux -int_boundary grad u . nu = -|S^(d-1)| R^(d-1) u'(R)."""
        omega = unit_sphere_area(self.d)
        if self._shot is not None:
            up_R = self._shot.vx_at_event() / self.R
        else:
            up_R = self._uprime[-1]
        return -omega * self.R ** (self.d - 1) * up_R


def _with_problem(sol: RadialSolution, problem) -> RadialSolution:
    return replace(sol, problem=problem)


# -- integrals over solutions ----------------------------------------------------

def radial_integral(sol: RadialSolution, kind: str) -> float:
    """int_0^R phi(u, u') r^(d-1) dr for the solution's own nonlinearity.

    kind: "f"          f(u + shift)
          "uf"         u f(u + shift)
          "F_zero"     F(u) with F(0) = 0            (multiplicative identities)
          "Fdiff"      F(u + shift) - F(shift), F(mu_bar) = 0   (additive ones)
          "gradsq"     |u'|^2

    The result excludes the |S^(d-1)| factor.
    """
    if sol._shot is not None:
        return _integral_dense(sol, kind)
    return _integral_hermite(sol, kind)


def _integral_dense(sol: RadialSolution, kind: str) -> float:
    shot = sol._shot
    d = sol.d
    x, v, vx, w = shot.quad_samples()
    log_jac = d * (x - shot.x_ev) + d * math.log(sol.R)
    spec = sol.spec
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if kind == "gradsq":
            vals = vx**2 * np.exp((d - 2.0) * (x - shot.x_ev)) * sol.R ** (d - 2)
            return float(np.sum(vals * w))
        z = shot.A + v  # profile argument of f
        if kind == "f":
            expo = spec.log_f(z) + log_jac
            return float(np.sum(np.exp(expo) * w))
        if kind == "uf":
            u = shot.a + v
            expo = spec.log_f(z) + np.log(np.maximum(u, 0.0)) + log_jac
            return float(np.sum(np.exp(expo) * w))
        if kind == "F_zero":
            u = np.maximum(shot.a + v, 0.0)
            expo = np.where(u > 0.0, spec.log_F(u, "at_zero") + log_jac, -np.inf)
            return float(np.sum(np.exp(expo) * w))
        if kind == "Fdiff":
            Fz = spec.F(z, "at_mubar")
            Fmu = spec.F(np.asarray(shot.shift, dtype=float), "at_mubar")
            vals = (Fz - Fmu) * np.exp(log_jac)
            return float(np.sum(vals * w))
    raise ValueError(f"unknown integral kind {kind!r}")


def _integral_hermite(sol: RadialSolution, kind: str) -> float:
    # fallback for profiles without integrator data (e.g. perturbed ones)
    r_edges = sol.grid
    spline = sol.interpolant()
    dspline = spline.derivative()
    mid = r_edges[:-1, None] + np.diff(r_edges)[:, None] * _GL8_THETA[None, :]
    w = 0.5 * np.diff(r_edges)[:, None] * _GL8_WEIGHTS[None, :]
    r = mid.ravel()
    w = w.ravel()
    u = spline(r)
    up = dspline(r)
    spec = sol.spec
    jac = r ** (sol.d - 1)
    if kind == "gradsq":
        vals = up**2
    elif kind == "f":
        vals = spec.f(u + sol.shift)
    elif kind == "uf":
        vals = u * spec.f(u + sol.shift)
    elif kind == "F_zero":
        vals = spec.F(np.maximum(u, 0.0), "at_zero")
    elif kind == "Fdiff":
        vals = spec.F(u + sol.shift, "at_mubar") - spec.F(
            np.asarray(sol.shift, dtype=float), "at_mubar"
        )
    else:
        raise ValueError(f"unknown integral kind {kind!r}")
    return float(np.sum(vals * jac * w))


# -- public operations -------------------------------------------------------------

def shoot_profile(
    spec: NonlinearitySpec,
    d: int,
    a: float,
    shift: float | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
):
    """First zero s0 of the radial profile and the profile itself.

    Integrates w'' + (d-1)/s w' + f(w + shift) = 0 from w(0) = a > 0 until
    the first zero s0, located to ~1e-12 relative; returns (s0, profile)
    where the profile is a RadialSolution on the ball of radius s0 with no
    problem tag.
    """
    if not a > 0.0:
        raise ValueError(f"amplitude must be positive, got {a}")
    sh = 0.0 if shift is None else float(shift)
    if sh + a <= spec.mu_bar:
        raise ValueError(f"center argument {sh + a} at or below mu_bar={spec.mu_bar}")
    shot = _integrate_shot(spec, d, a, sh, options)
    sol = RadialSolution(
        spec=spec, d=d, R=shot.s0, amplitude=a, problem=None, shift=sh, _shot=shot
    )
    return shot.s0, sol


def solve_mult_local(
    spec: NonlinearitySpec,
    d: int,
    a: float,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> RadialSolution:
    """Solution of Laplace(u) + lambda f(u) = 0 on the unit ball with u(0) = a.

    lambda = s0^2 by the scaling symmetry of the lambda-free shot.
    """
    if not a > 0.0:
        raise ValueError(f"amplitude must be positive, got {a}")
    shot = _integrate_shot(spec, d, a, 0.0, options)
    lam = math.exp(2.0 * shot.x_ev - shot.phi)
    return RadialSolution(
        spec=spec, d=d, R=1.0, amplitude=a, problem=MultLocal(lam), shift=0.0, _shot=shot
    )


def _log_s0(spec, d, a, mu, options) -> float:
    shot = _integrate_shot(spec, d, a, mu, options)
    return shot.log_s0


def solve_add_local(
    spec: NonlinearitySpec,
    d: int,
    R: float,
    mu: float,
    options: SolverOptions = DEFAULT_OPTIONS,
    a_bounds: tuple[float, float] = (1e-14, 1e6),
) -> RadialSolution:
    """Minimal-branch solution of Laplace(u) + f(u + mu) = 0 on the R-ball.

    The amplitude is the first crossing of s0(a; mu) = R on a log grid,
    refined by Brent's method; if R is not attainable the scanned range of
    s0 is reported.
    """
    if mu <= spec.mu_bar:
        raise ValueError(f"mu must exceed mu_bar={spec.mu_bar}, got {mu}")
    target = math.log(R)
    grid = np.geomspace(a_bounds[0], a_bounds[1], 161)
    prev_a = None
    prev_gap = None
    attained = -math.inf
    bracket = None
    for a in grid:
        try:
            gap = _log_s0(spec, d, float(a), mu, options) - target
        except ShootingError:
            break
        attained = max(attained, gap + target)
        if gap >= 0.0:
            if prev_a is None:
                raise NoSolutionError(
                    f"s0 already exceeds R={R:g} at the smallest scanned amplitude"
                )
            bracket = (prev_a, float(a))
            break
        prev_a, prev_gap = float(a), gap
    if bracket is None:
        raise NoSolutionError(
            f"R={R:g} outside the attainable first-zero range "
            f"(max s0 on the scanned minimal branch: {math.exp(attained):g})"
        )
    a_star = brentq(
        lambda aa: _log_s0(spec, d, aa, mu, options) - target,
        bracket[0],
        bracket[1],
        xtol=1e-300,
        rtol=4e-16,
    )
    shot = _integrate_shot(spec, d, a_star, mu, options)
    return RadialSolution(
        spec=spec, d=d, R=R, amplitude=a_star, problem=AddLocal(mu), shift=mu, _shot=shot
    )


def compute_kappa(sol: RadialSolution) -> float:
    """kappa = lambda int_Omega f(u) dx by quadrature on the solution."""
    if not isinstance(sol.problem, (MultLocal, MultNonLocal)):
        raise ValueError("kappa is defined for the multiplicative problems")
    lam = (
        sol.problem.lam
        if isinstance(sol.problem, MultLocal)
        else _lambda_of(sol)
    )
    omega = unit_sphere_area(sol.d)
    return lam * omega * radial_integral(sol, "f")


def _lambda_of(sol: RadialSolution) -> float:
    if isinstance(sol.problem, MultLocal):
        return sol.problem.lam
    shot = sol._shot
    return math.exp(2.0 * shot.x_ev - shot.phi)


def compute_mass(sol: RadialSolution) -> float:
    """M = int_Omega f(u + mu) dx by quadrature on the solution."""
    if not isinstance(sol.problem, (AddLocal, AddNonLocal)):
        raise ValueError("mass is defined for the additive problems")
    omega = unit_sphere_area(sol.d)
    return omega * radial_integral(sol, "f")


def sweep_branch(
    spec: NonlinearitySpec,
    d: int,
    amplitudes,
    options: SolverOptions = DEFAULT_OPTIONS,
    jobs: int = 1,
) -> list[BranchPoint]:
    """One branch point per amplitude of the multiplicative problem.

    Failed amplitudes yield a point with NaN lambda and a note instead of
    aborting the sweep.  For the exponential family the additive non-local
    mass coincides with kappa and is filled in; it is left empty otherwise.
    """
    amps = [float(a) for a in amplitudes]
    if not amps:
        raise ValueError("empty amplitude list")
    if any(b <= a for a, b in zip(amps, amps[1:])):
        raise ValueError("amplitudes must be strictly increasing")

    def one(a: float) -> BranchPoint:
        try:
            sol = solve_mult_local(spec, d, a, options)
        except ShootingError as err:
            return BranchPoint(a=a, lam=math.nan, note=str(err))
        if sol.spec.f(a) > 1e300:
            return BranchPoint(a=a, lam=math.nan, note="f(a) beyond overflow threshold")
        kappa = compute_kappa(sol)
        flux = sol.boundary_flux()
        mass = kappa if isinstance(spec, Exponential) else None
        return BranchPoint(
            a=a,
            lam=sol.problem.lam,
            kappa=kappa,
            mass=mass,
            mu=None,
            sup_norm=a,
            boundary_flux=flux,
        )

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, amps))
    return [one(a) for a in amps]


def sweep_additive_branch(
    spec: NonlinearitySpec,
    d: int,
    R: float,
    mus,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[BranchPoint]:
    """Minimal-branch points of the additive problem over a mu grid."""
    points = []
    for mu in mus:
        mu = float(mu)
        try:
            sol = solve_add_local(spec, d, R, mu, options)
        except (NoSolutionError, ShootingError) as err:
            points.append(BranchPoint(a=math.nan, lam=math.nan, mu=mu, note=str(err)))
            continue
        mass = compute_mass(sol)
        points.append(
            BranchPoint(
                a=sol.amplitude,
                lam=math.nan,
                kappa=mass if isinstance(spec, Exponential) else None,
                mass=mass,
                mu=mu,
                sup_norm=sol.amplitude,
                boundary_flux=sol.boundary_flux(),
            )
        )
    return points


# -- lambda sweeps, counting, non-local inversion -----------------------------------

_SWEEP_CACHE: dict = {}


def _lambda_sweep(spec, d, a_range, samples, options):
    key = (spec, d, a_range, samples, options)
    hit = _SWEEP_CACHE.get(key)
    if hit is not None:
        return hit
    amps = np.geomspace(a_range[0], a_range[1], samples)
    lams = np.empty_like(amps)
    fluxes = np.empty_like(amps)
    for i, a in enumerate(amps):
        try:
            shot = _integrate_shot(spec, d, float(a), 0.0, options)
            lams[i] = math.exp(2.0 * shot.x_ev - shot.phi)
            fluxes[i] = -unit_sphere_area(d) * shot.vx_at_event()
        except ShootingError:
            lams[i] = math.nan
            fluxes[i] = math.nan
    _SWEEP_CACHE[key] = (amps, lams, fluxes)
    return amps, lams, fluxes


@dataclass
class CountResult:
    count: int
    roots: list[float]
    tangency: list[bool]

    def __iter__(self):  # (count, roots) unpacking
        yield self.count
        yield self.roots


def count_solutions(
    spec: NonlinearitySpec,
    d: int,
    lam: float,
    a_range: tuple[float, float] = (1e-4, 1e4),
    samples: int = 4096,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> CountResult:
    """Number (and amplitudes) of radial solutions with multiplier lam.

    Sign changes of lambda(a) - lam on a log-spaced sweep are refined by
    bisection.  Roots where |d lambda/da| is tiny are flagged as tangencies
    (the count is uncertain exactly at a fold).
    """
    if samples < 16:
        raise ValueError("need at least 16 sweep samples")
    amps, lams, _ = _lambda_sweep(spec, d, a_range, samples, options)
    sign = np.sign(lams - lam)
    roots = []
    flags = []

    def lam_of(a: float) -> float:
        shot = _integrate_shot(spec, d, a, 0.0, options)
        return math.exp(2.0 * shot.x_ev - shot.phi)

    for i in range(len(amps) - 1):
        s0, s1 = sign[i], sign[i + 1]
        if math.isnan(s0) or math.isnan(s1):
            continue
        if s0 == 0.0:
            roots.append(float(amps[i]))
            flags.append(False)
            continue
        if s0 * s1 < 0.0:
            root = brentq(
                lambda aa: lam_of(aa) - lam, amps[i], amps[i + 1], xtol=1e-300, rtol=4e-16
            )
            roots.append(float(root))
            # tangency check: local slope of lambda(a) at the root
            da = root * 1e-6
            slope = (lam_of(root + da) - lam_of(root - da)) / (2.0 * da)
            flags.append(abs(slope) < 1e-8)
    return CountResult(count=len(roots), roots=roots, tangency=flags)


def solve_nonlocal_mult(
    spec: NonlinearitySpec,
    d: int,
    kappa: float,
    a_range: tuple[float, float] = (1e-4, 1e4),
    samples: int = 4096,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[RadialSolution]:
    """All radial solutions of the kappa-constrained multiplicative problem.

    kappa(a) equals the boundary flux along the sweep (exactly, by the
    divergence theorem), which makes the scan cheap; each returned solution
    carries the quadrature-checked kappa tag.
    """
    if not kappa > 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    amps, _, fluxes = _lambda_sweep(spec, d, a_range, samples, options)

    def kappa_of(a: float) -> float:
        shot = _integrate_shot(spec, d, a, 0.0, options)
        return -unit_sphere_area(d) * shot.vx_at_event()

    sols = []
    sign = np.sign(fluxes - kappa)
    for i in range(len(amps) - 1):
        s0, s1 = sign[i], sign[i + 1]
        if math.isnan(s0) or math.isnan(s1):
            continue
        if s0 == 0.0:
            root = float(amps[i])
        elif s0 * s1 < 0.0:
            root = brentq(
                lambda aa: kappa_of(aa) - kappa, amps[i], amps[i + 1], xtol=1e-300, rtol=4e-16
            )
        else:
            continue
        sol = solve_mult_local(spec, d, float(root), options)
        sols.append(_with_problem(sol, MultNonLocal(kappa)))
    return sols


def solve_nonlocal_add(
    spec: NonlinearitySpec,
    d: int,
    R: float,
    mass: float,
    mu_hi: float | None = None,
    samples: int = 48,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[tuple[RadialSolution, float]]:
    """Minimal-branch solutions of the mass-constrained additive problem.

    Scans M(mu) along the minimal branch, refines the crossings M(mu) =
    mass, and keeps only roots satisfying the a-priori bound
    mu < f^(-1)(M/|Omega|) that holds for increasing nonlinearities.
    """
    if not mass > 0.0:
        raise ValueError(f"mass must be positive, got {mass}")

    def mass_of(mu: float) -> float:
        return compute_mass(
            _with_problem(solve_add_local(spec, d, R, mu, options), AddLocal(mu))
        )

    # scan bounds: walk mu down until the branch mass falls below the target
    if mu_hi is None:
        mu_hi = spec.mu_bar + 8.0 if math.isfinite(spec.mu_bar) else 8.0
    mu_lo = spec.mu_bar + 1e-8 if math.isfinite(spec.mu_bar) else -1.0

    def safe_mass(mu: float) -> float:
        try:
            return mass_of(mu)
        except (NoSolutionError, ShootingError):
            return math.nan

    while math.isfinite(spec.mu_bar) is False and mu_lo > -600.0:
        m = safe_mass(mu_lo)
        if not math.isnan(m) and m < mass:
            break
        mu_lo -= 40.0
    grid = np.linspace(mu_lo, mu_hi, samples)
    masses = np.array([safe_mass(float(m)) for m in grid])

    out = []
    for i in range(len(grid) - 1):
        m0, m1 = masses[i], masses[i + 1]
        if math.isnan(m0) or math.isnan(m1):
            continue
        if (m0 - mass) == 0.0:
            mu_star = float(grid[i])
        elif (m0 - mass) * (m1 - mass) < 0.0:
            mu_star = brentq(
                lambda m: mass_of(float(m)) - mass, grid[i], grid[i + 1], rtol=4e-16
            )
        else:
            continue
        sol = solve_add_local(spec, d, R, float(mu_star), options)
        sol = _with_problem(sol, AddNonLocal(mass, float(mu_star)))
        out.append((sol, float(mu_star)))

    # a-priori bound mu < f^(-1)(M/|Omega|) for increasing f
    from .criteria import generalized_inverse

    vol = unit_sphere_area(d) * R**d / d
    bound = generalized_inverse(spec, mass / vol)
    return [(s, m) for (s, m) in out if m < bound + 1e-9]


# -- residual check -----------------------------------------------------------------

def ode_residual(sol: RadialSolution, n_nodes: int = 160, window=(0.02, 0.98)) -> float:
    """Sup-norm of u'' + (d-1)/r u' + rhs(u) on an interior Chebyshev grid.

    The profile is resampled at Chebyshev points and differentiated
    spectrally, so the residual measures the integration error and not a
    finite-difference artifact.
    """
    lo, hi = window[0] * sol.R, window[1] * sol.R
    k = np.arange(n_nodes)
    r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(math.pi * (2 * k + 1) / (2 * n_nodes))
    r = np.sort(r)
    spline = sol.interpolant() if sol._shot is None else None
    if spline is not None:
        u = spline(r)
    else:
        u = _sample_u(sol, r)
    deg = n_nodes - 1
    coef = np.polynomial.chebyshev.chebfit(r, u, deg)
    up = np.polynomial.chebyshev.chebval(r, np.polynomial.chebyshev.chebder(coef, 1))
    upp = np.polynomial.chebyshev.chebval(r, np.polynomial.chebyshev.chebder(coef, 2))
    if isinstance(sol.problem, (MultLocal, MultNonLocal)):
        rhs = _lambda_of(sol) * sol.spec.f(u)
    else:
        rhs = sol.spec.f(u + sol.shift)
    return float(np.max(np.abs(upp + (sol.d - 1) / r * up + rhs)))


def _sample_u(sol: RadialSolution, r: np.ndarray) -> np.ndarray:
    shot = sol._shot
    x = shot.x_ev + np.log(r / sol.R)
    idx = np.clip(np.searchsorted(shot.xs, x, side="right") - 1, 0, shot.n_steps - 1)
    out = np.empty_like(r)
    for j, (xx, i) in enumerate(zip(x, idx)):
        theta = (xx - shot.xs[i]) / shot.hs[i]
        y0 = np.array([shot.vs[i], shot.vxs[i]])
        out[j] = sol.amplitude + _shoot.dense_eval(shot.xs[i], shot.hs[i], y0, shot.ks[i], theta)[0, 0]
    return out


def perturbed(sol: RadialSolution, eps: float) -> RadialSolution:
    """Profile with eps*(1 - (r/R)^2) added; no longer solves the equation."""
    r = sol.grid
    u = sol.u + eps * (1.0 - (r / sol.R) ** 2)
    up = sol.uprime - 2.0 * eps * r / sol.R**2
    return replace(sol, _shot=None, _grid=r, _u=u, _uprime=up)
