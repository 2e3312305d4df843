"""eta-integral curves and the reduced (r, theta, t) system.

Along an integral curve of eta with H = c|xi^H| and phi_h constant, the
distance to the axis r, the angle theta between nu^H and xi^H and the
height t obey

    r' = sin(theta)
    theta' = (2n-1) (r cos(theta) - c r^3) / r^2
    t' = -2 r cos(theta)

and the weighted invariant (2n-1)c/(2n+1) r^(2n+1) - r^(2n-1) cos(theta)
stays equal to phi0.  The conservation law is monitored, not imposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate as sp_integrate
from scipy.optimize import brentq

from . import core
from .core import Point, inner
from .errors import (
    AmbiguousRootError,
    CharacteristicPointError,
    ConservationError,
    DriftError,
    NoRootError,
    NonPositiveCurvatureError,
    QuadratureError,
)
from .integrate import Stepper, dp_step
from .surface import CHAR_TOL, GaugeBall, SurfaceSpec, analyze, darboux_invariants

CLOSES_AT_POLE = "closes-at-pole"
T_UNBOUNDED = "t-unbounded"


def _check_c(c):
    if not c > 0:
        raise NonPositiveCurvatureError(
            f"c = {c!r}: a compact surface with H = c|xi^H| forces c > 0")


def conserved_weight(n, c):
    return (2 * n - 1) * c / (2 * n + 1)


def conserved_quantity(n, c, r, cos_theta):
    """(2n-1)c/(2n+1) r^(2n+1) - r^(2n-1) cos(theta)."""
    return r ** (2 * n - 1) * (conserved_weight(n, c) * r * r - cos_theta)


# --------------------------------------------------------------------------
# radius as a function of cos(theta)


def _safe_newton(f, df, lo, hi, tol=4e-16, maxit=200):
    flo = f(lo)
    if flo == 0:
        return lo
    x = 0.5 * (lo + hi)
    for _ in range(maxit):
        fx = f(x)
        if fx == 0:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
        else:
            hi = x
        d = df(x)
        x_new = x - fx / d if d != 0 else 0.5 * (lo + hi)
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * max(1.0, abs(x)) or hi - lo <= tol * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def reduced_radius(n: int, c: float, phi0: float, cos_theta: float,
                   r_prev: Optional[float] = None) -> float:
    """Positive root r of (2n-1)c/(2n+1) r^(2n+1) - r^(2n-1) cos(theta) = phi0.

    For phi0 < 0 there can be two roots; the one nearest ``r_prev`` is kept.
    """
    _check_c(c)
    A = conserved_weight(n, c)

    def g(r):
        return conserved_quantity(n, c, r, cos_theta) - phi0

    def dg(r):
        return r ** (2 * n - 2) * ((2 * n + 1) * A * r * r - (2 * n - 1) * cos_theta)

    def upper(start):
        hi = max(start, 1.0)
        while g(hi) <= 0:
            hi *= 2.0
        return hi

    if cos_theta <= 0:
        if phi0 <= 0:
            raise NoRootError(f"no positive radius for phi0={phi0!r}, cos(theta)={cos_theta!r}")
        return _safe_newton(g, dg, 0.0, upper(1.0))

    r_star = math.sqrt((2 * n - 1) * cos_theta / ((2 * n + 1) * A))
    g_star = g(r_star)
    if phi0 >= 0:
        return _safe_newton(g, dg, r_star, upper(r_star))
    if g_star > 0:
        raise NoRootError(f"no positive radius for phi0={phi0!r}, cos(theta)={cos_theta!r}")
    if g_star == 0:
        return r_star
    inner_root = _safe_newton(g, dg, 0.0, r_star)
    outer_root = _safe_newton(g, dg, r_star, upper(r_star))
    if r_prev is None:
        raise AmbiguousRootError("two positive radii; pass r_prev to select a branch")
    return inner_root if abs(inner_root - r_prev) <= abs(outer_root - r_prev) else outer_root


# --------------------------------------------------------------------------
# reduced flow


@dataclass(frozen=True)
class ReducedState:
    n: int
    c: float
    phi0: float
    theta: float
    r: float
    t: float
    s: float


@dataclass(frozen=True)
class CycleDrop:
    k: int
    dt: float
    s_span: float


@dataclass
class CycleReport:
    drops: list
    classification: str
    traversal_dt: Optional[float] = None

    @property
    def dts(self) -> np.ndarray:
        return np.array([d.dt for d in self.drops])


@dataclass
class ReducedFlowOptions:
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = 1e-2
    cycles: int = 10
    max_s: float = 1e4
    r_init: Optional[float] = None
    pole_tol: float = 1e-4
    conservation_tol: float = 1e-8


@dataclass
class ReducedTrajectory:
    n: int
    c: float
    phi0: float
    s: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    t: np.ndarray
    termination: str
    max_conservation_defect: float = 0.0

    @property
    def states(self) -> list:
        return [ReducedState(self.n, self.c, self.phi0, th, r, t, s)
                for s, r, th, t in zip(self.s, self.r, self.theta, self.t)]

    def t_prime(self) -> np.ndarray:
        return -2.0 * self.r * np.cos(self.theta)


def reduced_rhs(n, c):
    def fun(_s, y):
        r, th, _t = y
        ct = math.cos(th)
        return np.array([
            math.sin(th),
            (2 * n - 1) * (r * ct - c * r ** 3) / (r * r),
            -2.0 * r * ct,
        ])
    return fun


def _traversal_integrand(n, c):
    # dt/dtheta as a function of cos(theta) on the phi0 = 0 branch
    def q(cos_theta):
        r = reduced_radius(n, c, 0.0, cos_theta)
        return -2.0 * r * r * cos_theta / ((2 * n - 1) * (cos_theta - c * r * r))
    return q


def traversal_drop(n: int, c: float) -> float:
    """Height change across one pole-to-pole traversal (phi0 = 0).

    theta runs from pi/2 down to -pi/2; with theta = +-(pi/2 - w^2) the
    integrand in w stays smooth at both ends.
    """
    _check_c(c)
    q = _traversal_integrand(n, c)
    wmax = math.sqrt(math.pi / 2)
    # both halves map to cos(theta) = sin(w^2)
    val, err, info = sp_integrate.quad(lambda w: 4.0 * w * q(math.sin(w * w)), 0.0, wmax,
                                       epsabs=1e-14, epsrel=1e-13, limit=200, full_output=1)[:3]
    if err > 1e-10 * (1.0 + abs(val)):
        raise QuadratureError(f"traversal quadrature did not converge (err={err:.2e})")
    return -val


def traversal_drop_closed_form(n: int, c: float) -> float:
    """-2 (2n+1) / ((2n-1) c); equals -6/c for n = 1."""
    _check_c(c)
    return -2.0 * (2 * n + 1) / ((2 * n - 1) * c)


def drop_formula(n: int, c: float, phi0: float, theta_ref: float = 0.0) -> float:
    """Per-2pi height drop for phi0 > 0 as an integral over the angle."""
    _check_c(c)
    if not phi0 > 0:
        raise ValueError("the drop integral needs phi0 > 0")
    w = 2.0 * c / (2 * n + 1)

    def integrand(sigma):
        cs = math.cos(sigma)
        R = reduced_radius(n, c, phi0, cs)
        return R * cs * cs / (phi0 * R ** (2 - 2 * n) + w * R ** 3)

    res = sp_integrate.quad(integrand, theta_ref - 2 * math.pi, theta_ref,
                            epsabs=1e-14, epsrel=1e-13, limit=400, full_output=1)
    val, err = res[0], res[1]
    if len(res) > 3 or err > 1e-10 * (1.0 + abs(val)):
        raise QuadratureError(f"drop quadrature did not converge (err={err:.2e})")
    return -2.0 / ((2 * n - 1) * c) * val


def reduced_flow(n: int, c: float, phi0: float, theta_init: float = 0.0,
                 t_init: float = 0.0, opts: Optional[ReducedFlowOptions] = None):
    """Integrate the reduced system; returns (ReducedTrajectory, CycleReport).

    phi0 != 0: cycle mode, recording the height change each time theta has
    decreased by another 2pi.  phi0 == 0: traversal mode, integrating to the
    axis and reporting the pole-to-pole drop by quadrature.
    """
    _check_c(c)
    opts = opts or ReducedFlowOptions()
    r0 = reduced_radius(n, c, phi0, math.cos(theta_init), opts.r_init)
    fun = reduced_rhs(n, c)
    stepper = Stepper(fun, opts.rtol, opts.atol, opts.max_step)
    tol = opts.conservation_tol * (1.0 + abs(phi0))

    s, y = 0.0, np.array([r0, theta_init, t_init])
    ss, ys = [s], [y]
    drops = []
    max_defect = 0.0
    last_s, last_t = 0.0, t_init
    target = theta_init - 2.0 * math.pi
    termination = "max-s"
    traversal = phi0 == 0

    while s < opts.max_s:
        cap = opts.max_s - s
        if traversal:
            cap = min(cap, 0.5 * y[0])  # |r'| <= 1 keeps r positive
        s_new, y_new, h = stepper.step(s, y, h_cap=cap)
        defect = abs(conserved_quantity(n, c, y_new[0], math.cos(y_new[1])) - phi0)
        max_defect = max(max_defect, defect)
        if defect > tol:
            raise ConservationError(f"conservation defect {defect:.3e} at s={s_new:.6g}")
        while not traversal and y_new[1] <= target < y[1]:
            # land on theta = target with a partial step from (s, y)
            def miss(hh, s=s, y=y):
                return dp_step(fun, s, y, hh)[0][1] - target
            hh = brentq(miss, 0.0, h, xtol=1e-15, rtol=1e-15)
            y_hit = dp_step(fun, s, y, hh)[0]
            drops.append(CycleDrop(len(drops) + 1, float(y_hit[2] - last_t), s + hh - last_s))
            last_s, last_t = s + hh, float(y_hit[2])
            target -= 2.0 * math.pi
        s, y = s_new, y_new
        ss.append(s)
        ys.append(y)
        if not traversal and len(drops) >= opts.cycles:
            termination = "cycles"
            break
        if traversal and y[0] < opts.pole_tol:
            termination = "pole-reached"
            break

    ys = np.array(ys)
    traj = ReducedTrajectory(n, c, phi0, np.array(ss), ys[:, 0], ys[:, 1], ys[:, 2],
                             termination, max_defect)
    if traversal:
        report = CycleReport([], CLOSES_AT_POLE, traversal_drop(n, c))
    else:
        report = CycleReport(drops, T_UNBOUNDED)
    return traj, report


# --------------------------------------------------------------------------
# ambient eta-flow


@dataclass
class AmbientFlowOptions:
    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = 1e-2
    max_s: float = 50.0
    pole_tol: float = 1e-4
    scale: Optional[float] = None
    drift_bound: float = 1e-8
    char_tol: float = CHAR_TOL
    c: Optional[float] = None


@dataclass
class AmbientTrajectory:
    n: int
    s: np.ndarray
    points: np.ndarray
    r: np.ndarray
    cos_theta: np.ndarray
    sin_theta: np.ndarray
    phi_h: np.ndarray
    phi_v: np.ndarray
    residual: np.ndarray
    termination: str

    @property
    def t(self) -> np.ndarray:
        return self.points[:, -1]

    def header(self) -> list:
        n = self.n
        return (["s"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]
                + ["t", "r", "cos_theta", "sin_theta", "phi_h", "phi_v", "residual"])

    def rows(self):
        for i in range(self.s.size):
            yield ([self.s[i], *self.points[i], self.r[i], self.cos_theta[i],
                    self.sin_theta[i], self.phi_h[i], self.phi_v[i], self.residual[i]])


def _surface_scale(spec):
    return spec.R if isinstance(spec, GaugeBall) else 1.0


def ambient_flow(spec: SurfaceSpec, start: Point, opts: Optional[AmbientFlowOptions] = None
                 ) -> AmbientTrajectory:
    """Integrate xi' = eta(xi) on {f = 0}, projecting back after every step."""
    opts = opts or AmbientFlowOptions()
    scale = opts.scale if opts.scale is not None else _surface_scale(spec)
    pole_cut = opts.pole_tol * scale

    def fun(_s, y):
        p = Point.from_array(y)
        fr = analyze(spec, p, opts.char_tol, level_tol=None).frame
        return core.frame_to_euclidean(fr.eta, p)

    def project(y):
        p = Point.from_array(y)
        value, grad, _ = spec.euclidean_jet(p)
        g = core.frame_matrix(p) @ grad
        y = y + core.frame_to_euclidean(-value * g / (g @ g), p)
        return y, abs(spec.value(Point.from_array(y)))

    cols = {k: [] for k in ("s", "pt", "r", "cos", "sin", "phih", "phiv", "res")}

    def record(s, y, res):
        p = Point.from_array(y)
        geom = analyze(spec, p, opts.char_tol, level_tol=None)
        xih = core.horizontal_position(p)
        r = float(np.linalg.norm(xih))
        phih, phiv = darboux_invariants(spec, p, opts.c, opts.char_tol, geom=geom)
        cols["s"].append(s)
        cols["pt"].append(y)
        cols["r"].append(r)
        cols["cos"].append(inner(geom.frame.nu_h, xih) / r if r > 0 else float("nan"))
        cols["sin"].append(inner(geom.frame.eta, xih) / r if r > 0 else float("nan"))
        cols["phih"].append(phih)
        cols["phiv"].append(phiv if phiv is not None else float("nan"))
        cols["res"].append(res)
        return r

    y = start.as_array()
    res0 = abs(spec.value(start))
    if res0 > opts.drift_bound:
        raise DriftError(f"start point is off the surface (|f| = {res0:.3e})")
    s = 0.0
    stepper = Stepper(fun, opts.rtol, opts.atol, opts.max_step)
    termination = "max-s"
    try:
        r = record(s, y, res0)
        while s < opts.max_s and r >= pole_cut:
            s, y, _ = stepper.step(s, y, h_cap=opts.max_s - s)
            y, res = project(y)
            if res > opts.drift_bound:
                raise DriftError(f"surface drift {res:.3e} exceeds {opts.drift_bound:.1e} at s={s:.6g}")
            r = record(s, y, res)
        if r < pole_cut:
            termination = "pole-reached"
    except CharacteristicPointError:
        termination = "characteristic-band"

    return AmbientTrajectory(
        spec.n, np.array(cols["s"]), np.array(cols["pt"]), np.array(cols["r"]),
        np.array(cols["cos"]), np.array(cols["sin"]), np.array(cols["phih"]),
        np.array(cols["phiv"]), np.array(cols["res"]), termination)
