"""Implicit hypersurfaces M = {f = 0} in H^n and their horizontal geometry.

A defining function supplies its value, Euclidean gradient and Euclidean
Hessian; :func:`evaluate_jet` converts those into frame derivatives
``E_j f`` and ``E_k(E_j f)``.  Everything downstream (normals, the
horizontal mean curvature, the horizontal shape operator) is computed from
that second-order jet.  Third-order quantities such as Lie brackets of the
constructed frame fields are finite-differenced.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import core
from .core import Point, ambient, connection_term, covariant_derivative, FieldJet, inner, j_apply
from .errors import (
    AxisError,
    BisectionError,
    CharacteristicPointError,
    DegenerateGradientError,
    DimensionError,
    GeometryError,
    OffSurfaceError,
    SpecError,
)

CHAR_TOL = 1e-7
LEVEL_TOL = 1e-8
GRAD_FLOOR = 1e-14
PIVOT_TOL = 1e-6
UMBILIC_TOL = 1e-8
FD_STEP = 1e-5


# --------------------------------------------------------------------------
# defining functions


class SurfaceSpec:
    """Base class for defining functions f with ``f < 0`` inside.

    Subclasses implement :meth:`euclidean_jet`.  ``orientation_sign``
    multiplies the gradient when forming the unit normal.
    """

    kind = "abstract"

    def __init__(self, n: int, orientation_sign: int = 1, anchor: Optional[Point] = None):
        if not 1 <= n <= core.MAX_DIM:
            raise DimensionError(f"n must lie in [1, {core.MAX_DIM}], got {n}")
        if orientation_sign not in (1, -1):
            raise SpecError("orientation_sign must be +1 or -1")
        self.n = int(n)
        self.orientation_sign = int(orientation_sign)
        self.anchor = anchor

    def euclidean_jet(self, p: Point):
        """Return ``(f, grad f, Hess f)`` in Euclidean coordinates (x, y, t)."""
        raise NotImplementedError

    def value(self, p: Point) -> float:
        return self.euclidean_jet(p)[0]

    def params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}(n={self.n}, {args})"


class GaugeBall(SurfaceSpec):
    """f = (|x|^2 + |y|^2)^2 + (t - t0)^2 - R^4, the boundary of B_R(0, 0, t0)."""

    kind = "gauge-ball"

    def __init__(self, R: float = 1.0, t0: float = 0.0, n: int = 1, orientation_sign: int = 1):
        if not R > 0:
            raise SpecError(f"gauge-ball radius must be positive, got {R}")
        self.R = float(R)
        self.t0 = float(t0)
        super().__init__(n, orientation_sign, Point(np.zeros(n), np.zeros(n), self.t0))

    def params(self):
        return {"R": self.R, "t0": self.t0}

    def euclidean_jet(self, p: Point):
        n = self.n
        if p.n != n:
            raise DimensionError(f"surface has n={n}, point has n={p.n}")
        h = core.horizontal_position(p)
        u = float(h @ h)
        s = p.t - self.t0
        value = u * u + s * s - self.R ** 4
        grad = np.append(4.0 * u * h, 2.0 * s)
        hess = np.zeros((2 * n + 1, 2 * n + 1))
        hess[:2 * n, :2 * n] = 4.0 * u * np.eye(2 * n) + 8.0 * np.outer(h, h)
        hess[2 * n, 2 * n] = 2.0
        return value, grad, hess


class PolynomialSurface(SurfaceSpec):
    """f given as a sum of monomials in (x_1..x_n, y_1..y_n, t).

    ``terms`` maps exponent tuples of length 2n+1 to coefficients.  Sampling
    needs an ``anchor`` with f(anchor) < 0.
    """

    kind = "custom-polynomial"

    def __init__(self, terms, n: int, anchor=None, orientation_sign: int = 1):
        items = list(terms.items()) if isinstance(terms, dict) else list(terms)
        if not items:
            raise SpecError("polynomial needs at least one term")
        exps = np.array([tuple(e) for e, _ in items], dtype=int)
        if exps.ndim != 2 or exps.shape[1] != 2 * n + 1:
            raise SpecError(f"exponent tuples must have length {2 * n + 1}")
        if np.any(exps < 0):
            raise SpecError("exponents must be non-negative")
        self.exps = exps
        self.coeffs = np.array([float(c) for _, c in items])
        if anchor is not None and not isinstance(anchor, Point):
            anchor = Point.from_array(anchor)
        super().__init__(n, orientation_sign, anchor)

    def params(self):
        return {"terms": [[e.tolist(), c] for e, c in zip(self.exps, self.coeffs)]}

    @staticmethod
    def _powers(z, e):
        # z**e with the convention 0**0 = 1 and z**(-1) treated as 0
        safe = np.where(e >= 0, e, 0)
        return np.where(e >= 0, z ** safe, 0.0)

    def euclidean_jet(self, p: Point):
        if p.n != self.n:
            raise DimensionError(f"surface has n={self.n}, point has n={p.n}")
        z = p.as_array()
        d = z.size
        e, c = self.exps, self.coeffs
        pw = self._powers(z, e)
        pw1 = self._powers(z, e - 1) * e
        pw2 = self._powers(z, e - 2) * e * (e - 1)
        value = float(np.sum(c * np.prod(pw, axis=1)))
        grad = np.empty(d)
        hess = np.empty((d, d))
        for m in range(d):
            sub = pw.copy()
            sub[:, m] = pw1[:, m]
            grad[m] = np.sum(c * np.prod(sub, axis=1))
            for q in range(m, d):
                sub2 = pw.copy()
                if q == m:
                    sub2[:, m] = pw2[:, m]
                else:
                    sub2[:, m] = pw1[:, m]
                    sub2[:, q] = pw1[:, q]
                hess[m, q] = hess[q, m] = np.sum(c * np.prod(sub2, axis=1))
        return value, grad, hess


# --------------------------------------------------------------------------
# jets and frames


@dataclass(frozen=True)
class SurfaceJet:
    """Frame derivatives of f at ``base``.

    ``frame_grad[j] = E_j f`` and ``frame_hess[k, j] = E_k(E_j f)`` with
    ``E = (X_1..X_n, Y_1..Y_n, T)``.
    """

    value: float
    frame_grad: np.ndarray
    frame_hess: np.ndarray
    base: Point
    orientation_sign: int = 1

    @classmethod
    def from_euclidean(cls, value, grad, hess, p: Point, orientation_sign: int = 1) -> "SurfaceJet":
        n = p.n
        m = core.frame_matrix(p)
        grad = np.asarray(grad, dtype=float)
        frame_grad = m @ grad
        frame_hess = m @ np.asarray(hess, dtype=float) @ m.T
        # derivatives of the variable coefficients -2y_j, 2x_j of X_j, Y_j
        ft = grad[2 * n]
        idx = np.arange(n)
        frame_hess[idx, n + idx] += 2.0 * ft
        frame_hess[n + idx, idx] -= 2.0 * ft
        return cls(float(value), frame_grad, frame_hess, p, orientation_sign)

    @property
    def n(self) -> int:
        return self.base.n


def evaluate_jet(spec: SurfaceSpec, p: Point) -> SurfaceJet:
    if not isinstance(spec, SurfaceSpec):
        raise SpecError(f"unknown surface spec {spec!r}")
    value, grad, hess = spec.euclidean_jet(p)
    return SurfaceJet.from_euclidean(value, grad, hess, p, spec.orientation_sign)


@dataclass(frozen=True)
class SurfaceFrame:
    nu: np.ndarray
    p_h_norm: float
    nu_t: float
    nu_h: np.ndarray          # horizontal, length 2n
    eta: np.ndarray           # horizontal, length 2n
    tau: np.ndarray           # ambient
    alpha: float
    basis: tuple              # ((V_1, W_1), ...), horizontal
    pivots: tuple             # candidate indices used for V_i

    @property
    def n(self) -> int:
        return self.eta.size // 2

    def tangent_horizontal(self) -> list:
        """The ordered basis [eta, V_1, W_1, ...] of H cap TM."""
        out = [self.eta]
        for v, w in self.basis:
            out.extend([v, w])
        return out


class PointClass(str, enum.Enum):
    REGULAR = "regular"
    CHARACTERISTIC = "characteristic"
    OFF_SURFACE = "off-surface"


def _complete_basis(nu_h, eta, pivots=None):
    n = nu_h.size // 2
    q = [nu_h, eta]
    pairs = []
    used = []
    candidates = range(2 * n) if pivots is None else pivots
    for idx in candidates:
        if len(pairs) == n - 1:
            break
        v = np.zeros(2 * n)
        v[idx] = 1.0
        for b in q:
            v -= (v @ b) * b
        norm = np.linalg.norm(v)
        if pivots is None and norm <= PIVOT_TOL:
            continue
        v /= norm
        w = j_apply(v)
        pairs.append((v, w))
        q.extend([v, w])
        used.append(idx)
    if len(pairs) != n - 1:
        raise GeometryError("could not complete the horizontal tangent basis")
    return tuple(pairs), tuple(used)


def _frame(jet: SurfaceJet, tol: float = CHAR_TOL, pivots=None) -> SurfaceFrame:
    g = jet.orientation_sign * np.asarray(jet.frame_grad)
    gnorm = float(np.linalg.norm(g))
    if gnorm < GRAD_FLOOR:
        raise DegenerateGradientError(f"|frame gradient| = {gnorm:.3e}")
    nu = g / gnorm
    ph = nu[:-1]
    p_h_norm = float(np.linalg.norm(ph))
    if p_h_norm <= tol:
        raise CharacteristicPointError(f"|P_H nu| = {p_h_norm:.3e} <= {tol:.1e}")
    nu_t = float(nu[-1])
    nu_h = ph / p_h_norm
    eta = -j_apply(nu_h)
    tau = nu_t * ambient(nu_h)
    tau[-1] = -p_h_norm
    pairs, used = _complete_basis(nu_h, eta, pivots)
    return SurfaceFrame(nu, p_h_norm, nu_t, nu_h, eta, tau, 2.0 * nu_t / p_h_norm, pairs, used)


def surface_frame(jet: SurfaceJet, tol: float = CHAR_TOL, level_tol: float = LEVEL_TOL) -> SurfaceFrame:
    """Unit normal, horizontal normal and the adapted frame at a surface point."""
    if abs(jet.value) > level_tol:
        raise OffSurfaceError(f"|f| = {abs(jet.value):.3e} exceeds level tolerance {level_tol:.1e}")
    return _frame(jet, tol)


def classify_point(jet: SurfaceJet, tol: float = CHAR_TOL, level_tol: float = LEVEL_TOL) -> PointClass:
    if abs(jet.value) > level_tol:
        return PointClass.OFF_SURFACE
    g = np.asarray(jet.frame_grad)
    gnorm = np.linalg.norm(g)
    if gnorm < GRAD_FLOOR or np.linalg.norm(g[:-1]) <= tol * gnorm:
        return PointClass.CHARACTERISTIC
    return PointClass.REGULAR


# --------------------------------------------------------------------------
# derivatives of the horizontal normal


def nu_h_derivatives(jet: SurfaceJet, frame: SurfaceFrame) -> np.ndarray:
    """Row k holds E_k applied to the frame coefficients of nu^H (length 2n).

    nu^H is extended off M through the level sets of f, so it has unit
    length everywhere and the rows are orthogonal to nu^H.
    """
    n = jet.n
    gh = jet.orientation_sign * np.asarray(jet.frame_hess)[:, :2 * n]
    g = jet.orientation_sign * np.asarray(jet.frame_grad)[:2 * n]
    pn = np.linalg.norm(g)
    nh = g / pn
    return (gh - np.outer(gh @ nh, nh)) / pn


def nabla_nu_h(frame: SurfaceFrame, dnu, z) -> np.ndarray:
    """nabla_Z nu^H for an ambient direction Z."""
    z = np.asarray(z, dtype=float)
    if z.size == 2 * frame.n:
        z = ambient(z)
    deriv = ambient(z @ dnu)
    return covariant_derivative(FieldJet(ambient(frame.nu_h), deriv), z)


@dataclass(frozen=True)
class LocalGeometry:
    """Jet, frame and the first derived quantities at one point."""

    jet: SurfaceJet
    frame: SurfaceFrame
    dnu: np.ndarray

    @property
    def point(self) -> Point:
        return self.jet.base

    @property
    def n(self) -> int:
        return self.jet.n

    def nabla(self, z) -> np.ndarray:
        return nabla_nu_h(self.frame, self.dnu, z)

    def mean_curvature_pair(self):
        """(tangent-frame sum, full XY-frame sum), both divided by 2n-1."""
        n = self.n
        fr = self.frame
        tang = sum(inner(self.nabla(z), ambient(z)) for z in fr.tangent_horizontal())
        basis = core.frame_basis(n)
        full = sum(inner(self.nabla(basis[k]), basis[k]) for k in range(2 * n))
        return tang / (2 * n - 1), full / (2 * n - 1)

    def shape_apply(self, z) -> np.ndarray:
        """A_M(Z) as a horizontal (length 2n) vector."""
        fr = self.frame
        z = np.asarray(z, dtype=float)
        proj = self.nabla(z)[:-1]
        return proj - fr.alpha * (j_apply(z) - inner(fr.eta, z) * fr.nu_h)

    def shape_matrix(self) -> np.ndarray:
        basis = self.frame.tangent_horizontal()
        images = [self.shape_apply(z) for z in basis]
        return np.array([[inner(images[j], basis[i]) for j in range(len(basis))]
                         for i in range(len(basis))])


def analyze(spec: SurfaceSpec, p: Point, tol: float = CHAR_TOL,
            level_tol: Optional[float] = LEVEL_TOL, pivots=None) -> LocalGeometry:
    """Evaluate the local geometry; ``level_tol=None`` skips the on-surface check."""
    jet = evaluate_jet(spec, p)
    if level_tol is not None and abs(jet.value) > level_tol:
        raise OffSurfaceError(f"|f| = {abs(jet.value):.3e} exceeds level tolerance {level_tol:.1e}")
    frame = _frame(jet, tol, pivots)
    return LocalGeometry(jet, frame, nu_h_derivatives(jet, frame))


def mean_curvature(spec: SurfaceSpec, p: Point, tol: float = CHAR_TOL) -> float:
    """Horizontal mean curvature div(nu^H) / (2n - 1)."""
    h_tan, h_full = analyze(spec, p, tol).mean_curvature_pair()
    if abs(h_tan - h_full) > 1e-9 * (1.0 + abs(h_tan)):
        raise GeometryError(f"mean curvature formulas disagree: {h_tan!r} vs {h_full!r}")
    return h_tan


def shape_operator(spec: SurfaceSpec, p: Point, tol: float = CHAR_TOL) -> np.ndarray:
    """Matrix of A_M in the basis {eta, V_1, W_1, ..., V_{n-1}, W_{n-1}}."""
    return analyze(spec, p, tol).shape_matrix()


@dataclass(frozen=True)
class UmbilicFit:
    k: float
    l: float
    residual: float


def umbilic_fit(m) -> UmbilicFit:
    """Fit ``diag(l, k, ..., k)`` to a shape matrix; l sits on the eta entry."""
    m = np.asarray(m, dtype=float)
    l = float(m[0, 0])
    k = float(np.mean(np.diag(m)[1:])) if m.shape[0] > 1 else float("nan")
    model = np.diag([l] + [k] * (m.shape[0] - 1))
    residual = float(np.linalg.norm(m - model) / (np.linalg.norm(m) + 1.0))
    return UmbilicFit(k, l, residual)


# --------------------------------------------------------------------------
# Darboux-type invariants


def darboux_invariants(spec: SurfaceSpec, p: Point, c: Optional[float] = None,
                       tol: float = CHAR_TOL, geom: Optional[LocalGeometry] = None):
    """(phi_h, phi_v) at a regular point.

    With ``c`` given, the prescribed curvature c|xi^H| replaces the computed
    H_M; otherwise H_M is used.  phi_v is ``None`` on the vertical axis.
    """
    geom = geom if geom is not None else analyze(spec, p, tol)
    n = spec.n
    xih = core.horizontal_position(p)
    r = float(np.linalg.norm(xih))
    h = geom.mean_curvature_pair()[0] if c is None else c * r
    w = (2 * n - 1) / (2 * n + 1)
    phi_h = w * h * r * r - inner(geom.frame.nu_h, xih)
    if r <= tol:
        return phi_h, None
    phi_v = w * h * p.t / r - inner(geom.frame.eta, xih) / r
    return phi_h, phi_v


def phi_v(spec, p, c=None, tol=CHAR_TOL) -> float:
    val = darboux_invariants(spec, p, c, tol)[1]
    if val is None:
        raise AxisError("phi_v is undefined on the vertical axis")
    return val


# --------------------------------------------------------------------------
# identity suite

EXACT_CHECKS = ("vertical_derivative", "divergence_free", "position_props")
FD_CHECKS = ("bracket_normal", "bracket_span", "codazzi_k", "codazzi_alpha")


@dataclass
class IdentityReport:
    residuals: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)
    umbilic_residual: float = float("nan")

    def max_residual(self, kinds: Sequence[str]) -> float:
        vals = [self.residuals[k] for k in kinds if k in self.residuals]
        return max(vals) if vals else 0.0


def _fields_at(spec, q: Point, pivots, tol):
    return analyze(spec, q, tol, level_tol=None, pivots=pivots).frame.tangent_horizontal()


def _field_derivatives(spec, geom: LocalGeometry, h: float, tol: float):
    """D[a][b] ~ Z_a applied to the coefficients of Z_b for the tangent
    horizontal fields, central differences with one Richardson step."""
    p = geom.point
    base = p.as_array()
    fields = geom.frame.tangent_horizontal()
    piv = geom.frame.pivots
    out = []
    for za in fields:
        e = core.frame_to_euclidean(za, p)

        def central(step):
            plus = _fields_at(spec, Point.from_array(base + step * e), piv, tol)
            minus = _fields_at(spec, Point.from_array(base - step * e), piv, tol)
            return [(fp - fm) / (2.0 * step) for fp, fm in zip(plus, minus)]

        coarse, fine = central(h), central(h / 2)
        out.append([(4.0 * f - c) / 3.0 for f, c in zip(fine, coarse)])
    return fields, out


def _bracket(fields, derivs, a, b):
    za, zb = ambient(fields[a]), ambient(fields[b])
    return ((ambient(derivs[a][b]) + connection_term(za, zb))
            - (ambient(derivs[b][a]) + connection_term(zb, za)))


def _k_l_alpha(geom: LocalGeometry):
    m = geom.shape_matrix()
    l = m[0, 0]
    k = (np.trace(m) - l) / (m.shape[0] - 1)
    return k, l, geom.frame.alpha


def _scalar_along(spec, geom, fn, h, tol):
    p = geom.point
    e = core.frame_to_euclidean(geom.frame.eta, p)
    base = p.as_array()

    def central(step):
        plus = fn(analyze(spec, Point.from_array(base + step * e), tol, None, geom.frame.pivots))
        minus = fn(analyze(spec, Point.from_array(base - step * e), tol, None, geom.frame.pivots))
        return (np.asarray(plus) - np.asarray(minus)) / (2.0 * step)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def identity_suite(spec: SurfaceSpec, p: Point, c: Optional[float] = None,
                   fd_step: float = FD_STEP, tol: float = CHAR_TOL,
                   umbilic_tol: float = UMBILIC_TOL) -> IdentityReport:
    """Residuals of the structural identities at a regular point."""
    geom = analyze(spec, p, tol)
    fr = geom.frame
    n = spec.n
    rep = IdentityReport()
    basis = core.frame_basis(n)

    # <nabla_Z nu^H, T> = 2 <eta, Z> over horizontal frame directions
    rep.residuals["vertical_derivative"] = max(
        abs(geom.nabla(basis[k])[-1] - 2.0 * fr.eta[k]) for k in range(2 * n))

    rep.residuals["divergence_free"] = max(
        abs(inner(geom.nabla(fr.tau), fr.tau)), abs(inner(geom.nabla(fr.nu), fr.nu)))

    fields, derivs = _field_derivatives(spec, geom, fd_step, tol)
    m = len(fields)
    res = 0.0
    for a, b in itertools.combinations(range(m), 2):
        br = _bracket(fields, derivs, a, b)
        expect = -2.0 * fr.alpha * inner(j_apply(fields[a]), fields[b])
        res = max(res, abs(inner(br[:-1], fr.nu_h) - expect))
    rep.residuals["bracket_normal"] = res

    if n == 1:
        for name in ("bracket_span", "codazzi_k", "codazzi_alpha", "position_props"):
            rep.skipped[name] = "n = 1"
        return rep

    fit = umbilic_fit(geom.shape_matrix())
    rep.umbilic_residual = fit.residual
    if fit.residual > umbilic_tol:
        for name in ("bracket_span", "codazzi_k", "codazzi_alpha", "position_props"):
            rep.skipped[name] = f"not umbilic (residual {fit.residual:.2e})"
        return rep

    k, l, alpha = _k_l_alpha(geom)
    target = ambient(fr.eta) + 0.5 * k * fr.p_h_norm * fr.tau
    res = 0.0
    for a, b in itertools.combinations(range(1, m), 2):
        res = max(res, abs(inner(_bracket(fields, derivs, a, b), target)))
    rep.residuals["bracket_span"] = res

    dk, dalpha = _scalar_along(spec, geom, lambda g: _k_l_alpha(g)[::2], fd_step, tol)
    rep.residuals["codazzi_k"] = abs(dk - (l - 2.0 * k) * alpha)
    rep.residuals["codazzi_alpha"] = abs(dalpha - (k * k - alpha * alpha - k * l))

    xih = core.horizontal_position(p)
    r = float(np.linalg.norm(xih))
    h_m = geom.mean_curvature_pair()[0]
    if c is None:
        rep.skipped["position_props"] = "no curvature constant given"
    elif abs(h_m - c * r) > 1e-8 * (1.0 + abs(h_m)):
        rep.skipped["position_props"] = "H_M != c |xi^H|"
    else:
        vals = [abs(inner(fr.nu_h, xih) - r * r * k), abs(inner(fr.eta, xih) - r * r * alpha)]
        for v, w in fr.basis:
            vals.extend([abs(inner(v, xih)), abs(inner(w, xih))])
        rep.residuals["position_props"] = max(vals)
    return rep


# --------------------------------------------------------------------------
# sampling


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for sample ``index``, derived from (seed, index) only."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def ray_point(spec: SurfaceSpec, direction, level: float = 1e-12, max_iter: int = 200) -> Point:
    """Bisect f along the ray anchor + s * direction for the first exit."""
    if spec.anchor is None:
        raise SpecError(f"{spec.kind} has no interior anchor for sampling")
    a = spec.anchor.as_array()
    d = np.asarray(direction, dtype=float)

    def f(s):
        return spec.value(Point.from_array(a + s * d))

    if f(0.0) >= 0:
        raise SpecError("anchor is not interior (f(anchor) >= 0)")
    lo, hi = 0.0, 1.0
    for _ in range(200):
        if f(hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BisectionError("ray never leaves the interior")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < level:
            return Point.from_array(a + mid * d)
        if fm < 0:
            lo = mid
        else:
            hi = mid
    raise BisectionError(f"bisection did not reach |f| < {level:.0e} in {max_iter} iterations")


def sample_points(spec: SurfaceSpec, count: int, seed: int = 0) -> list:
    """Seeded points on {f = 0} obtained by shooting rays from the anchor."""
    pts = []
    for i in range(count):
        d = sample_rng(seed, i).standard_normal(2 * spec.n + 1)
        pts.append(ray_point(spec, d / np.linalg.norm(d)))
    return pts
