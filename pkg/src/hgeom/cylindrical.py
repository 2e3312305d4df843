"""Cylindrically symmetric hypersurfaces f(x, y, t) = v(|x|^2 + |y|^2, t).

All profiles share one chain rule through u = |x|^2 + |y|^2; a profile only
has to supply v and its partials up to second order in (u, t).
"""

from __future__ import annotations

import numpy as np

from . import core
from .core import Point
from .errors import AxisError, SpecError
from .surface import SurfaceJet, SurfaceSpec

AXIS_BAND = 1e-10
MAX_POLY_DEGREE = 6


class Profile:
    """v(u, t) with partials (v, v1, v2, v11, v12, v22).

    ``anchor_t`` is a height with v(0, anchor_t) < 0, used for sampling.
    """

    profile_id = "abstract"
    anchor_t = 0.0

    def evaluate(self, u: float, t: float):
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


class GaugeProfile(Profile):
    """u^2 + (t - t0)^2 - R^4."""

    profile_id = "gauge"

    def __init__(self, R: float = 1.0, t0: float = 0.0):
        if not R > 0:
            raise SpecError("R must be positive")
        self.R, self.t0 = float(R), float(t0)
        self.anchor_t = self.t0

    def params(self):
        return {"R": self.R, "t0": self.t0}

    def evaluate(self, u, t):
        s = t - self.t0
        return u * u + s * s - self.R ** 4, 2.0 * u, 2.0 * s, 2.0, 0.0, 2.0


class EllipsoidalProfile(Profile):
    """u^2 / a + t^2 / b - 1."""

    profile_id = "ellipsoid"

    def __init__(self, a: float = 1.0, b: float = 1.0):
        if not (a > 0 and b > 0):
            raise SpecError("ellipsoid parameters a, b must be positive")
        self.a, self.b = float(a), float(b)

    def params(self):
        return {"a": self.a, "b": self.b}

    def evaluate(self, u, t):
        a, b = self.a, self.b
        return u * u / a + t * t / b - 1.0, 2.0 * u / a, 2.0 * t / b, 2.0 / a, 0.0, 2.0 / b


class PolynomialProfile(Profile):
    """sum c_ij u^i t^j of total degree at most 6."""

    profile_id = "poly"

    def __init__(self, coeffs, anchor_t: float = 0.0):
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        terms = {}
        for (i, j), c in items:
            i, j = int(i), int(j)
            if i < 0 or j < 0 or i + j > MAX_POLY_DEGREE:
                raise SpecError(f"term u^{i} t^{j} outside total degree <= {MAX_POLY_DEGREE}")
            terms[(i, j)] = terms.get((i, j), 0.0) + float(c)
        if not terms:
            raise SpecError("polynomial profile needs at least one term")
        self.terms = terms
        self.anchor_t = float(anchor_t)

    def params(self):
        return {"terms": [[i, j, c] for (i, j), c in sorted(self.terms.items())],
                "anchor_t": self.anchor_t}

    def evaluate(self, u, t):
        def mono(i, j, du, dt):
            # d^du/du^du d^dt/dt^dt of u^i t^j
            if du > i or dt > j:
                return 0.0
            fu = float(np.prod(np.arange(i - du + 1, i + 1))) * u ** (i - du)
            ft = float(np.prod(np.arange(j - dt + 1, j + 1))) * t ** (j - dt)
            return fu * ft

        out = []
        for du, dt in ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)):
            out.append(sum(c * mono(i, j, du, dt) for (i, j), c in self.terms.items()))
        return tuple(out)


def profile_euclidean_jet(pr: Profile, p: Point):
    """(f, grad f, Hess f) for f = v(|xi^H|^2, t)."""
    h = core.horizontal_position(p)
    u = float(h @ h)
    v, v1, v2, v11, v12, v22 = pr.evaluate(u, p.t)
    d = h.size + 1
    grad = np.append(2.0 * v1 * h, v2)
    hess = np.zeros((d, d))
    hess[:-1, :-1] = 2.0 * v1 * np.eye(h.size) + 4.0 * v11 * np.outer(h, h)
    hess[:-1, -1] = hess[-1, :-1] = 2.0 * v12 * h
    hess[-1, -1] = v22
    return v, grad, hess


def profile_jet(pr: Profile, p: Point, orientation_sign: int = 1) -> SurfaceJet:
    value, grad, hess = profile_euclidean_jet(pr, p)
    return SurfaceJet.from_euclidean(value, grad, hess, p, orientation_sign)


def profile_kl(pr: Profile, p: Point):
    """Umbilic functions (k, l) from the profile partials."""
    h = core.horizontal_position(p)
    u = float(h @ h)
    if u < AXIS_BAND:
        raise AxisError("profile_kl needs |xi^H|^2 >= 1e-10")
    r = np.sqrt(u)
    _, v1, v2, v11, v12, v22 = pr.evaluate(u, p.t)
    g2 = v1 * v1 + v2 * v2
    k = v1 / (r * np.sqrt(g2))
    l = k + 2.0 * r * (v11 * v2 * v2 + v22 * v1 * v1 - 2.0 * v12 * v1 * v2) / g2 ** 1.5
    return float(k), float(l)


class CylindricalSurface(SurfaceSpec):
    kind = "cylindrical-profile"

    def __init__(self, profile: Profile, n: int = 1, orientation_sign: int = 1):
        self.profile = profile
        super().__init__(n, orientation_sign, Point(np.zeros(n), np.zeros(n), profile.anchor_t))

    def params(self):
        return {"profile": self.profile.profile_id, **self.profile.params()}

    def euclidean_jet(self, p: Point):
        if p.n != self.n:
            raise SpecError(f"surface has n={self.n}, point has n={p.n}")
        return profile_euclidean_jet(self.profile, p)


PROFILES = {
    "gauge": GaugeProfile,
    "ellipsoid": EllipsoidalProfile,
    "ellipsoidal": EllipsoidalProfile,
    "poly": PolynomialProfile,
}


def profile_from_id(profile_id: str, params: dict) -> Profile:
    """Build a catalog profile from its string id and a JSON-style dict."""
    try:
        cls = PROFILES[profile_id]
    except KeyError:
        raise SpecError(f"unknown profile {profile_id!r}; choose from {sorted(PROFILES)}") from None
    params = dict(params)
    if cls is PolynomialProfile:
        terms = params.pop("terms", None)
        if terms is None:
            raise SpecError("poly profile needs 'terms': [[i, j, coeff], ...]")
        try:
            coeffs = [((int(i), int(j)), float(c)) for i, j, c in terms]
        except (TypeError, ValueError):
            raise SpecError("poly terms must be [i, j, coeff] triples") from None
        return PolynomialProfile(coeffs, **params)
    try:
        return cls(**params)
    except TypeError as exc:
        raise SpecError(f"bad parameters for profile {profile_id!r}: {exc}") from None
