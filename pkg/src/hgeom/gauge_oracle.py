"""Closed-form geometry of gauge spheres dB_R(0, 0, t0).

Nothing here goes through jets or connection tables, so these values act as
an independent check on :mod:`hgeom.surface`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .core import Point, inner, j_apply
from .errors import NonTangentError, OffSurfaceError, PoleError, SpecError
from .surface import sample_rng

POLE_BAND = 1e-3


@dataclass(frozen=True)
class SphereSpec:
    R: float = 1.0
    t0: float = 0.0
    n: int = 1

    def __post_init__(self):
        if not self.R > 0:
            raise SpecError(f"sphere radius must be positive, got {self.R}")
        if not 1 <= self.n <= core.MAX_DIM:
            raise SpecError(f"n must lie in [1, {core.MAX_DIM}]")

    @property
    def curvature_constant(self) -> float:
        """c with H = c|xi^H| on this sphere: (2n+1) / ((2n-1) R^2)."""
        n = self.n
        return (2 * n + 1) / ((2 * n - 1) * self.R ** 2)

    @property
    def phi_v_constant(self) -> float:
        """Common value of phi_v, (2n-1)c/(2n+1) * (t0 - R^2) + 1."""
        n = self.n
        return (2 * n - 1) * self.curvature_constant / (2 * n + 1) * (self.t0 - self.R ** 2) + 1.0


@dataclass(frozen=True)
class OracleFrame:
    r: float
    p_h_norm: float
    nu_t: float
    nu_h: np.ndarray
    eta: np.ndarray

    @property
    def alpha(self) -> float:
        return 2.0 * self.nu_t / self.p_h_norm


def _check(s: SphereSpec, p: Point):
    if p.n != s.n:
        raise SpecError(f"sphere has n={s.n}, point has n={p.n}")
    xih = core.horizontal_position(p)
    r = float(np.linalg.norm(xih))
    d = p.t - s.t0
    if abs(r ** 4 + d * d - s.R ** 4) >= 1e-10 * s.R ** 4:
        raise OffSurfaceError("point is not on the gauge sphere")
    if r == 0.0:
        raise PoleError("frame is undefined at the poles (0, 0, t0 +- R^2)")
    return xih, r, d


def sphere_frame(s: SphereSpec, p: Point) -> OracleFrame:
    xih, r, d = _check(s, p)
    R2 = s.R ** 2
    den = np.sqrt(4.0 * r * r * R2 * R2 + d * d)
    jx = j_apply(xih)
    nu_h = (r * r * xih + d * jx) / (r * R2)
    eta = (d * xih - r * r * jx) / (r * R2)
    return OracleFrame(r, 2.0 * r * R2 / den, d / den, nu_h, eta)


def sphere_shape(s: SphereSpec, p: Point, z):
    """(A_M(z), H, k, l) for a horizontal tangent vector z."""
    z = np.asarray(z, dtype=float)
    fr = sphere_frame(s, p)
    if abs(inner(z, fr.nu_h)) > 1e-10 * (1.0 + np.linalg.norm(z)):
        raise NonTangentError("z must be orthogonal to nu^H")
    R2 = s.R ** 2
    k = fr.r / R2
    az = 2.0 * k * inner(fr.eta, z) * fr.eta + k * z
    n = s.n
    return az, (2 * n + 1) / (2 * n - 1) * k, k, 3.0 * k


def sphere_point(s: SphereSpec, seed: int, index: int) -> Point:
    """Sample ``index`` of the seeded stream, away from the pole band.

    The height is uniform in the admissible range (|xi^H| >= POLE_BAND * R)
    and the horizontal direction uniform on the unit sphere of R^{2n}.
    """
    R2 = s.R ** 2
    smax = np.sqrt(1.0 - POLE_BAND ** 4)
    rng = sample_rng(seed, index)
    u = rng.uniform(-smax, smax)
    d = rng.standard_normal(2 * s.n)
    d /= np.linalg.norm(d)
    h = s.R * (1.0 - u * u) ** 0.25 * d
    return Point(h[:s.n], h[s.n:], s.t0 + u * R2)


def sphere_sample(s: SphereSpec, count: int, seed: int = 0) -> list:
    if count < 1:
        raise ValueError("count must be >= 1")
    return [sphere_point(s, seed, i) for i in range(count)]
