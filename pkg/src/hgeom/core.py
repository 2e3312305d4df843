"""Group structure and left-invariant frame of the Heisenberg group H^n.

Vectors are plain numpy arrays holding coefficients in the orthonormal frame
``{X_1..X_n, Y_1..Y_n, T}``.  A horizontal vector has length ``2n`` (the
``X`` block followed by the ``Y`` block); an ambient vector has length
``2n + 1`` with the ``T`` coefficient last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

MAX_DIM = 8


@dataclass(frozen=True, eq=False)
class Point:
    """A point (x, y, t) of H^n."""

    x: np.ndarray
    y: np.ndarray
    t: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise DimensionError(f"x has length {x.size}, y has length {y.size}")
        if not 1 <= x.size <= MAX_DIM:
            raise DimensionError(f"n must lie in [1, {MAX_DIM}], got {x.size}")
        t = float(self.t)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.isfinite(t)):
            raise ValueError("point components must be finite")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def from_array(cls, arr) -> "Point":
        arr = np.asarray(arr, dtype=float).reshape(-1)
        if arr.size % 2 != 1:
            raise DimensionError(f"expected 2n+1 coordinates, got {arr.size}")
        n = arr.size // 2
        return cls(arr[:n], arr[n:2 * n], arr[2 * n])

    @classmethod
    def origin(cls, n: int) -> "Point":
        return cls(np.zeros(n), np.zeros(n), 0.0)

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.x, self.y, [self.t]])

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return (np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
                and self.t == other.t)

    def __hash__(self):
        return hash((self.x.tobytes(), self.y.tobytes(), self.t))

    def __repr__(self):
        return f"Point(x={self.x.tolist()}, y={self.y.tolist()}, t={self.t!r})"


def _check_same_dim(p: Point, q: Point):
    if p.n != q.n:
        raise DimensionError(f"dimension mismatch: n={p.n} vs n={q.n}")


def group_mul(p: Point, q: Point) -> Point:
    """Group law ``p o q``."""
    _check_same_dim(p, q)
    t = p.t + q.t + 2.0 * float(np.dot(p.x, q.y) - np.dot(p.y, q.x))
    return Point(p.x + q.x, p.y + q.y, t)


def group_inv(p: Point) -> Point:
    return Point(-p.x, -p.y, -p.t)


def dilate(R: float, p: Point) -> Point:
    """Anisotropic dilation ``(Rx, Ry, R^2 t)``."""
    if not R > 0:
        raise ValueError(f"dilation factor must be positive, got {R}")
    return Point(R * p.x, R * p.y, R * R * p.t)


def gauge_norm(p: Point) -> float:
    r2 = float(np.dot(p.x, p.x) + np.dot(p.y, p.y))
    return (r2 * r2 + p.t * p.t) ** 0.25


def dim_of(vec: np.ndarray, ambient: bool = True) -> int:
    size = np.shape(vec)[-1]
    if ambient:
        if size % 2 != 1:
            raise DimensionError(f"ambient vector must have odd length, got {size}")
        return size // 2
    if size % 2 != 0:
        raise DimensionError(f"horizontal vector must have even length, got {size}")
    return size // 2


def inner(u, v) -> float:
    """Metric inner product; the frame is orthonormal."""
    return float(np.dot(u, v))


def j_apply(h) -> np.ndarray:
    """Complex structure on the horizontal distribution: (a, b) -> (-b, a).

    Accepts horizontal (2n) or ambient (2n+1) arrays; for ambient input the
    T coefficient is dropped, i.e. J is applied to the horizontal projection.
    """
    h = np.asarray(h, dtype=float)
    if h.shape[-1] % 2 == 1:
        n = h.shape[-1] // 2
        out = np.zeros_like(h)
        out[..., :n] = -h[..., n:2 * n]
        out[..., n:2 * n] = h[..., :n]
        return out
    n = h.shape[-1] // 2
    return np.concatenate([-h[..., n:], h[..., :n]], axis=-1)


def horizontal(v) -> np.ndarray:
    """Horizontal projection of an ambient vector, as a length-2n array."""
    v = np.asarray(v, dtype=float)
    return v[..., :-1].copy()


def ambient(h, c: float = 0.0) -> np.ndarray:
    """Lift a horizontal vector to an ambient one with T coefficient ``c``."""
    return np.append(np.asarray(h, dtype=float), c)


def frame_basis(n: int) -> np.ndarray:
    """Rows are the coefficient vectors of X_1..X_n, Y_1..Y_n, T."""
    return np.eye(2 * n + 1)


def frame_to_euclidean(v, p: Point) -> np.ndarray:
    """Euclidean components (dx, dy, dt) of the frame vector ``v`` at ``p``.

    Uses X_j = d/dx_j - 2 y_j d/dt and Y_j = d/dy_j + 2 x_j d/dt.
    """
    v = np.asarray(v, dtype=float)
    n = p.n
    a, b = v[:n], v[n:2 * n]
    c = v[2 * n] if v.size == 2 * n + 1 else 0.0
    dt = c + 2.0 * (np.dot(p.x, b) - np.dot(p.y, a))
    return np.concatenate([a, b, [dt]])


def frame_matrix(p: Point) -> np.ndarray:
    """Rows give the Euclidean components of each frame field at ``p``."""
    n = p.n
    m = np.eye(2 * n + 1)
    m[:n, 2 * n] = -2.0 * p.y
    m[n:2 * n, 2 * n] = 2.0 * p.x
    return m


@dataclass(frozen=True)
class FieldJet:
    """A vector field's frame coefficients at a point together with their
    derivative along one direction (the caller supplies the derivative)."""

    value: np.ndarray
    directional_derivative: np.ndarray


def connection_term(z, w) -> np.ndarray:
    """Connection part of nabla_Z W for frame coefficients held fixed.

    Bilinear extension of the table
    nabla_{X_i} Y_j = 2 delta_ij T,  nabla_{X_i} T = -2 Y_i,
    nabla_{Y_i} X_j = -2 delta_ij T, nabla_{Y_i} T = 2 X_i,
    nabla_T X_i = -2 Y_i,            nabla_T Y_i = 2 X_i,
    with all other pairs zero.
    """
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    n = dim_of(z)
    if w.size != z.size:
        raise DimensionError("direction and field dimension differ")
    za, zb, zc = z[:n], z[n:2 * n], z[2 * n]
    wa, wb, wc = w[:n], w[n:2 * n], w[2 * n]
    out = np.empty_like(z)
    out[:n] = 2.0 * zb * wc + 2.0 * zc * wb
    out[n:2 * n] = -2.0 * za * wc - 2.0 * zc * wa
    out[2 * n] = 2.0 * (np.dot(za, wb) - np.dot(zb, wa))
    return out


def covariant_derivative(field: FieldJet, direction) -> np.ndarray:
    """Levi-Civita derivative nabla_Z W.

    ``field.directional_derivative`` must hold Z applied to each frame
    coefficient of W, with Z = ``direction``.
    """
    value = np.asarray(field.value, dtype=float)
    deriv = np.asarray(field.directional_derivative, dtype=float)
    return deriv + connection_term(direction, value)


def lie_bracket(v, w, deriv_w_along_v, deriv_v_along_w) -> np.ndarray:
    """[V, W] = nabla_V W - nabla_W V (the connection is torsion free)."""
    return (covariant_derivative(FieldJet(w, deriv_w_along_v), v)
            - covariant_derivative(FieldJet(v, deriv_v_along_w), w))


def horizontal_position(p: Point) -> np.ndarray:
    """Frame coefficients of xi^H = sum x_j X_j + y_j Y_j."""
    return np.concatenate([p.x, p.y])


def position_jet(p: Point, direction) -> FieldJet:
    """xi^H as an ambient field with its coefficient derivatives along Z.

    The coefficients are the coordinates x_j, y_j, so Z(x_j) and Z(y_j) are
    the X_j and Y_j components of Z.
    """
    direction = np.asarray(direction, dtype=float)
    value = ambient(horizontal_position(p))
    deriv = direction.copy()
    deriv[-1] = 0.0
    return FieldJet(value, deriv)


def t_derivative(p: Point, z) -> float:
    """Z(t) for horizontal Z, equal to -2<J(Z), xi^H>."""
    z = np.asarray(z, dtype=float)
    h = z[:-1] if z.size % 2 == 1 else z
    return -2.0 * inner(j_apply(h), horizontal_position(p))
