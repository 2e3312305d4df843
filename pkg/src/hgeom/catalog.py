"""Surface construction from a string kind plus a JSON-style parameter dict."""

from __future__ import annotations

from .cylindrical import CylindricalSurface, profile_from_id
from .errors import DimensionError, SpecError
from .surface import GaugeBall, PolynomialSurface, SurfaceSpec

SURFACE_KINDS = ("gauge-ball", "profile:<id>", "custom-polynomial")


def build_surface(kind: str, params: dict, n: int = 1, orientation_sign: int = 1) -> SurfaceSpec:
    """``kind`` is ``gauge-ball``, ``profile:<id>`` or ``custom-polynomial``.

    Unused parameters are an error, so a typo never silently falls back to a
    default value.
    """
    params = {k: v for k, v in params.items() if v is not None}
    try:
        if kind == "gauge-ball":
            _only(params, {"R", "t0"}, kind)
            return GaugeBall(params.get("R", 1.0), params.get("t0", 0.0), n, orientation_sign)
        if kind.startswith("profile:"):
            profile = profile_from_id(kind.split(":", 1)[1], params)
            return CylindricalSurface(profile, n, orientation_sign)
        if kind == "custom-polynomial":
            _only(params, {"terms", "anchor"}, kind)
            if "terms" not in params:
                raise SpecError("custom-polynomial needs 'terms': [[[exponents...], coeff], ...]")
            try:
                terms = [(tuple(int(e) for e in exps), float(c)) for exps, c in params["terms"]]
            except (TypeError, ValueError):
                raise SpecError("polynomial terms must be [[exponents...], coeff] pairs") from None
            return PolynomialSurface(terms, n, params.get("anchor"), orientation_sign)
    except DimensionError as exc:
        raise SpecError(str(exc)) from None
    raise SpecError(f"unknown surface kind {kind!r}; choose from {', '.join(SURFACE_KINDS)}")


def _only(params, allowed, kind):
    extra = sorted(set(params) - allowed)
    if extra:
        raise SpecError(f"{kind} does not take parameter(s) {', '.join(extra)}")
