"""Exception hierarchy shared across the package."""


class HGeomError(Exception):
    """Base class for all errors raised by hgeom."""


class DimensionError(HGeomError, ValueError):
    pass


class GeometryError(HGeomError):
    """A geometric quantity is undefined at the requested point."""


class CharacteristicPointError(GeometryError):
    pass


class DegenerateGradientError(GeometryError):
    pass


class OffSurfaceError(GeometryError):
    pass


class AxisError(GeometryError):
    """Raised where a quantity needs |xi^H| > 0 (off the vertical axis)."""


class PoleError(GeometryError):
    pass


class NonTangentError(GeometryError):
    pass


class SpecError(HGeomError, ValueError):
    """Unknown or malformed surface / profile specification."""


class BisectionError(HGeomError):
    pass


class FlowError(HGeomError):
    pass


class NonPositiveCurvatureError(FlowError, ValueError):
    """c <= 0: the prescribed-curvature argument forces c > 0."""


class NoRootError(FlowError):
    pass


class AmbiguousRootError(FlowError):
    pass


class ConservationError(FlowError):
    pass


class StepSizeError(FlowError):
    pass


class DriftError(FlowError):
    pass


class QuadratureError(FlowError):
    pass
