"""Exception types raised by the geometry, solver and analysis layers."""


class AxiWillmoreError(Exception):
    """Base class for all package errors."""


class NonImmersed(AxiWillmoreError):
    pass


class AxisViolation(AxiWillmoreError):
    pass


class DegenerateLength(AxiWillmoreError):
    pass


class ZeroArea(AxiWillmoreError):
    pass


class ConstraintViolated(AxiWillmoreError):
    pass


class ProjectionDiverged(AxiWillmoreError):
    pass


class LineSearchStalled(AxiWillmoreError):
    pass


class NeckCollapse(AxiWillmoreError):
    pass


class BuildFailed(AxiWillmoreError):
    pass


class NotMonotone(AxiWillmoreError):
    pass


class IllConditioned(AxiWillmoreError):
    pass


class WindowEmpty(AxiWillmoreError):
    pass
