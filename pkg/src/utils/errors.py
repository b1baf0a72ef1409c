"""Exception hierarchy shared by every package"""


class SinkhornLabError(Exception):
    """Base class for contract violations raised by the library"""


class MeasureError(SinkhornLabError, ValueError):
    """Invalid discrete measure (empty support, off-sphere points, misaligned supports)"""


class GeometryMismatchError(SinkhornLabError, ValueError):
    """Operands live on different geometries"""


class CostDomainError(SinkhornLabError, ValueError):
    """Point or tangent vector outside the domain where a cost oracle is smooth"""


class ShapeMismatchError(SinkhornLabError, ValueError):
    """Arrays that must be aligned atom-by-atom are not"""


class ProbeError(SinkhornLabError, ValueError):
    """Finite-difference stencil or probe leaves its admissible region"""


class ProblemSizeError(SinkhornLabError, ValueError):
    """Exact transport instance larger than the supported desk scale"""


class RunMismatchError(SinkhornLabError, ValueError):
    """States passed together do not come from consecutive iterations of one run"""


class ConfigError(SinkhornLabError, ValueError):
    """Invalid experiment configuration; carries every diagnostic found"""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))
