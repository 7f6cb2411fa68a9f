"""Binary-curve ECDSA engine with a 4-segment Karatsuba multiplier model and a
simulated-trace laboratory for horizontal collision correlation analysis."""

__version__ = "0.1.0"

from .gf2m import FieldElement, FieldId  # noqa: E402
from .curve import AffinePoint, CurveParams, load_curve, montgomery_kp  # noqa: E402
from .leakage import LeakageModel, Trace  # noqa: E402

__all__ = [
    "AffinePoint",
    "CurveParams",
    "FieldElement",
    "FieldId",
    "LeakageModel",
    "Trace",
    "load_curve",
    "montgomery_kp",
]
