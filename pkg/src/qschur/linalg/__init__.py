"""Dense kernels: Householder QR/RQ, (periodic) Schur forms and test oracles."""

from .householder import QRFactors, RQFactors, qr, rq
from .periodic import PeriodicSchurFactors, complex_schur, periodic_schur, real_schur
from .rectangular import CompressedCycle, rectangular_cycle_compress

__all__ = [
    "CompressedCycle", "PeriodicSchurFactors", "QRFactors", "RQFactors",
    "complex_schur", "periodic_schur", "qr", "real_schur", "rectangular_cycle_compress", "rq",
]
