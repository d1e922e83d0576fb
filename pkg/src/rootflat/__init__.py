"""Hamilton decompositions of the directed torus D_7(m) via root-flat certificates."""

from .certificate import Certificate, check_certificate
from .certificate_io import read_certificate, write_certificate
from .counts import build_schedule, count_matrix_for
from .lift import lift_certificate, verify_decomposition

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "build_schedule",
    "check_certificate",
    "count_matrix_for",
    "lift_certificate",
    "read_certificate",
    "verify_decomposition",
    "write_certificate",
]
