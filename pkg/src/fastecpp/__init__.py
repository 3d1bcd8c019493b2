"""Elliptic curve primality proving toolkit.

Builds primality certificates by the CM downrun (candidate search over a
discriminant pool, Cornacchia, batched trial division, Miller-Rabin, then
Hilbert class polynomials and curve construction) and verifies them
independently.
"""

from .errors import CompositeDetected, GiveUp, CertificateFormatError
from .prover import ProveConfig, prove
from .cert import Certificate, CertStep, verify, verify_step, serialize, parse

__version__ = "0.1.0"

__all__ = [
    "CompositeDetected",
    "GiveUp",
    "CertificateFormatError",
    "ProveConfig",
    "prove",
    "Certificate",
    "CertStep",
    "verify",
    "verify_step",
    "serialize",
    "parse",
    "__version__",
]
