"""Numerical laboratory for free boundary CMC annuli and disks in the unit ball."""

__version__ = "0.1.0"

from .errors import (CMCLabError, CertificateError, ConfigError, DomainError,  # noqa: E402
                     GridMismatchError, NoRootError, SingularSystemError)

__all__ = ["__version__", "CMCLabError", "CertificateError", "ConfigError", "DomainError",
           "GridMismatchError", "NoRootError", "SingularSystemError"]
