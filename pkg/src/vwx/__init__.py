"""Rotating patch/point-vortex solutions: spectra, continuation, contour dynamics."""

import os as _os

# VWX_THREADS caps BLAS/OpenMP worker threads; it only takes effect when set
# before numpy is first imported.
_threads = _os.environ.get("VWX_THREADS")
if _threads:
    if not _threads.isdigit() or int(_threads) < 1:
        raise ValueError(f"VWX_THREADS must be a positive integer, got {_threads!r}")
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .contour import AnnulusParams, ContourState, EvenSeries, OddSeries  # noqa: E402
from .errors import (AdmissibilityError, AliasingError, JacobianSingular, NegativeDiscriminant,  # noqa: E402
                     NoConvergence, NotFound, SingularityError, TopologyBreach, VWXError, ZeroOmega)
from .quadrature import QuadratureSpec  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "AnnulusParams", "ContourState", "EvenSeries", "OddSeries", "QuadratureSpec", "__version__",
    "VWXError", "AdmissibilityError", "AliasingError", "SingularityError", "NegativeDiscriminant",
    "NotFound", "ZeroOmega", "NoConvergence", "JacobianSingular", "TopologyBreach",
]
