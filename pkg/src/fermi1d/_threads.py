"""Thread-count cap, applied before numpy is imported anywhere in the package.

The environment variable ``FERMI1D_THREADS`` caps the BLAS/OpenMP pools used
internally.  Values already set explicitly in the environment win.
"""

import os

_cap = os.environ.get("FERMI1D_THREADS")
if _cap:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS"):
        os.environ.setdefault(_var, _cap)
