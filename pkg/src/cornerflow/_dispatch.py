"""Select the Bernoulli-inversion backend at import time.

Set ``CORNERFLOW_PURE=1`` to force the pure-python kernel (used by the
benchmark and as an escape hatch when the extension cannot be built).
"""

import os

if os.environ.get("CORNERFLOW_PURE"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

KERNEL_BACKEND = kernels.BACKEND
