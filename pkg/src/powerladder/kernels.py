"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation is loaded. ``POWERLADDER_BACKEND=python`` forces the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("POWERLADDER_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
exact_sum = _impl.exact_sum
preference_matrix = _impl.preference_matrix
pair_flows = _impl.pair_flows
share_deltas = _impl.share_deltas
