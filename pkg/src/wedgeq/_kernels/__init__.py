"""Queue-simulation kernels: compiled extension with a NumPy/Python fallback.

The two implementations share one contract (see ``pure.simulate_fifo``).
Their outputs agree to float round-off but are not guaranteed bit-identical
to each other — the vectorized no-rework path accumulates rounding in a
different order than the sequential loop.  Any single installed backend is
fully deterministic.

Set the environment variable WEDGEQ_PURE=1 before import to force the
fallback even when the extension is built.
"""

import os

from . import pure

if os.environ.get("WEDGEQ_PURE") == "1":
    _backend = pure
else:
    try:
        from . import _engine as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = pure

simulate_fifo = _backend.simulate_fifo
IMPL = _backend.IMPL
