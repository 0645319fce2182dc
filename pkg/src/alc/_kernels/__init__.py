"""Hot-kernel backend selection.

The compiled Cython module is used when available; the numpy fallback in
``pure.py`` has identical semantics. Set ``ALC_PURE_PYTHON=1`` to force
the fallback (used by the benchmark and the backend-equivalence tests).
"""

import os

from alc._kernels import pure

if os.environ.get("ALC_PURE_PYTHON"):
    _impl = pure
    BACKEND = "python"
else:
    try:
        from alc._kernels import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "python"

max_pairwise_dist = _impl.max_pairwise_dist
lm_bilinear = _impl.lm_bilinear
lm_bilinear_multi = _impl.lm_bilinear_multi
