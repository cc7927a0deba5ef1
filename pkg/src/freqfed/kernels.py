"""Backend selection for the hot loops.

The compiled extension is used when importable; otherwise the numpy fallback.
``FREQFED_BACKEND=python`` forces the fallback, ``FREQFED_BACKEND=compiled``
makes a missing extension an import error.
"""

import os

from . import _fallback

_requested = os.environ.get("FREQFED_BACKEND", "auto").lower()
if _requested not in ("auto", "python", "compiled"):
    raise ImportError(f"FREQFED_BACKEND must be auto, python or compiled, got {_requested!r}")

_compiled = None
if _requested != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        if _requested == "compiled":
            raise

if _compiled is not None:
    BACKEND = "compiled"
    fft_rows = _compiled.fft_rows
    box_mean3 = _compiled.box_mean3
    directed_hausdorff_sq = _compiled.directed_hausdorff_sq
else:
    BACKEND = "python"
    fft_rows = _fallback.fft_rows
    box_mean3 = _fallback.box_mean3
    directed_hausdorff_sq = _fallback.directed_hausdorff_sq


def compiled_module():
    """The compiled kernel module, or None when it is not built."""
    return _compiled
