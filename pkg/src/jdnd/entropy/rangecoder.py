"""Range-coder backend selection.

The compiled extension is preferred; the pure-Python twin is used when the
extension is unavailable. ``JDND_RANGECODER=py`` (or ``c``) forces a backend.
Both produce byte-identical streams.
"""

from __future__ import annotations

import os

from . import _rangecoder_py

_FORCED = os.environ.get("JDND_RANGECODER", "").lower()

if _FORCED in ("py", "python", "pure"):
    _impl = _rangecoder_py
else:
    try:
        from . import _rangecoder_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _FORCED in ("c", "cy", "cython"):
            raise ImportError(
                "JDND_RANGECODER forces the compiled backend but the "
                "extension is not built; run pip install -e . --no-build-isolation"
            )
        _impl = _rangecoder_py

RangeEncoder = _impl.RangeEncoder
RangeDecoder = _impl.RangeDecoder

TOTAL_FREQ = 1 << 16


def backend_name() -> str:
    return "compiled" if _impl.__name__.endswith("_cy") else "pure-python"


def get_backend(name: str):
    """Return (RangeEncoder, RangeDecoder) for an explicit backend name."""
    if name in ("py", "pure-python"):
        return _rangecoder_py.RangeEncoder, _rangecoder_py.RangeDecoder
    if name in ("c", "compiled"):
        from . import _rangecoder_cy

        return _rangecoder_cy.RangeEncoder, _rangecoder_cy.RangeDecoder
    raise ValueError(f"unknown range coder backend {name!r}")
