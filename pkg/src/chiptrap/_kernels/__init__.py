"""Kernel backend selection: compiled extension if available, numpy fallback.

Set CHIPTRAP_BACKEND=python to force the pure-Python backend.
"""

import os

from . import _ref

if os.environ.get("CHIPTRAP_BACKEND", "").lower() == "python":
    _impl = _ref
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _ref

BACKEND = "compiled" if _impl is not _ref else "python"

segment_b_field = _impl.segment_b_field
segment_b_field_gradient = _impl.segment_b_field_gradient
segment_min_distance = _impl.segment_min_distance
rect_potential_matrix = _impl.rect_potential_matrix
rect_potential = _impl.rect_potential
rect_e_field = _impl.rect_e_field
rect_e_field_gradient = _impl.rect_e_field_gradient
cubic_interp = _impl.cubic_interp
verlet_run = _impl.verlet_run
