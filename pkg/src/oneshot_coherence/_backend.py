"""Select the compiled kernels when available, else the numpy fallback."""
import os

if os.environ.get("ONESHOT_COHERENCE_PURE_PYTHON"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

capped_fidelity = kernels.capped_fidelity
grid_search = kernels.grid_search
grid_bbox = kernels.grid_bbox

__all__ = ["BACKEND", "capped_fidelity", "grid_bbox", "grid_search", "kernels"]
