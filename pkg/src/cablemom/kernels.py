"""Hot-loop kernels: compiled extension when available, numpy otherwise.

Set ``CABLEMOM_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("CABLEMOM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ckernels import reflected_block_sum  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import reflected_block_sum  # noqa: F401
