"""Kernel backend selection.

The hot kernels (pairwise pose distances, DP relaxation) exist twice: a
compiled Cython extension and a pure-NumPy reference. The compiled one is
used when importable; set ``MOTIONGRAPH_KERNELS=python`` to force the
reference, ``MOTIONGRAPH_KERNELS=cython`` to fail loudly if the extension is
missing. Within one backend results are deterministic; across backends the
low float bits may differ, so caches record which backend built them.
"""

import os

from . import pyref

_requested = os.environ.get("MOTIONGRAPH_KERNELS", "auto").strip().lower() or "auto"

if _requested not in ("auto", "python", "cython"):
    raise ImportError(f"MOTIONGRAPH_KERNELS must be auto, python or cython, got {_requested!r}")

if _requested == "python":
    _impl = pyref
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "MOTIONGRAPH_KERNELS=cython but the compiled extension is not built; "
                "run pip install -e . --no-build-isolation"
            ) from None
        _impl = pyref

BACKEND = _impl.BACKEND_NAME
pair_parts = _impl.pair_parts
pairwise_block = _impl.pairwise_block
dp_relax = _impl.dp_relax
