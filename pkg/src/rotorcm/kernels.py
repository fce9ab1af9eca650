"""Backend selection for the hot kernels.

Prefers the compiled Cython extension; falls back to the pure-numpy
implementation when the extension is missing or ROTORCM_PURE_PYTHON=1.
"""

import os

from rotorcm import _kernels_py

if os.environ.get("ROTORCM_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from rotorcm import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

haar_wpt_energies = _impl.haar_wpt_energies
best_split_gini = _impl.best_split_gini
