"""Hot-kernel selection: compiled Cython extension with pure-Python fallback.

Import order: unless the environment variable ``LAYERWAVES_PURE_PYTHON`` is
set to a non-empty value, try the compiled ``kernels`` extension and fall
back to ``fallback`` when it is missing (e.g. no C compiler at install
time).  Both expose the same functions and produce bit-identical results;
``backend_name()`` reports which one is active.
"""

import os

if os.environ.get("LAYERWAVES_PURE_PYTHON"):
    from . import fallback as _impl
else:
    try:
        from . import kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import fallback as _impl

solve_complex = _impl.solve_complex
det_complex = _impl.det_complex
trace_gradient_ray = _impl.trace_gradient_ray
IS_COMPILED = _impl.IS_COMPILED


def backend_name() -> str:
    return "compiled" if IS_COMPILED else "pure-python"
