"""Linearly constrained weights: zero-sum weight reparameterization for
dense and convolutional layers, with variance-propagation diagnostics.

The heavy lifting lives in the compiled ``_core`` extension; this package
re-exports its functions.
"""

try:
    from lcwnet._core import (  # type: ignore[import-not-found]
        build_basis,
        gradcheck,
        lift,
        matmul,
        measure_phi,
        measure_shift,
        project,
        qr_thin,
        summarize,
        train,
        verify_props,
    )
except ImportError:  # running against a build tree, module is top-level
    from _core import (  # type: ignore[import-not-found]
        build_basis,
        gradcheck,
        lift,
        matmul,
        measure_phi,
        measure_shift,
        project,
        qr_thin,
        summarize,
        train,
        verify_props,
    )

__all__ = [
    "build_basis",
    "gradcheck",
    "lift",
    "matmul",
    "measure_phi",
    "measure_shift",
    "project",
    "qr_thin",
    "summarize",
    "train",
    "verify_props",
]
