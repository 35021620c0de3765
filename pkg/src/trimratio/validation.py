"""Input validation helpers for paired (denominator, numerator) samples."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def as_float_1d(x, name: str = "array") -> np.ndarray:
    """Coerce to a 1-d float array; a single column is accepted and flattened."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValidationError(
            f"{name} must be one-dimensional (or a single column), got shape {arr.shape}"
        )
    return arr


def check_ab(a, b, *, unit_interval: bool = True, min_n: int = 2):
    """Validate a paired sample of denominators and numerators.

    Denominators must be finite and strictly positive; when ``unit_interval``
    is set they must additionally lie in (0, 1]. Returns the pair as float
    arrays.
    """
    a = as_float_1d(a, "denominators")
    b = as_float_1d(b, "numerators")
    if a.size != b.size:
        raise ValidationError(
            f"denominators and numerators differ in length ({a.size} vs {b.size})"
        )
    if a.size < min_n:
        raise ValidationError(f"need at least {min_n} observations, got {a.size}")
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise ValidationError("sample contains non-finite values")
    bad = np.flatnonzero(a <= 0)
    if bad.size:
        shown = ", ".join(str(i) for i in bad[:10])
        more = "" if bad.size <= 10 else f" (+{bad.size - 10} more)"
        raise ValidationError(
            "denominators must be strictly positive; no mass at zero is allowed. "
            f"Offending indices: {shown}{more}"
        )
    if unit_interval and np.any(a > 1):
        raise ValidationError(
            "denominators must lie in (0, 1]; rescale the sample first "
            "(see normalize_pairs)"
        )
    return a, b


def normalize_pairs(a, b):
    """Rescale both coordinates by max(a) when max(a) > 1.

    The joint rescaling leaves every ratio b/a, and therefore the estimand,
    unchanged. Returns (a, b, scale) with scale = 1.0 when no rescaling was
    needed.
    """
    a, b = check_ab(a, b, unit_interval=False)
    scale = float(np.max(a))
    if scale > 1.0:
        return a / scale, b / scale, scale
    return a, b, 1.0


def readonly(arr: np.ndarray) -> np.ndarray:
    """Own a copy of ``arr`` and mark it read-only."""
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out
