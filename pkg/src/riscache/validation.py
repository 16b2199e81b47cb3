"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

UNIT_MODULUS_TOL = 1e-12


def check_complex_array(a, ndim=None, name="array"):
    """Return ``a`` as a finite complex128 array, checking its rank."""
    arr = np.asarray(a, dtype=np.complex128)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_real_array(a, ndim=None, name="array"):
    arr = np.asarray(a, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_unit_modulus(x, tol=UNIT_MODULUS_TOL, name="x"):
    """Validate a point on the complex circle manifold."""
    x = check_complex_array(x, ndim=1, name=name)
    dev = np.max(np.abs(np.abs(x) - 1.0)) if x.size else 0.0
    if dev > tol:
        raise ValueError(f"{name} is not unit modulus (max deviation {dev:.3e})")
    return x


def check_scalar(value, name, min_val=None, max_val=None, include_min=True,
                 target_type=numbers.Real):
    """Validate a scalar against type and range, mirroring sklearn's helper."""
    if not isinstance(value, target_type) or isinstance(value, bool):
        raise TypeError(f"{name} must be {target_type.__name__}, got {type(value).__name__}")
    if isinstance(value, numbers.Real) and not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if min_val is not None:
        if (include_min and value < min_val) or (not include_min and value <= min_val):
            op = ">=" if include_min else ">"
            raise ValueError(f"{name} must be {op} {min_val}, got {value}")
    if max_val is not None and value > max_val:
        raise ValueError(f"{name} must be <= {max_val}, got {value}")
    return value


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None or isinstance(seed, (numbers.Integral, np.random.SeedSequence)):
        return np.random.default_rng(seed)
    raise TypeError(f"cannot build a Generator from {seed!r}")


def check_is_fitted(estimator, attributes):
    from sklearn.exceptions import NotFittedError

    if isinstance(attributes, str):
        attributes = [attributes]
    if not all(getattr(estimator, a, None) is not None for a in attributes):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet. "
            "Call 'fit' before using this estimator."
        )
