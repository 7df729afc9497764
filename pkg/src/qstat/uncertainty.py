"""First-order (delta-method) error propagation from Poissonian counts."""

from collections.abc import Callable

import numpy as np
from scipy.optimize import approx_fprime

from qstat.exceptions import QstatError
from qstat.log import logger

RELATIVE_STEP = 1e-6


def propagate(func: Callable[[np.ndarray], float], counts: np.ndarray) -> float:
    """1-sigma uncertainty of func(counts) for independent counts with variance = count."""
    counts = np.asarray(counts, dtype=float)
    step = RELATIVE_STEP * np.maximum(np.abs(counts), 1.0)
    try:
        gradient = approx_fprime(counts, func, step)
    except QstatError as e:
        logger.debug(f"No uncertainty, a perturbed record is invalid: {e}")
        return float("nan")
    return float(np.sqrt(np.sum(gradient**2 * counts)))
