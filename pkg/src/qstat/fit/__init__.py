from qstat.fit.config import DEFAULT_BOUNDS, FIT_FOCK, FitConfig
from qstat.fit.forward import forward
from qstat.fit.loss import INVALID_LOSS, curve_loss, loss, loss_breakdown
from qstat.fit.observables import EXTENDED, FITTED, ObservableCurve, ObservableKind
from qstat.fit.optimize import FitResult, StageRecord, fit
from qstat.fit.space import ParameterSpace

__all__ = [
    "DEFAULT_BOUNDS",
    "EXTENDED",
    "FITTED",
    "FIT_FOCK",
    "INVALID_LOSS",
    "FitConfig",
    "FitResult",
    "ObservableCurve",
    "ObservableKind",
    "ParameterSpace",
    "StageRecord",
    "curve_loss",
    "fit",
    "forward",
    "loss",
    "loss_breakdown",
]
