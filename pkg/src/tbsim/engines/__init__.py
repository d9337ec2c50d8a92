from .analytic import (
    CarCurve,
    FringeScan,
    RateSet,
    analytic_car_curve,
    analytic_fringe_scan,
    analytic_rates,
)
from .model import DetectionModel, build_model
from .montecarlo import mc_car_curve, mc_fringe_scan, mc_run, run_model

__all__ = [
    "CarCurve",
    "DetectionModel",
    "FringeScan",
    "RateSet",
    "analytic_car_curve",
    "analytic_fringe_scan",
    "analytic_rates",
    "build_model",
    "mc_car_curve",
    "mc_fringe_scan",
    "mc_run",
    "run_model",
]
