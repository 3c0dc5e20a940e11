"""Rotation numbers, gap labels and Green functions for Sturm-Liouville
operators with almost periodic (trigonometric polynomial) coefficients."""

from .apfun import (CoefficientTriple, FrequencyBase, FrequencyModule, TrigPolynomial,
                    constant_triple, evaluate, fourier_coefficient, hull_min, mean_value,
                    module_of, shift)
from .errors import (AmbiguousFrequency, BaseMismatch, DimensionError, HorizonExceeded,
                     NoLabelWithinTol, NonFiniteState, NotDecayed, NotPeriodic, ParseError,
                     PositivityError, SLRotError, StepLimitExceeded, WronskianVanished)
from .prufer import PruferAngle, evolve
from .rotation import RotationEstimate, rho, rho_angle, rho_zeros
from .scan import ScanConfig, detect_plateaus, label_gap, scan, scan_rho
from .weylgreen import green_diag, m_minus, m_plus

__version__ = "0.1.0"
