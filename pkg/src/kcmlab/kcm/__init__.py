"""Continuous-time kinetically constrained dynamics and exact small-system spectra."""
from .constraints import Boundary, build_table, constraint
from .dynamics import KcmParams, KcmTrace, run_kcm, sample_tau0_kcm
from .exact import GammaResult, SmallSystem, exact_gamma, exact_variance_tools
