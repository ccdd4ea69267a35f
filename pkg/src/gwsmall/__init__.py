"""Critical Galton-Watson processes with heavy-tailed offspring, conditioned
on a small positive population at a distant time."""
from .config import ExperimentConfig, load_config, parse_config
from .estimate import (
    EventSpec,
    McEstimate,
    ReducedEstimate,
    estimate_conditional_lst,
    estimate_event_prob,
    estimate_reduced_pmf,
    estimate_regimes,
)
from .exact import FiniteHorizon
from .gf import ExtinctionTable, TableRangeError, build_table
from .inversion import InversionAccuracyError, euler, invert_cdf, talbot
from .limits import (
    bell_at_ones,
    lemma_proper_sum,
    m_cdf,
    m_conv_cdf,
    mrca_limit_cdf,
    reduced_limit_pmf,
    reduced_limit_pmfs,
    reduced_limit_tail_bound,
    regime4_transform,
    regime_transform,
    small_deviation_prob,
    stirling2,
    yaglom_lst,
)
from .offspring import GeometricCriticalLaw, OffspringLaw, StableOffspringLaw, UnitOffspringLaw, parse_law
from .regimes import RegimeSpec
from .simulate import ReducedCounts, Trajectory, sample, simulate_reduced, simulate_trajectory

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
