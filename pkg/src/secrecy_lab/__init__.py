"""Monte Carlo secrecy-rate bounds for block-fading channels with a hybrid jam/eavesdrop adversary."""

from .channel import ChannelModel, GainDist, PowerConfig, eaves_info, main_info, sample_gains
from .coupling import DiscreteDist, EmpiricalDist, lp_oracle, min_positive_gap, solve_coupling
from .delay import DelayConfig, maximize_outage_rate, success_probability
from .errors import ConfigurationError, ConfigurationWarning, UnreachableThresholdError, UsageError
from .estimate import BoundEstimate
from .feedback import maximize_rate, one_bit_lower_bound, rate_at, upper_bound_1bit
from .multi import MultiModel
from .nofeedback import dominance_check, lower_bound, power_scaling_sweep, upper_bound
from .protocol import AdversaryStrategy, run_arq_session, run_delay_session
from .rng import RngStream, set_threads

__version__ = "0.1.0"
