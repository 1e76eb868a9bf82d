"""Rate functions and rare-event Monte Carlo for renewal processes.

Numerics for the large-deviation behavior of renewal counting and cumulative
processes: convex conjugates of the log moment generating function, the
contracted rate J_F with its strictly convex / affine regime split at 1/T,
the measure-level functional on mixtures of length-biased laws with mass at
infinity, entropy projections, and importance-sampled verification built from
exponential tilts and one-big-jump proposals.
"""

from .errors import (BracketError, BudgetError, CheckError, DomainError,
                     InfeasibleTargetError, LawParseError, MismatchError,
                     QuadratureError, RenewalLdpError, TailSamplingError)
from .functions import (BivariateTestFunction, BoundedFunction, F_ONE,
                        PiecewiseLinear, parse_f, plateau)
from .laws import (Deterministic, DiscreteAtoms, Empirical, Exponential, Gamma,
                   Pareto, TiltedDensity, WaitingLaw, Weibull, make_rng,
                   parse_law, spawn_rngs)
from .mc import (COUNT_BAND, COUNT_UPPER, CUMUL_BAND, Event, LdpEstimate,
                 NAIVE, TILT, TILT_BIG_JUMP, cumulative_ldp, free_energy_check,
                 is_ldp_heavy, is_ldp_light, naive_ldp, parse_event,
                 tightness_check)
from .ratefn import (AFFINE, DeltaMeasure, INFEASIBLE, RateCurve, STRICT_CONVEX,
                     TiltPair, VariationalResult, ZERO, affine_scan,
                     entropy_projection, legendre_1d, legendre_2d, log_laplace,
                     rate_I, rate_I0, rate_J1_closed, rate_JF,
                     solve_tilt_for_mean, variational_crosscheck_J1)
from .renewal import (PathSummary, RecurrencePair, RenewalPath, counting,
                      cumulative, delta_projection, empirical_integral,
                      recurrence, simulate, simulate_summary)

__version__ = "0.1.0"
