"""Weekly stochastic dynamic programming for storage usage values.

The package computes weekly Bellman value functions for a single storage
coupled to a thermal fleet, under two information structures: weekly
hazard-decision (all weekly controls wait-and-see) and weekly
decision-hazard-decision (slow-unit commitments here-and-now, everything
else recourse). Usage values are the negated finite-difference slopes of
those tables; policies induced by either table can be simulated over
full-horizon chronicles.
"""

__version__ = "0.1.0"

from .errors import (ConfigError, GuardExceeded, ScenarioFormatError,
                     SolverFailure, UsageValuesError)
from .intraweek import (CostToGo, DhdWeekSolution, WeekSolution,
                        evaluate_recourse, solve_week_dhd, solve_week_hd)
from .oracles import (ScenarioTreeNode, brute_force_week, tree_from_blocks,
                      wphr_week_toy)
from .policy_sim import (DispatchTrace, KpiSummary, aggregate_kpis,
                         simulate_chronicle)
from .pwl import PiecewiseLinear, linear_fn
from .scenario_io import (Chronicle, ScenarioSet, SynthSpec, WeekBlock,
                          load_chronicles, load_scenarios, save_chronicles,
                          save_scenarios, synthesize_case_study)
from .sdp import (BellmanTable, ComparisonReport, StateGrid, compare_tables,
                  eval_bellman, solve_bellman_dhd, solve_bellman_hd,
                  usage_value_series, usage_values)
from .system_model import (HourlyControl, HourlyUncertainty, Storage,
                           SystemModel, ThermalUnit, balance_residual,
                           hourly_cost, hourly_dynamics, production,
                           weekly_cost, weekly_dynamics)
from .timeline import TimeIndex, Timeline, successor, week_closed_block, week_open_block

__all__ = [name for name in dir() if not name.startswith("_")]
