"""Reachability for unordered data Petri nets with rational token counts.

Markings assign rational token amounts to (place, data value) pairs.  The
package decides whether a final marking is reachable from an initial one,
either with arbitrary rational intermediate markings (mode "q") or with all
intermediate markings nonnegative (mode "qplus"), and produces a validated
witness run whenever the answer is positive.
"""

from .core import (InternalError, Marking, Net, Run, Step, UdpnError,
                   SparseMatrix, as_fraction, delta, make_step, sorted_data)
from .semantics import (MODE_Q, MODE_QPLUS, Failure, Verdict, fire_step,
                        pre_set, post_set, run_effect, step_consumption,
                        step_effect, step_fireable, validate_run)
from .histograms import (Histogram, add_histograms, check_histogram,
                         decompose, expand_to_steps, hist_of_run, histogram,
                         scale_histogram)
from .transforms import (LoopMapping, data_bound_size, decrease,
                         project_witness, reduce_data, replace, rotate,
                         to_loopless, uniformize)
from .linsolve import (ImplicationSystem, LinearSystem, REL_EQ, REL_GE,
                       REL_LE, feasible, max_support, solve_implications)
from .reach import (DataUniverse, ReachResult, ReachStats, data_bound,
                    encode_qplus, extract_witness, full_block_bounds,
                    q_reach, qplus_reach)
from .oracle import (GenConfig, brute_implication, naive_q_reach,
                     random_marking, random_net, random_run)
from .textio import (ParseError, parse_histogram, parse_marking, parse_net,
                     parse_run, serialize_histogram, serialize_marking,
                     serialize_net, serialize_run)

__all__ = [
    "InternalError", "Marking", "Net", "Run", "Step", "UdpnError",
    "SparseMatrix", "as_fraction", "delta", "make_step", "sorted_data",
    "MODE_Q", "MODE_QPLUS", "Failure", "Verdict", "fire_step", "pre_set",
    "post_set", "run_effect", "step_consumption", "step_effect",
    "step_fireable", "validate_run",
    "Histogram", "add_histograms", "check_histogram", "decompose",
    "expand_to_steps", "hist_of_run", "histogram", "scale_histogram",
    "LoopMapping", "data_bound_size", "decrease", "project_witness",
    "reduce_data", "replace", "rotate", "to_loopless", "uniformize",
    "ImplicationSystem", "LinearSystem", "REL_EQ", "REL_GE", "REL_LE",
    "feasible", "max_support", "solve_implications",
    "DataUniverse", "ReachResult", "ReachStats", "data_bound",
    "encode_qplus", "extract_witness", "full_block_bounds", "q_reach",
    "qplus_reach",
    "GenConfig", "brute_implication", "naive_q_reach", "random_marking",
    "random_net", "random_run",
    "ParseError", "parse_histogram", "parse_marking", "parse_net",
    "parse_run", "serialize_histogram", "serialize_marking", "serialize_net",
    "serialize_run",
]
