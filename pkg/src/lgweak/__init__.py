"""Exact weak-measurement simulation with Laguerre-Gauss pointers.

Simulates the impulsive coupling g (A (x) Px + B (x) Py) between a
finite-dimensional system and a 2D probe, post-selects, and recovers single
and joint weak values from the probe's first- and second-order spatial
displacements.
"""
from .errors import *  # noqa: F401,F403
from .evolution import ScenarioConfig, couple_and_postselect, simulate_displacements
from .extraction import (
    Method,
    WeakValueEstimate,
    equal_squares_check,
    extract_joints_two_probe,
    extract_l2_sum_difference,
    extract_single_probe_equal_squares,
    extract_singles_two_probe,
)
from .perturbative import analytic_first_order, analytic_second_order, predict_displacement
from .probe_field import DisplacementSet, GridSpec, OperatorWord, ProbeField, Rep, expectation, lg_mode, transform
from .quantum_core import (
    Observable,
    SystemState,
    WeakValueReport,
    joint_weak_value_report,
    tensor_product,
    unitary_exp,
    weak_value,
)
from .scenario import load_bundled, parse_scenario

__version__ = "0.1.0"
