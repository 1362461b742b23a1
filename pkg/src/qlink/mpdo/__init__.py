from .evolve import EvolveConfig, GaugeLeakageError, Trajectory, evolve, ground_state_search
from .kernels import GateResult, OpCount, apply_gate_blocked, apply_gate_dense
from .measure import apply_link_projector, energy, expectation, leakage, trace
from .state import MpdoState, from_dense, infinite_temperature_state, product_state, random_state
from .trotter import TrotterSchedule, build_projected_gate, step_gamma, trotter_schedule

__all__ = [
    "EvolveConfig", "GaugeLeakageError", "Trajectory", "evolve", "ground_state_search",
    "GateResult", "OpCount", "apply_gate_blocked", "apply_gate_dense",
    "apply_link_projector", "energy", "expectation", "leakage", "trace",
    "MpdoState", "from_dense", "infinite_temperature_state", "product_state", "random_state",
    "TrotterSchedule", "build_projected_gate", "step_gamma", "trotter_schedule",
]
