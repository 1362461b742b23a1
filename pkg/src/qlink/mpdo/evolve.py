"""Trotterized real- and imaginary-time evolution with gauge-leakage monitoring."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..chain import QLinkChain
from . import measure
from .kernels import OpCount, apply_gate_blocked
from .state import MpdoState
from .trotter import ProjectedGate, TrotterSchedule, build_projected_gate, links_of, \
    step_gamma, trotter_schedule

log = logging.getLogger(__name__)


class GaugeLeakageError(RuntimeError):
    pass


@dataclass
class EvolveConfig:
    dt: float = 0.01
    n_steps: int = 100
    order: int = 2
    mode: str = "real"
    k_reproject: int = 1
    leak_tol: float = 1e-10
    log_every: int = 1
    threads: int = 1
    placement: str = "after"

    def __post_init__(self):
        if self.mode not in ("real", "imaginary"):
            raise ValueError(f"mode must be real or imaginary, got {self.mode!r}")
        if self.dt < 0 or self.n_steps < 0 or self.k_reproject < 1 or self.log_every < 1:
            raise ValueError("dt, n_steps must be >= 0; k_reproject, log_every >= 1")


@dataclass
class Trajectory:
    rows: list = field(default_factory=list)
    ops: OpCount = field(default_factory=OpCount)

    def columns(self, L: int) -> list[str]:
        return (["step", "time", "energy", "norm", "leakage", "log_norm", "discarded"]
                + [f"n_psi_{x}" for x in range(1, L + 1)]
                + [f"E_{x}_{x + 1}" for x in range(1, L)])


class GateCache:
    """Projected gates keyed by ``(link, coefficient)`` for one step ``gamma``."""

    def __init__(self, chain: QLinkChain, gamma: complex, placement: str = "after"):
        self.chain, self.gamma, self.placement = chain, gamma, placement
        self._gates: dict = {}

    def __call__(self, x: int, coeff: float) -> ProjectedGate:
        key = (x, round(coeff, 15))
        if key not in self._gates:
            c = self.chain
            self._gates[key] = build_projected_gate(
                c.h(x), c.link_projector(x), coeff * self.gamma, c.sector(x),
                self.placement, outer=(c.n_minus(x), c.n_plus(x + 1)))
        return self._gates[key]


def apply_step(state: MpdoState, schedule: TrotterSchedule, gates: GateCache,
               threads: int = 1, ops: OpCount | None = None):
    """One full Trotter step: every layer, links swept in a snake to keep moves short."""
    L = state.L
    forward = True
    for parity, coeff in schedule.layers:
        links = links_of(parity, L)
        if not forward:
            links = links[::-1]
        for x in links:
            if forward:
                state.move_center(x)
                res = apply_gate_blocked(state, gates(x, coeff), x, "right", threads)
            else:
                state.move_center(x + 1)
                res = apply_gate_blocked(state, gates(x, coeff), x, "left", threads)
            if ops is not None:
                ops.add(res.ops)
        forward = not forward


def observe(state: MpdoState, step: int, time: float) -> dict:
    row = {"step": step, "time": time, "energy": measure.energy(state),
           "norm": measure.trace(state), "leakage": measure.leakage(state),
           "log_norm": state.log_norm, "discarded": state.discarded_weight}
    for x, v in enumerate(measure.site_occupations(state), start=1):
        row[f"n_psi_{x}"] = v
    for x, v in enumerate(measure.link_fields(state), start=1):
        row[f"E_{x}_{x + 1}"] = v
    return row


def evolve(state: MpdoState, cfg: EvolveConfig, trajectory: Trajectory | None = None,
           t0: float = 0.0, step0: int = 0, log_initial: bool = True) -> Trajectory:
    """Advance ``state`` in place by ``cfg.n_steps`` Trotter steps.

    Imaginary time renormalizes ``Tr rho`` to one after every step and
    accumulates the logarithm of the removed factor in ``state.log_norm``.
    Leakage above ``cfg.leak_tol`` at a logged step raises
    :class:`GaugeLeakageError`.
    """
    traj = trajectory if trajectory is not None else Trajectory()
    chain = state.chain
    schedule = trotter_schedule(cfg.order, step_gamma(cfg.dt, cfg.mode))
    gates = GateCache(chain, schedule.gamma, cfg.placement)
    if log_initial:
        traj.rows.append(_checked(observe(state, step0, t0), cfg))
    for n in range(1, cfg.n_steps + 1):
        apply_step(state, schedule, gates, cfg.threads, traj.ops)
        if n % cfg.k_reproject == 0:
            measure.apply_link_projector(state)
            state.canonicalize(1)
        if cfg.mode == "imaginary":
            nrm = state.frobenius_norm2()
            if not nrm > 0:
                raise FloatingPointError("state norm vanished in imaginary time")
            state.scale(1 / math.sqrt(nrm))
            state.log_norm += math.log(nrm)
        if n % cfg.log_every == 0 or n == cfg.n_steps:
            traj.rows.append(_checked(observe(state, step0 + n, t0 + n * cfg.dt), cfg))
    return traj


def _checked(row: dict, cfg: EvolveConfig) -> dict:
    if row["leakage"] > cfg.leak_tol:
        raise GaugeLeakageError(f"leakage {row['leakage']:.3e} at step {row['step']} "
                                f"exceeds {cfg.leak_tol:.1e}")
    log.debug("step %d time %.6g energy %.12g leakage %.2e", row["step"], row["time"],
              row["energy"], row["leakage"])
    return row


DEFAULT_LADDER = ((2, 0.1), (2, 0.05), (4, 0.05), (4, 0.02))


@dataclass
class GroundStateResult:
    energy: float
    state: MpdoState
    trajectory: Trajectory
    stages: list


def ground_state_search(state: MpdoState, ladder=DEFAULT_LADDER, tol: float = 1e-11,
                        max_steps: int = 5000, check_every: int = 10,
                        leak_tol: float = 1e-10, threads: int = 1) -> GroundStateResult:
    """Imaginary-time evolution down a ladder of ``(order, dt)`` stages.

    Each stage runs until the energy changes by less than ``tol`` across
    ``check_every`` steps, or ``max_steps`` is reached.
    """
    traj = Trajectory()
    stages = []
    t, step = 0.0, 0
    previous = None
    for order, dt in ladder:
        cfg = EvolveConfig(dt=dt, n_steps=check_every, order=order, mode="imaginary",
                           leak_tol=leak_tol, log_every=check_every, threads=threads)
        done = 0
        while done < max_steps:
            evolve(state, cfg, traj, t, step, log_initial=False)
            done += check_every
            step += check_every
            t += check_every * dt
            e = traj.rows[-1]["energy"]
            if previous is not None and abs(e - previous) < tol:
                previous = e
                break
            previous = e
        stages.append({"order": order, "dt": dt, "steps": done, "energy": previous})
    return GroundStateResult(previous, state, traj, stages)
