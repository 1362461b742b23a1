"""``qlink`` command line: dims, evolve, groundstate, validate, bench."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .automata import build_automaton, dimension_table, fit_alpha
from .chain import QLinkChain
from .diagnostics import counting_checks, kernel_costs, kernel_equivalence, structural_checks
from .model import ConfigError, GaugeModelSpec, Group, HamiltonianParams, worked_models
from .mpdo import evolve as mpdo_evolve
from .mpdo.evolve import EvolveConfig, GaugeLeakageError, Trajectory, ground_state_search
from .mpdo.io import save_checkpoint, trajectory_csv
from .mpdo.state import infinite_temperature_state, product_state, random_state
from .oracle import dense_hamiltonian, enumerate_constrained, ground_state

log = logging.getLogger("qlink")


@dataclass
class RunConfig:
    """All run parameters. Unknown keys are rejected.

    Model: ``group`` (U1|U2), ``nbar``, ``L``, ``rishon_statistics`` (default per
    group), ``filling`` ([odd, even] or null for the default), ``J``, ``mass``,
    ``g2``, ``g2_nonab`` (null: 1 for U2, 0 for U1).
    """

    group: str = "U1"
    nbar: int = 1
    L: int = 4
    rishon_statistics: str | None = None
    filling: list | None = None
    J: float = 1.0
    mass: float = 0.0
    g2: float = 1.0
    g2_nonab: float | None = None
    # dims
    l_max: int = 1000
    fit_lo: int = 100
    fit_hi: int = 1000
    frame: str = "link"
    # evolve / groundstate
    dt: float = 0.01
    n_steps: int = 100
    order: int = 2
    mode: str = "real"
    m_max: int = 256
    eps_svd: float = 1e-12
    b_max: int = 64
    leak_tol: float = 1e-10
    k_reproject: int = 1
    log_every: int = 1
    placement: str = "after"
    init: str = "product"
    init_config: list | None = None
    init_m: int = 4
    init_b: int = 1
    checkpoint: bool = True
    gs_ladder: list = field(default_factory=lambda: [[2, 0.1], [2, 0.05], [4, 0.05], [4, 0.02]])
    gs_tol: float = 1e-11
    gs_max_steps: int = 5000
    gs_check_every: int = 10
    # validate
    validate_models: list = field(default_factory=lambda: ["u1_n1", "u1_n2", "u2_n1", "u2_n2"])
    validate_L: int = 4
    count_l_max: int = 6
    kernel_states: int = 50
    debug_corrupt_v: bool = False
    # bench
    bench_nbars: list = field(default_factory=lambda: [1, 2, 3, 4])
    bench_m: int = 8
    bench_b: int = 2
    # run
    seed: int = 0
    threads: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def model(self) -> GaugeModelSpec:
        g = Group(self.group)
        nonab = self.g2_nonab if self.g2_nonab is not None else (1.0 if g is Group.U2 else 0.0)
        return GaugeModelSpec(g, int(self.nbar), int(self.L), self.rishon_statistics,
                              filling=tuple(self.filling) if self.filling else None,
                              params=HamiltonianParams(self.J, self.mass, self.g2, nonab))


def _coerce(cfg: RunConfig, key: str, raw: str):
    names = {f.name: f for f in fields(cfg)}
    if key not in names:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    current = getattr(cfg, key)
    if isinstance(current, bool) or current is None or isinstance(value, (list, dict)):
        return value
    if isinstance(current, int) and isinstance(value, (int, float)):
        return int(value)
    if isinstance(current, float) and isinstance(value, (int, float)):
        return float(value)
    return value


def load_config(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = RunConfig.from_dict(data)
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        setattr(cfg, k, _coerce(cfg, k, v))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.threads is not None:
        cfg.threads = args.threads
    return cfg


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------------- commands
def cmd_dims(cfg: RunConfig, out: Path) -> int:
    chain = QLinkChain(cfg.model().with_length(2))
    graph = build_automaton(chain.basis, cfg.frame)
    table = dimension_table(graph, cfg.l_max)
    (out / "dims.csv").write_text(table.to_csv())
    report = {"arrows": [list(map(list, a)) for a in graph.arrows], "period": graph.period,
              "nbar": graph.nbar, "frame": graph.frame, "l_max": cfg.l_max, "fit": None}
    if cfg.fit_hi <= cfg.l_max:
        fit = fit_alpha(table, (cfg.fit_lo, cfg.fit_hi))
        report["fit"] = json.loads(fit.to_json())
        print(f"alpha = {fit.alpha:.10f} over [{cfg.fit_lo}, {cfg.fit_hi}]")
    _write_json(out / "fit.json", report)
    print(f"wrote {out / 'dims.csv'} ({cfg.l_max + 1} rows)")
    return 0


def _initial_state(cfg: RunConfig, chain: QLinkChain):
    kw = dict(m_max=cfg.m_max, eps_svd=cfg.eps_svd, b_max=cfg.b_max)
    if cfg.init == "product":
        config = cfg.init_config
        if config is None:
            config = enumerate_constrained(chain.basis, max_states=10 ** 7).configs[0]
        return product_state(chain, [int(j) for j in config], **kw)
    if cfg.init == "random":
        return random_state(chain, cfg.init_m, cfg.init_b, seed=cfg.seed, **kw)
    if cfg.init == "infinite-temperature":
        return infinite_temperature_state(chain, **kw)
    raise ConfigError(f"unknown init {cfg.init!r}")


def _finish_run(cfg, out, state, traj: Trajectory, extra: dict) -> int:
    cols = traj.columns(state.L)
    (out / "trajectory.csv").write_text(trajectory_csv(traj.rows, cols))
    if cfg.checkpoint:
        save_checkpoint(state, out / "state.ckpt")
    last = traj.rows[-1]
    summary = {"final": {k: last[k] for k in cols}, "bond_dims": state.bond_dims,
               "max_leakage": max(r["leakage"] for r in traj.rows),
               "ops": dataclasses.asdict(traj.ops), "warnings": state.warnings, **extra}
    _write_json(out / "summary.json", summary)
    print(f"final energy {last['energy']:.12f} leakage {summary['max_leakage']:.2e}")
    return 0


def cmd_evolve(cfg: RunConfig, out: Path) -> int:
    chain = QLinkChain(cfg.model())
    state = _initial_state(cfg, chain)
    ecfg = EvolveConfig(cfg.dt, cfg.n_steps, cfg.order, cfg.mode, cfg.k_reproject,
                        cfg.leak_tol, cfg.log_every, cfg.threads, cfg.placement)
    traj = mpdo_evolve(state, ecfg)
    return _finish_run(cfg, out, state, traj, {"mode": cfg.mode})


def cmd_groundstate(cfg: RunConfig, out: Path) -> int:
    chain = QLinkChain(cfg.model())
    if cfg.init == "product" and cfg.init_config is None:
        cfg = dataclasses.replace(cfg, init="random")
    state = _initial_state(cfg, chain)
    res = ground_state_search(state, [tuple(s) for s in cfg.gs_ladder], cfg.gs_tol,
                              cfg.gs_max_steps, cfg.gs_check_every, cfg.leak_tol, cfg.threads)
    return _finish_run(cfg, out, res.state, res.trajectory,
                       {"mode": "imaginary", "energy": res.energy, "stages": res.stages})


def cmd_validate(cfg: RunConfig, out: Path) -> int:
    models = worked_models(cfg.validate_L)
    report, ok = {}, True
    for name in cfg.validate_models:
        spec = models[name] if name in models else None
        if spec is None:
            raise ConfigError(f"unknown model {name!r}; choose from {sorted(models)}")
        spec = spec.with_params(mass=cfg.mass, J=cfg.J, g2=cfg.g2)
        chain = QLinkChain(spec)
        checks = structural_checks(chain, corrupt_v=cfg.debug_corrupt_v)
        checks += counting_checks(chain, cfg.count_l_max)
        checks.append(kernel_equivalence(chain, cfg.kernel_states, seed=cfg.seed))
        enum = enumerate_constrained(chain.basis)
        e0, _ = ground_state(dense_hamiltonian(enum, chain.gates))
        report[name] = {"checks": [dataclasses.asdict(c) for c in checks],
                        "chi": [chain.sector(x).chi for x in range(1, chain.L)],
                        "ground_energy": e0, "constrained_dim": len(enum)}
        for c in checks:
            ok &= c.passed
            print(f"[{'PASS' if c.passed else 'FAIL'}] {name}: {c.name} ({c.measured:.3g})")
    report["all_passed"] = bool(ok)
    _write_json(out / "validate.json", report)
    return 0 if ok else 1


def cmd_bench(cfg: RunConfig, out: Path) -> int:
    rows = []
    for nbar in cfg.bench_nbars:
        spec = dataclasses.replace(cfg, nbar=int(nbar), L=max(cfg.L, 4)).model()
        rep = kernel_costs(QLinkChain(spec), cfg.bench_m, cfg.bench_b, cfg.seed,
                           f"{spec.group.value}_n{nbar}")
        rows.append(rep.as_dict())
        print(f"{rep.model}: blocked {rep.blocked_contraction} (bound {rep.blocked_bound}) "
              f"dense {rep.dense_contraction} svd ratio {rep.svd_ratio:.4f}")
    _write_json(out / "bench.json", rows)
    return 0


COMMANDS = {"dims": cmd_dims, "evolve": cmd_evolve, "groundstate": cmd_groundstate,
            "validate": cmd_validate, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlink", description=__doc__)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON file with RunConfig keys")
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--threads", type=int, default=None, help="worker cap for block SVDs")
    p.add_argument("--seed", type=int, default=None, help="seed for random initial states")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key; VALUE is parsed as JSON when possible")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QLINK_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        np.seterr(all="ignore")
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, TypeError, ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GaugeLeakageError as exc:
        print(f"gauge leakage: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
