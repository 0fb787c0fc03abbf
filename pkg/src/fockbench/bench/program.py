"""Compilation of parsed bench programs into elements, and their execution."""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Optional

from ..dynamics import DEFAULT_CONFIG, PropagatorConfig
from ..elements import (
    Displace,
    KerrWait,
    Measure,
    MeasureKind,
    Prism,
    Pump,
    average_trajectories,
    design_lens,
    imaging_plan,
    run_elements,
)
from ..hilbert import (
    StateVector,
    SystemParams,
    coherent_state,
    dg_state,
    fock_state,
    gaussian_state,
    mhz,
)
from ..states import SlingshotSpec, slingshot_prepare
from .dsl import BenchProgram, Quantity, Stmt

DEFAULT_EPS_MHZ = 0.88
DEFAULT_TPHI_US = 4.684
DEFAULT_TRIALS = 200


@dataclass(frozen=True)
class CompiledProgram:
    dim: int
    params: SystemParams
    initial: StateVector
    steps: tuple


def _f(stmt: Stmt, name, kind, default=None) -> Optional[float]:
    v = stmt.get(name)
    if v is None:
        return default
    return v.to(kind) if isinstance(v, Quantity) else v


def compile_params(stmt: Stmt) -> SystemParams:
    return SystemParams(
        k4=mhz(_f(stmt, "k4", "freq")),
        k6=mhz(_f(stmt, "k6", "freq")),
        chi=mhz(_f(stmt, "chi", "freq")),
        ke=mhz(_f(stmt, "ke", "freq")),
        kappa=_f(stmt, "kappa", "rate", 0.0),
    )


def compile_state(stmt: Stmt, dim: int, params: SystemParams) -> StateVector:
    kind = stmt.head.split()[1]
    if kind == "coherent":
        alpha = _f(stmt, "alpha", "float") * cmath.exp(1j * _f(stmt, "phase", "angle", 0.0))
        return coherent_state(alpha, dim)
    if kind == "gaussian":
        return gaussian_state(_f(stmt, "center", "float"), _f(stmt, "sigma", "float"), dim)
    if kind == "fock":
        return fock_state(stmt.get("n"), dim)
    dg = (stmt.get("n1"), stmt.get("n2"), _f(stmt, "r1", "float"), _f(stmt, "r2", "float"),
          _f(stmt, "theta", "angle"), _f(stmt, "sigma", "float"))
    if kind == "dg":
        return dg_state(*dg, dim)
    spec = SlingshotSpec(*dg, beta=_f(stmt, "beta", "float"), cutoff=stmt.get("cutoff", 35))
    return slingshot_prepare(spec, dim, params)[1]


def _pump(stmt: Stmt, delta: float, t: float) -> Pump:
    eps = mhz(_f(stmt, "eps", "freq", DEFAULT_EPS_MHZ)) * cmath.exp(1j * _f(stmt, "phase", "angle", 0.0))
    return Pump(eps, delta, t)


def compile_steps(prog: BenchProgram, params: SystemParams) -> tuple:
    out = []
    for s in prog.steps:
        head = s.head
        if head == "prism":
            out.append(Prism(_f(s, "phase", "angle")))
        elif head == "wait":
            out.append(KerrWait(_f(s, "t", "time"), mhz(_f(s, "delta", "freq"))))
        elif head == "pump":
            out.append(_pump(s, mhz(_f(s, "delta", "freq")), _f(s, "t", "time")))
        elif head == "displace":
            out.append(Displace(complex(_f(s, "re", "float"), _f(s, "im", "float"))))
        elif head == "lens":
            ld = design_lens(_f(s, "center", "float"), _f(s, "tphi", "time"), params)
            out.append(KerrWait(ld.t_phi, ld.delta_L))
        elif head == "image":
            center = _f(s, "center", "float")
            plan = imaging_plan(_f(s, "tu", "time"), _f(s, "tf", "time"), center)
            ld = design_lens(center, _f(s, "tphi", "time", DEFAULT_TPHI_US), params)
            out += [_pump(s, ld.delta_L, plan.t_u), KerrWait(ld.t_phi, ld.delta_L), _pump(s, ld.delta_L, plan.t_v)]
        elif head.startswith("measure"):
            kind = MeasureKind.POPULATIONS if head.endswith("pn") else MeasureKind.MOMENTS
            out.append(Measure(kind, s.get("label")))
    return tuple(out)


def compile_program(prog: BenchProgram) -> CompiledProgram:
    params = compile_params(prog.params)
    return CompiledProgram(prog.dim, params, compile_state(prog.initial, prog.dim, params),
                           compile_steps(prog, params))


def run_program(prog: BenchProgram, seed: int = 0, trials: Optional[int] = None,
                cfg: PropagatorConfig = DEFAULT_CONFIG):
    """Execute a program; returns (final state or None, records).

    Lossy programs (kappa > 0) average ``trials`` trajectories seeded
    seed, seed+1, ...; no single final state exists then and None is returned.
    """
    c = compile_program(prog)
    if c.params.kappa > 0:
        recs = average_trajectories(c.initial, c.steps, c.params, trials or DEFAULT_TRIALS, seed, cfg)
        return None, recs
    return run_elements(c.initial, c.steps, c.params, cfg)
