"""Full time steps of the splitting scheme.

Canonical form, per step: transport of ``r_j, m_j, F_j`` -> averaging ->
closure with the pressure memory ``p^n`` -> pressure correction -> closure of
the corrected values with the averaged-stage pressure as memory, which gives
``p^{n+1}`` and re-packs ``F_j = E_j + p^{n+1} alpha_j``.

Solved form, per step: transport of ``r_j, m_j, E_j`` -> averaging -> closure
of the time-n values -> pressure correction of momenta and energies.

Order 3 swaps in the implicit transport and smoothing, the 7-point derivative,
and smooths once more after the correction.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import scheme_o1 as o1
from . import scheme_p3 as p3
from .closure import recover, recover_canonical, recover_solved
from .errors import NumericalAbort
from .state import EosParams, FieldSet, Form, Grid, ModelConfig, Order


def thread_count() -> int:
    """Worker count from ``TWOFLUID_THREADS`` (unset or 1 = serial, 0 = auto)."""
    raw = os.environ.get("TWOFLUID_THREADS", "1").strip() or "1"
    n = int(raw)
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, n)


def _map(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


class _Ops:
    """Operator set for one (order, boundary) combination."""

    def __init__(self, cfg: ModelConfig, threads: int):
        self.cfg = cfg
        self.bc = cfg.boundary
        self.threads = threads
        self.high = cfg.order is Order.P3

    def transport(self, arrays, velocities):
        r, bc = self.cfg.r, self.bc
        fn = p3.transport_p3 if self.high else o1.upwind_transport
        jobs = [(w, v) for w, v in zip(arrays, velocities)]
        return _map(lambda w, v: fn(w, v, r, boundary=bc, check=False), jobs, self.threads)

    def average(self, arrays):
        a, bc = self.cfg.a, self.bc
        fn = p3.average_p3 if self.high else o1.average_o1
        return _map(lambda w: fn(w, a, boundary=bc), [(w,) for w in arrays], self.threads)

    @property
    def diff(self):
        return p3.centered_diff_p3 if self.high else o1.centered_half_diff

    def viscosity(self, m1, m2, e1, e2, h):
        cfg = self.cfg
        if cfg.mu1 == 0.0 and cfg.mu2 == 0.0:
            return m1, m2, e1, e2
        return (o1.viscous_increment(m1, cfg.mu1, cfg.r, h, self.bc),
                o1.viscous_increment(m2, cfg.mu2, cfg.r, h, self.bc),
                o1.viscous_increment(e1, cfg.mu1, cfg.r, h, self.bc),
                o1.viscous_increment(e2, cfg.mu2, cfg.r, h, self.bc))


def _transport_and_average(f: FieldSet, ops: _Ops, grid: Grid):
    v1 = f.m1 / f.r1
    v2 = f.m2 / f.r2
    o1.check_cfl(np.concatenate((v1, v2)), ops.cfg.r)
    moved = ops.transport((f.r1, f.r2, f.m1, f.m2, f.e1, f.e2), (v1, v2, v1, v2, v1, v2))
    r1, r2, m1, m2, e1, e2 = moved
    m1, m2, e1, e2 = ops.viscosity(m1, m2, e1, e2, grid.h)
    return ops.average((r1, r2, m1, m2, e1, e2))


def step_canonical(f: FieldSet, grid: Grid, cfg: ModelConfig, eos: EosParams,
                   threads: int = 1) -> FieldSet:
    """Advance a canonical-form field set by ``dt = r h``."""
    ops = _Ops(cfg, threads)
    r1, r2, m1, m2, F1, F2 = _transport_and_average(f, ops, grid)
    bar = recover_canonical(r1, r2, m1, m2, F1, F2, f.p_prev, eos, cfg.delta, cfg.sound_speed)
    # re-pack with the averaged-stage pressure, which is the memory the fifth step decodes with
    F1 = bar.E1 + bar.p * bar.alpha1
    F2 = bar.E2 + bar.p * bar.alpha2
    m1n, m2n, F1s, F2s = o1.pressure_correction_canonical(
        r1, r2, m1, m2, F1, F2, bar, cfg.r, grid.h, cfg.g, ops.bc, ops.diff)
    p_mem = bar.p
    if ops.high:
        r1, r2, m1n, m2n, F1s, F2s, p_mem = ops.average((r1, r2, m1n, m2n, F1s, F2s, p_mem))
    new = recover_canonical(r1, r2, m1n, m2n, F1s, F2s, p_mem, eos, cfg.delta, cfg.sound_speed)
    F1n = new.E1 + new.p * new.alpha1
    F2n = new.E2 + new.p * new.alpha2
    out = FieldSet(r1, r2, m1n, m2n, F1n, F2n, new.p, form=Form.CANONICAL)
    out.check_vacuum()
    return out


def step_solved(f: FieldSet, grid: Grid, cfg: ModelConfig, eos: EosParams,
                threads: int = 1) -> FieldSet:
    """Advance a solved-form field set by ``dt = r h``."""
    ops = _Ops(cfg, threads)
    r1b, r2b, m1b, m2b, E1b, E2b = _transport_and_average(f, ops, grid)
    if cfg.closure_on_bar:
        clo = recover_solved(r1b, r2b, m1b, m2b, E1b, E2b, eos, cfg.delta, cfg.sound_speed)
        src = (r1b, r2b, m1b, m2b)
    else:
        clo = recover_solved(f.r1, f.r2, f.m1, f.m2, f.e1, f.e2, eos, cfg.delta, cfg.sound_speed)
        src = (f.r1, f.r2, f.m1, f.m2)
    m1n, m2n, E1n, E2n = o1.pressure_correction_solved(
        m1b, m2b, E1b, E2b, *src, clo, cfg.r, grid.h, cfg.g, ops.bc, ops.diff)
    r1n, r2n = r1b, r2b
    if ops.high:
        r1n, r2n, m1n, m2n, E1n, E2n = ops.average((r1n, r2n, m1n, m2n, E1n, E2n))
    out = FieldSet(r1n, r2n, m1n, m2n, E1n, E2n, clo.p, form=Form.SOLVED)
    out.check_vacuum()
    return out


def step(f: FieldSet, grid: Grid, cfg: ModelConfig, eos: EosParams, threads: int = 1) -> FieldSet:
    if f.form is not cfg.form:
        raise ValueError(f"field set is {f.form.value}-form but config asks for {cfg.form.value}")
    fn = step_canonical if cfg.form is Form.CANONICAL else step_solved
    try:
        return fn(f, grid, cfg, eos, threads)
    except FloatingPointError as exc:
        raise NumericalAbort(f"floating point error: {exc}") from None


def primitives(f: FieldSet, eos: EosParams, cfg: ModelConfig):
    """Closure of a field set in its own form (for output and diagnostics)."""
    return recover(f, eos, cfg.delta, cfg.sound_speed)
