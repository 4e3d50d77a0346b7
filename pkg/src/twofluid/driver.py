"""Time loop over a :class:`CaseConfig`, plus run diagnostics."""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .errors import BoundaryContamination, NumericalAbort, ValidationError
from .scheme_p3 import post_treatment
from .state import CaseConfig, FieldSet
from .stepping import primitives, step, thread_count

log = logging.getLogger(__name__)

FIELDS = ("alpha1", "rho1", "rho2", "v1", "v2", "p", "E1", "E2")


@dataclass
class Snapshot:
    t: float
    step: int
    x: np.ndarray
    fields: FieldSet
    prim: dict

    def __getitem__(self, name):
        if name == "x":
            return self.x
        return self.prim[name]


@dataclass
class RunReport:
    steps_taken: int = 0
    wall_time: float = 0.0
    mass_drift: tuple = (0.0, 0.0)
    max_cfl_seen: float = 0.0
    aborted: dict | None = None
    dt: float = 0.0
    t_final: float = 0.0


@dataclass
class PeakReport:
    field: str
    plateau_value: float
    peak_value: float
    peak_width: int
    location: float


def make_snapshot(case: CaseConfig, fields: FieldSet, t: float, n: int) -> Snapshot:
    clo = primitives(fields, case.eos, case.model)
    prim = {name: np.asarray(getattr(clo, name)) for name in FIELDS}
    return Snapshot(t=t, step=n, x=case.grid.centers, fields=fields, prim=prim)


def step_plan(case: CaseConfig):
    """Return ``(n_steps, dt, last_dt)`` for the configured time policy."""
    dt = case.model.r * case.grid.h
    if case.t_end == 0.0:
        return 0, dt, dt
    n = math.ceil(case.t_end / dt - 1e-9)
    if case.time_policy == "shorten":
        last = case.t_end - (n - 1) * dt
        return n, dt, last
    return n, dt, dt


def _snapshot_steps(case: CaseConfig, dt):
    times = case.output.times or (case.t_end,)
    steps = {}
    for t in times:
        if t < 0 or t > case.t_end + 1e-12:
            raise ValidationError(f"snapshot time {t} outside [0, t_end]")
        steps[math.ceil(t / dt - 1e-9) if t > 0 else 0] = t
    return steps


def _post_treat(fields: FieldSet, w: int, boundary: str) -> FieldSet:
    return fields.replace(**{name: post_treatment(getattr(fields, name), w, boundary)
                             for name in FieldSet.NAMES})


def run_case(case: CaseConfig, check_boundaries=True, boundary_cells=1, threads=None,
             on_step=None):
    """Integrate ``case`` to ``t_end``.

    Returns ``(snapshots, report)`` where ``snapshots`` is a list of
    :class:`Snapshot` at the requested output times (step-snapped).  Any
    numerical abort is re-raised with the step index attached; ``report`` is
    attached to the exception as ``exc.report``.
    """
    threads = thread_count() if threads is None else threads
    cfg = case.model
    grid = case.grid
    n_steps, dt, last_dt = step_plan(case)
    wanted = _snapshot_steps(case, dt)
    fields = case.initial_fields()
    initial = fields
    mass0 = np.array([fields.r1.sum(), fields.r2.sum()])
    report = RunReport(dt=dt)
    snaps = []
    t0 = time.perf_counter()
    t = 0.0
    drift = np.zeros(2)
    if 0 in wanted:
        snaps.append(make_snapshot(case, fields, 0.0, 0))
    n = 0
    try:
        for n in range(1, n_steps + 1):
            step_cfg = cfg
            if n == n_steps and last_dt != dt:
                step_cfg = cfg.replace(r=last_dt / grid.h)
            before = np.array([fields.r1.sum(), fields.r2.sum()])
            vmax = max(np.max(np.abs(fields.m1 / fields.r1)), np.max(np.abs(fields.m2 / fields.r2)))
            report.max_cfl_seen = max(report.max_cfl_seen, float(vmax) * step_cfg.r)
            fields = step(fields, grid, step_cfg, case.eos, threads)
            after = np.array([fields.r1.sum(), fields.r2.sum()])
            drift += np.abs(after - before)
            t += step_cfg.r * grid.h
            if on_step is not None:
                on_step(n, t, fields)
            if n in wanted:
                snaps.append(make_snapshot(case, fields, t, n))
    except NumericalAbort as exc:
        exc.step = n
        report.steps_taken = n - 1
        report.wall_time = time.perf_counter() - t0
        report.aborted = {"error": type(exc).__name__, "message": exc.message,
                          "step": n, "cell": exc.cell}
        exc.report = report
        raise
    report.steps_taken = n_steps
    report.t_final = t
    report.wall_time = time.perf_counter() - t0
    report.mass_drift = tuple(float(x) for x in drift / mass0)

    if check_boundaries and n_steps:
        # a body force accelerates the end cells too; only the densities stay put
        names = ("r1", "r2") if cfg.g else _CONSERVED
        _check_boundaries(initial, fields, boundary_cells, case.boundary_rtol, names)
    w = cfg.post_treatment_halfwidth
    if w and n_steps:
        final = _post_treat(fields, w, cfg.boundary)
        if snaps and snaps[-1].step == n_steps:
            snaps[-1] = make_snapshot(case, final, snaps[-1].t, n_steps)
    log.info("%s: %d steps in %.2fs", case.name, n_steps, report.wall_time)
    return snaps, report


_CONSERVED = ("r1", "r2", "m1", "m2", "e1", "e2")


def _check_boundaries(initial: FieldSet, final: FieldSet, k: int, rtol=1e-8,
                      names=_CONSERVED):
    for name in names:
        a = getattr(initial, name)
        b = getattr(final, name)
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
        for idx in list(range(k)) + list(range(len(a) - k, len(a))):
            if abs(b[idx] - a[idx]) > rtol * scale:
                raise BoundaryContamination(
                    f"waves reached the boundary: {name} changed by "
                    f"{abs(b[idx] - a[idx]) / scale:.3e} (relative)", cell=idx)


def transition_mask(values, jump_tol=1e-4):
    """Cells adjacent to a cell-to-cell jump above ``jump_tol`` times the field range."""
    values = np.asarray(values, dtype=float)
    rng = np.ptp(values)
    mask = np.zeros(values.size, dtype=bool)
    if rng == 0.0:
        return mask
    big = np.abs(np.diff(values)) > jump_tol * rng
    mask[:-1] |= big
    mask[1:] |= big
    return mask


def dilate(mask, k):
    if k <= 0:
        return mask.copy()
    kernel = np.ones(2 * k + 1)
    return np.convolve(mask.astype(float), kernel, mode="same") > 0.0


def plateau_mask(runs, exclude_cells=10, jump_tol=1e-4, fields=FIELDS):
    """Cells away from every detected transition in every run and field."""
    n = len(runs[0][fields[0]])
    excluded = np.zeros(n, dtype=bool)
    for run in runs:
        for name in fields:
            excluded |= transition_mask(run[name], jump_tol)
    return ~dilate(excluded, exclude_cells)


def _get(run, name):
    return np.asarray(run[name], dtype=float)


def compare_runs(a, b, exclude_cells=10, jump_tol=1e-4, fields=FIELDS):
    """Relative L-inf and L1 differences per field.

    ``a`` and ``b`` are snapshots (or dicts of arrays).  Differences are
    normalised by the largest magnitude of the field in ``a``.  The
    ``plateau_*`` metrics only count cells kept by :func:`plateau_mask`.
    """
    na = len(_get(a, fields[0]))
    nb = len(_get(b, fields[0]))
    if na != nb:
        raise ValidationError(f"grid mismatch: {na} vs {nb} cells")
    if hasattr(a, "x") and hasattr(b, "x") and not np.allclose(a.x, b.x, rtol=0, atol=1e-12):
        raise ValidationError("grid mismatch: cell centres differ")
    mask = plateau_mask([a, b], exclude_cells, jump_tol, fields)
    out = {}
    for name in fields:
        fa = _get(a, name)
        fb = _get(b, name)
        scale = np.max(np.abs(fa))
        scale = scale if scale > 0.0 else 1.0
        diff = np.abs(fa - fb) / scale
        l1_scale = np.sum(np.abs(fa)) or 1.0
        out[name] = {
            "linf": float(diff.max()),
            "l1": float(np.sum(np.abs(fa - fb)) / l1_scale),
            "plateau_linf": float(diff[mask].max()) if mask.any() else 0.0,
            "plateau_l1": (float(np.sum(np.abs(fa - fb)[mask]) / (np.sum(np.abs(fa[mask])) or 1.0))
                           if mask.any() else 0.0),
        }
    out["_plateau_cells"] = int(mask.sum())
    return out


def restrict(values, factor):
    """Average blocks of ``factor`` cells: maps a fine grid onto a coarse one."""
    values = np.asarray(values, dtype=float)
    return values.reshape(-1, factor).mean(axis=1)


@dataclass
class PeakConfig:
    """Peak detection settings.

    ``threshold`` multiplies the plateau noise level; ``min_rel_prominence``
    is a floor relative to the largest step value of the field; prominence is
    measured inside a window of ``window_fraction`` of the domain so that the
    corners of wide plateaus do not count as peaks.
    """

    threshold: float = 5.0
    min_rel_prominence: float = 0.05
    window_fraction: float = 0.1
    exclude_cells: int = 10
    jump_tol: float = 1e-4
    x: np.ndarray | None = field(default=None, repr=False)


def plateau_spread(values, exclude_cells=10, jump_tol=1e-4):
    """Noise level inside plateaus: largest cell-to-cell change away from transitions."""
    values = np.asarray(values, dtype=float)
    keep = ~dilate(transition_mask(values, jump_tol), exclude_cells)
    d = np.abs(np.diff(values))[keep[:-1] & keep[1:]]
    return float(d.max()) if d.size else 0.0


def detect_peaks(values, config: PeakConfig | None = None, name="field"):
    """Isolated maxima standing well above the surrounding step values.

    A local maximum counts when its prominence (within the local window)
    exceeds both ``threshold * plateau_spread`` and ``min_rel_prominence``
    times the largest step-value magnitude of the field.
    """
    cfg = config or PeakConfig()
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 3:
        return []
    spread = plateau_spread(values, cfg.exclude_cells, cfg.jump_tol)
    keep = ~dilate(transition_mask(values, cfg.jump_tol), cfg.exclude_cells)
    level = np.max(np.abs(values[keep])) if keep.any() else np.max(np.abs(values))
    floor = max(cfg.threshold * spread, cfg.min_rel_prominence * level, np.finfo(float).tiny)
    wlen = max(3, int(cfg.window_fraction * n) | 1)
    with warnings.catch_warnings():
        # maxima whose window clips their base get prominence 0; the floor drops them anyway
        warnings.filterwarnings("ignore", message="some peaks have a prominence of 0")
        idx, props = scipy.signal.find_peaks(values, prominence=floor, wlen=wlen)
    x = cfg.x if cfg.x is not None else np.arange(n, dtype=float)
    reports = []
    for k, i in enumerate(idx):
        prom = props["prominences"][k]
        half = values[i] - 0.5 * prom
        lo = i
        while lo > 0 and values[lo - 1] > half:
            lo -= 1
        hi = i
        while hi < n - 1 and values[hi + 1] > half:
            hi += 1
        reports.append(PeakReport(field=name,
                                  plateau_value=_plateau_near(values, lo, hi, wlen, values[i] - prom),
                                  peak_value=float(values[i]), peak_width=int(hi - lo + 1),
                                  location=float(x[i])))
    return reports


def _plateau_near(values, lo, hi, wlen, fallback):
    """Median of the window around a peak, leaving out the peak itself."""
    n = values.size
    pad_ = max(1, (hi - lo + 1) // 2)
    left = values[max(0, lo - pad_ - wlen // 2): max(0, lo - pad_)]
    right = values[min(n, hi + 1 + pad_): min(n, hi + 1 + pad_ + wlen // 2)]
    around = np.concatenate((left, right))
    if around.size == 0:
        return float(fallback)
    return float(min(np.median(around), values[lo:hi + 1].max()))


def convergence_study(case: CaseConfig, levels: int, exclude_cells=10):
    """Run ``case`` at ``n, 2n, 4n, ...`` cells; compare each level with the next finer.

    The finer run is block-averaged onto the coarser grid.
    """
    results = []
    finals = []
    for k in range(levels):
        c = case.with_cells(case.grid.n_cells * 2**k)
        snaps, report = run_case(c)
        finals.append(snaps[-1])
        results.append({"n_cells": c.grid.n_cells, "steps": report.steps_taken,
                        "wall_time": report.wall_time})
    for k in range(levels - 1):
        coarse = finals[k]
        fine = {name: restrict(finals[k + 1][name], 2) for name in FIELDS}
        results[k]["vs_next"] = compare_runs(coarse.prim, fine, exclude_cells)
    return results
