"""Case files, snapshot CSV files and the companion plot script.

A case file is INI-style text::

    [grid]
    n_cells = 2000
    length = 100.0        ; or h = 0.05
    x0 = 0.0              ; optional

    [eos]
    K1 = 1.4
    K2 = 2.8
    p_inf1 = 0.0
    p_inf2 = 8.5e8

    [model]
    delta = 2
    form = canonical      ; or solved
    order = 1             ; or 3
    r = 0.0012
    a = 0.3

    [left]                ; and [right], same keys
    alpha1 = 0.25
    rho1 = ...
    rho2 = ...
    v1 = 0
    v2 = 0
    p = 2e7

    [run]
    t_end = 0.06
    interface_position = 50.0
    boundary_rtol = 1e-8  ; optional, see below

    [output]              ; optional section
    times = 0.03, 0.06
    prefix = toumi

Every key of ``[eos]``, ``[left]`` and ``[right]`` is required.  Unknown keys
and unknown sections are errors.  ``boundary_rtol`` is the relative change the
end cells may show at ``t_end`` before the run is declared contaminated.
"""

from __future__ import annotations

import configparser
import json
import math
import os
import re
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .state import CaseConfig, EosParams, Form, Grid, ModelConfig, Order, OutputPlan, Primitive

CSV_COLUMNS = ("x", "alpha1", "rho1", "rho2", "v1", "v2", "p", "E1", "E2")

_REQUIRED = {
    "grid": {"n_cells"},
    "eos": {"K1", "K2", "p_inf1", "p_inf2"},
    "model": set(),
    "left": {"alpha1", "rho1", "rho2", "v1", "v2", "p"},
    "right": {"alpha1", "rho1", "rho2", "v1", "v2", "p"},
    "run": {"t_end", "interface_position"},
    "output": set(),
}
_OPTIONAL = {
    "grid": {"length", "h", "x0"},
    "eos": set(),
    "model": {"delta", "form", "order", "r", "a", "g", "mu1", "mu2",
              "post_treatment_halfwidth", "boundary", "sound_speed", "closure_on_bar"},
    "left": set(),
    "right": set(),
    "run": {"time_policy", "name", "boundary_rtol"},
    "output": {"times", "prefix"},
}
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:\s;#][^=:]*?)\s*[=:]")


class CaseFileError(ValidationError):
    """A case-file problem, located by file and line when possible."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line else f"{path}: "
        super().__init__(where + message)


def _line_index(text):
    """Map (section, key) and sections to 1-based line numbers."""
    where = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(raw)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), lineno)
            continue
        if section is None or raw[:1].isspace():
            continue
        m = _KEY_RE.match(raw)
        if m:
            where.setdefault((section, m.group(1).strip()), lineno)
    return where


class _Reader:
    def __init__(self, parser, lines, path):
        self.parser = parser
        self.lines = lines
        self.path = path

    def fail(self, section, key, message):
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        label = f"[{section}] {key}" if key else f"[{section}]"
        raise CaseFileError(f"{label}: {message}", self.path, line)

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def raw(self, section, key):
        return self.parser.get(section, key).strip()

    def number(self, section, key, default=None):
        if not self.has(section, key):
            if default is None:
                self.fail(section, key, "missing required key")
            return default
        text = self.raw(section, key)
        try:
            value = float(text)
        except ValueError:
            self.fail(section, key, f"expected a number, got {text!r}")
        if not math.isfinite(value):
            self.fail(section, key, f"must be finite, got {text!r}")
        return value

    def integer(self, section, key, default=None):
        if not self.has(section, key):
            if default is None:
                self.fail(section, key, "missing required key")
            return default
        text = self.raw(section, key)
        try:
            return int(text)
        except ValueError:
            self.fail(section, key, f"expected an integer, got {text!r}")

    def check(self, cond, section, key, message):
        if not cond:
            self.fail(section, key, message)


def parse_case_text(text, path="<string>") -> CaseConfig:
    """Parse case-file text; see the module docstring for the format."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise CaseFileError(str(exc).splitlines()[0], path, line) from None
    lines = _line_index(text)
    rd = _Reader(parser, lines, path)

    for section in parser.sections():
        if section not in _REQUIRED:
            rd.fail(section, None, "unknown section")
        allowed = _REQUIRED[section] | _OPTIONAL[section]
        for key in parser.options(section):
            if key not in allowed:
                rd.fail(section, key, f"unknown key (allowed: {', '.join(sorted(allowed))})")
    for section in _REQUIRED:
        if section != "output" and not parser.has_section(section):
            raise CaseFileError(f"missing section [{section}]", path)
        for key in sorted(_REQUIRED[section]):
            if not parser.has_option(section, key):
                rd.fail(section, key, "missing required key")

    grid = _grid(rd)
    eos = _eos(rd)
    model = _model(rd)
    left = _state(rd, "left", eos)
    right = _state(rd, "right", eos)

    t_end = rd.number("run", "t_end")
    rd.check(t_end >= 0.0, "run", "t_end", "must be >= 0")
    xi = rd.number("run", "interface_position")
    rd.check(grid.x0 <= xi <= grid.x0 + grid.length, "run", "interface_position",
             "must lie inside the tube")
    policy = rd.raw("run", "time_policy") if rd.has("run", "time_policy") else "snap"
    rd.check(policy in ("snap", "shorten"), "run", "time_policy", "must be snap or shorten")
    name = rd.raw("run", "name") if rd.has("run", "name") else Path(str(path)).stem
    brtol = rd.number("run", "boundary_rtol", 1e-8)
    rd.check(brtol > 0.0, "run", "boundary_rtol", "must be > 0")

    output = OutputPlan()
    if parser.has_section("output"):
        times = ()
        if rd.has("output", "times"):
            try:
                times = tuple(float(t) for t in re.split(r"[,\s]+", rd.raw("output", "times")) if t)
            except ValueError:
                rd.fail("output", "times", "expected a comma-separated list of times")
            for t in times:
                rd.check(0.0 <= t <= t_end, "output", "times", f"time {t} outside [0, t_end]")
        prefix = rd.raw("output", "prefix") if rd.has("output", "prefix") else name
        rd.check(bool(prefix) and "/" not in prefix, "output", "prefix", "must be a plain file stem")
        output = OutputPlan(times=times, prefix=prefix)
    else:
        output = OutputPlan(prefix=name)

    try:
        return CaseConfig(grid=grid, t_end=t_end, left_state=left, right_state=right,
                        interface_position=xi, eos=eos, model=model, output=output,
                        time_policy=policy, name=name, boundary_rtol=brtol)
    except ValidationError as exc:
        raise CaseFileError(str(exc), path) from None


def parse_case(path) -> CaseConfig:
    """Read and validate a case file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CaseFileError(f"cannot read case file: {exc.strerror}", path) from None
    return parse_case_text(text, path)


def _grid(rd):
    n = rd.integer("grid", "n_cells")
    rd.check(n >= 2, "grid", "n_cells", "must be >= 2")
    has_len = rd.has("grid", "length")
    has_h = rd.has("grid", "h")
    if has_len == has_h:
        rd.fail("grid", None, "give exactly one of length or h")
    x0 = rd.number("grid", "x0", 0.0)
    if has_len:
        length = rd.number("grid", "length")
        rd.check(length > 0.0, "grid", "length", "must be > 0")
        return Grid.from_length(n, length, x0)
    h = rd.number("grid", "h")
    rd.check(h > 0.0, "grid", "h", "must be > 0")
    return Grid(n, h, x0)


def _eos(rd):
    vals = {k: rd.number("eos", k) for k in ("K1", "K2", "p_inf1", "p_inf2")}
    for k in ("K1", "K2"):
        rd.check(vals[k] > 1.0, "eos", k, "must be > 1")
    for k in ("p_inf1", "p_inf2"):
        rd.check(vals[k] >= 0.0, "eos", k, "must be >= 0")
    return EosParams(**vals)


def _model(rd):
    kw = {}
    sec = "model"
    if not rd.parser.has_section(sec):
        return ModelConfig()
    for key in ("delta", "r", "a", "g", "mu1", "mu2"):
        if rd.has(sec, key):
            kw[key] = rd.number(sec, key)
    if rd.has(sec, "form"):
        text = rd.raw(sec, "form").lower()
        rd.check(text in ("canonical", "solved"), sec, "form", "must be canonical or solved")
        kw["form"] = Form(text)
    if rd.has(sec, "order"):
        k = rd.integer(sec, "order")
        rd.check(k in (1, 3), sec, "order", "must be 1 or 3")
        kw["order"] = Order(k)
    if rd.has(sec, "post_treatment_halfwidth"):
        kw["post_treatment_halfwidth"] = rd.integer(sec, "post_treatment_halfwidth")
    for key in ("boundary", "sound_speed"):
        if rd.has(sec, key):
            kw[key] = rd.raw(sec, key).lower()
    if rd.has(sec, "closure_on_bar"):
        try:
            kw["closure_on_bar"] = rd.parser.getboolean(sec, "closure_on_bar")
        except ValueError:
            rd.fail(sec, "closure_on_bar", "expected true or false")
    try:
        return ModelConfig(**kw)
    except ValidationError as exc:
        msg = str(exc)
        key = next((k for k in kw if msg.startswith(k) or f" {k} " in f" {msg} "), None)
        rd.fail(sec, key, msg)


def _state(rd, sec, eos):
    vals = {k: rd.number(sec, k) for k in ("alpha1", "rho1", "rho2", "v1", "v2", "p")}
    rd.check(0.0 < vals["alpha1"] < 1.0, sec, "alpha1", f"must lie in (0, 1), got {vals['alpha1']}")
    for k in ("rho1", "rho2"):
        rd.check(vals[k] > 0.0, sec, k, f"must be > 0, got {vals[k]}")
    p = vals["p"]
    rd.check(p > -eos.K1 * eos.p_inf1 and p > -eos.K2 * eos.p_inf2, sec, "p",
             "must exceed -K_j p_inf_j for both phases (positive squared sound speed)")
    return Primitive(**vals)


def format_case(case: CaseConfig) -> str:
    """Case-file text that parses back to ``case``."""
    m = case.model
    out = ["[grid]", f"n_cells = {case.grid.n_cells}", f"h = {case.grid.h!r}",
           f"x0 = {case.grid.x0!r}", "", "[eos]"]
    out += [f"{k} = {getattr(case.eos, k)!r}" for k in ("K1", "K2", "p_inf1", "p_inf2")]
    out += ["", "[model]", f"delta = {m.delta!r}", f"form = {m.form.value}",
            f"order = {int(m.order)}", f"r = {m.r!r}", f"a = {m.a!r}", f"g = {m.g!r}",
            f"mu1 = {m.mu1!r}", f"mu2 = {m.mu2!r}",
            f"post_treatment_halfwidth = {m.post_treatment_halfwidth}",
            f"boundary = {m.boundary}", f"sound_speed = {m.sound_speed}",
            f"closure_on_bar = {str(m.closure_on_bar).lower()}"]
    for label, st in (("left", case.left_state), ("right", case.right_state)):
        out += ["", f"[{label}]"]
        out += [f"{k} = {float(getattr(st, k))!r}" for k in ("alpha1", "rho1", "rho2", "v1", "v2", "p")]
    out += ["", "[run]", f"t_end = {case.t_end!r}",
            f"interface_position = {case.interface_position!r}",
            f"time_policy = {case.time_policy}", f"name = {case.name}",
            f"boundary_rtol = {case.boundary_rtol!r}", "", "[output]"]
    if case.output.times:
        out.append("times = " + ", ".join(repr(float(t)) for t in case.output.times))
    out.append(f"prefix = {case.output.prefix}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- snapshots

def write_snapshot_csv(snapshot, path):
    """Write one snapshot as CSV with 17 significant digits and LF endings."""
    cols = [np.asarray(snapshot[name], dtype=float) for name in CSV_COLUMNS]
    data = np.column_stack(cols)
    path = Path(path)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in data:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _fmt(v):
    # %-formatting is locale independent, unlike the "n" format code
    return "%.17g" % v


def read_snapshot_csv(path):
    """Read a snapshot CSV back into a dict of float arrays."""
    path = Path(path)
    with open(path, encoding="ascii", newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValidationError(f"{path}: unexpected header {header}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    for k, row in enumerate(rows, start=2):
        if len(row) != len(CSV_COLUMNS):
            raise ValidationError(f"{path}:{k}: expected {len(CSV_COLUMNS)} columns, got {len(row)}")
    data = np.array(rows, dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {name: data[:, j].copy() for j, name in enumerate(CSV_COLUMNS)}


def snapshot_filename(prefix, t):
    return f"{prefix}_t{t:.6g}.csv"


def write_plot_script(csv_paths, path, title="two-fluid shock tube"):
    """Write a gnuplot script drawing every CSV column against x.

    One PNG per field, all snapshots overlaid.  Run with ``gnuplot plot.gp``.
    """
    path = Path(path)
    names = [os.path.basename(str(p)) for p in csv_paths]
    lines = ["# generated plot script; run: gnuplot " + path.name,
             "set datafile separator ','",
             "set terminal pngcairo size 900,600",
             "set key outside right",
             "set grid",
             "set xlabel 'x [m]'"]
    units = {"alpha1": "", "rho1": " [kg/m^3]", "rho2": " [kg/m^3]", "v1": " [m/s]",
             "v2": " [m/s]", "p": " [Pa]", "E1": " [J/m^3]", "E2": " [J/m^3]"}
    for col, field in enumerate(CSV_COLUMNS[1:], start=2):
        lines.append(f"set output '{field}.png'")
        lines.append(f"set title '{title}: {field}'")
        lines.append(f"set ylabel '{field}{units[field]}'")
        plots = [f"'{n}' using 1:{col} with lines title '{n[:-4]}'" for n in names]
        lines.append("plot " + ", \\\n     ".join(plots))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_report(report, path, extra=None):
    """Dump a run report (plus any extra mapping) as JSON."""
    data = dict(vars(report))
    if extra:
        data.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, default=_json_default)
        fh.write("\n")
    return Path(path)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)
