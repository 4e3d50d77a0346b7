"""Grid, equation-of-state constants, model configuration and cell fields.

Phase 1 is the gas and phase 2 the liquid in the shipped cases, but nothing
here depends on that. All quantities are SI.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, VacuumError


class Form(str, enum.Enum):
    CANONICAL = "canonical"
    SOLVED = "solved"


class Order(enum.IntEnum):
    P1 = 1
    P3 = 3


@dataclass(frozen=True)
class EosParams:
    """Stiffened-gas constants of both phases.

    The state law of phase j is ``p = (K_j - 1)(E_j/alpha_j - rho_j v_j^2/2)
    - K_j p_inf_j``.  ``gamma_j`` is always ``K_j - 1``.
    """

    K1: float
    K2: float
    p_inf1: float = 0.0
    p_inf2: float = 0.0

    def __post_init__(self):
        for name in ("K1", "K2"):
            if not getattr(self, name) > 1.0:
                raise ValidationError(f"{name} must be > 1, got {getattr(self, name)}")
        for name in ("p_inf1", "p_inf2"):
            if not getattr(self, name) >= 0.0:
                raise ValidationError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def gamma1(self) -> float:
        return self.K1 - 1.0

    @property
    def gamma2(self) -> float:
        return self.K2 - 1.0


@dataclass(frozen=True)
class ModelConfig:
    """Model variant and scheme constants.

    ``r`` is the fixed ratio dt/h.  ``a`` is the averaging weight: the
    three-point weight for order 1, the implicit sixth-difference weight for
    order 3.  ``sound_speed`` selects the sound speed used by the solved-form
    energy correction: ``"reduced"`` is ``(p + K p_inf)/rho``, ``"stiffened"``
    the thermodynamic ``K (p + p_inf)/rho``.  ``closure_on_bar`` makes the
    solved form run its algebraic step on the averaged values instead of the
    time-n values (experimental).
    """

    delta: float = 2.0
    form: Form = Form.CANONICAL
    order: Order = Order.P1
    r: float = 0.0012
    a: float = 0.3
    g: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    post_treatment_halfwidth: int = 0
    boundary: str = "transmissive"
    sound_speed: str = "reduced"
    closure_on_bar: bool = False

    def __post_init__(self):
        object.__setattr__(self, "form", Form(self.form))
        object.__setattr__(self, "order", Order(int(self.order)))
        if not self.r > 0.0:
            raise ValidationError(f"r must be > 0, got {self.r}")
        if self.order is Order.P1 and not 0.0 <= self.a < 0.5:
            raise ValidationError(f"a must lie in [0, 1/2) for order 1, got {self.a}")
        if self.order is Order.P3 and not self.a >= 0.0:
            raise ValidationError(f"a must be >= 0 for order 3, got {self.a}")
        if not self.delta >= 0.0:
            raise ValidationError(f"delta must be >= 0, got {self.delta}")
        if not (self.mu1 >= 0.0 and self.mu2 >= 0.0):
            raise ValidationError("viscosities must be >= 0")
        if self.post_treatment_halfwidth < 0:
            raise ValidationError("post_treatment_halfwidth must be >= 0")
        if self.boundary not in ("transmissive", "periodic"):
            raise ValidationError(f"unknown boundary treatment {self.boundary!r}")
        if self.sound_speed not in ("reduced", "stiffened"):
            raise ValidationError(f"unknown sound_speed {self.sound_speed!r}")
        if not math.isfinite(self.g):
            raise ValidationError("g must be finite")

    @property
    def ghost_width(self) -> int:
        return int(self.order)

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Grid:
    n_cells: int
    h: float
    x0: float = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValidationError(f"n_cells must be >= 2, got {self.n_cells}")
        if not self.h > 0.0:
            raise ValidationError(f"h must be > 0, got {self.h}")

    @classmethod
    def from_length(cls, n_cells: int, length: float, x0: float = 0.0) -> "Grid":
        return cls(int(n_cells), float(length) / int(n_cells), float(x0))

    @property
    def length(self) -> float:
        return self.n_cells * self.h

    @property
    def centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.n_cells) + 0.5) * self.h

    def check_stencil(self, halfwidth: int):
        if self.n_cells < 2 * halfwidth + 1:
            raise ValidationError(
                f"{self.n_cells} cells is too few for a stencil of half-width {halfwidth}"
            )


@dataclass(frozen=True)
class Primitive:
    """Primitive state ``(alpha1, rho1, rho2, v1, v2, p)``; scalars or arrays."""

    alpha1: float
    rho1: float
    rho2: float
    v1: float
    v2: float
    p: float

    def validate(self, eos: EosParams, label: str = "state"):
        a1 = np.asarray(self.alpha1)
        if not np.all((a1 > 0.0) & (a1 < 1.0)):
            raise ValidationError(f"{label}: alpha1 must lie in (0, 1)")
        for name in ("rho1", "rho2"):
            if not np.all(np.asarray(getattr(self, name)) > 0.0):
                raise ValidationError(f"{label}: {name} must be > 0")
        p = np.asarray(self.p)
        if not (np.all(p > -eos.K1 * eos.p_inf1) and np.all(p > -eos.K2 * eos.p_inf2)):
            raise ValidationError(f"{label}: p must exceed -K_j p_inf_j in both phases")
        for name in ("alpha1", "rho1", "rho2", "v1", "v2", "p"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(f"{label}: {name} must be finite")

    def as_tuple(self):
        return (self.alpha1, self.rho1, self.rho2, self.v1, self.v2, self.p)


def primitives_to_conserved(prim: Primitive, eos: EosParams):
    """Map a primitive state to ``(r1, r2, m1, m2, E1, E2, p)``.

    ``r_j = rho_j alpha_j``, ``m_j = r_j v_j`` and
    ``E_j = alpha_j [(p + K_j p_inf_j)/(K_j - 1) + rho_j v_j^2/2]``.
    """
    if isinstance(prim, tuple):
        prim = Primitive(*prim)
    a1 = np.asarray(prim.alpha1, dtype=float)
    a2 = 1.0 - a1
    rho1 = np.asarray(prim.rho1, dtype=float)
    rho2 = np.asarray(prim.rho2, dtype=float)
    if np.any(a1 <= 0.0) or np.any(a2 <= 0.0):
        raise ValidationError("volume fractions must be positive")
    if np.any(rho1 <= 0.0) or np.any(rho2 <= 0.0):
        raise ValidationError("phase densities must be positive")
    v1 = np.asarray(prim.v1, dtype=float)
    v2 = np.asarray(prim.v2, dtype=float)
    p = np.asarray(prim.p, dtype=float)
    r1 = rho1 * a1
    r2 = rho2 * a2
    E1 = a1 * ((p + eos.K1 * eos.p_inf1) / (eos.K1 - 1.0) + 0.5 * rho1 * v1**2)
    E2 = a2 * ((p + eos.K2 * eos.p_inf2) / (eos.K2 - 1.0) + 0.5 * rho2 * v2**2)
    return r1, r2, r1 * v1, r2 * v2, E1, E2, p


@dataclass(frozen=True)
class FieldSet:
    """Per-cell conserved arrays plus the pressure memory.

    ``e1``/``e2`` hold ``E_j`` in the solved form and ``F_j = E_j + p alpha_j``
    in the canonical form; ``form`` says which.  Instances are never mutated
    by the scheme; every step builds a new one.
    """

    r1: np.ndarray
    r2: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    p_prev: np.ndarray
    form: Form = Form.SOLVED

    NAMES = ("r1", "r2", "m1", "m2", "e1", "e2", "p_prev")

    def __post_init__(self):
        n = len(self.r1)
        for name in self.NAMES:
            if len(getattr(self, name)) != n:
                raise ValidationError("all field arrays must have the same length")

    @property
    def n_cells(self) -> int:
        return len(self.r1)

    def arrays(self):
        return tuple(getattr(self, name) for name in self.NAMES)

    def replace(self, **changes) -> "FieldSet":
        return dataclasses.replace(self, **changes)

    def copy(self) -> "FieldSet":
        return self.replace(**{name: np.array(getattr(self, name)) for name in self.NAMES})

    def check_vacuum(self, rel: float = 1e-12):
        for name in ("r1", "r2"):
            arr = getattr(self, name)
            floor = rel * np.max(arr)
            bad = np.flatnonzero(~(arr > floor))
            if bad.size:
                raise VacuumError(f"{name} fell below {rel:g} of its maximum", cell=int(bad[0]))

    @classmethod
    def from_primitives(cls, prim: Primitive, eos: EosParams, form: Form) -> "FieldSet":
        r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(prim, eos)
        r1, r2, m1, m2, E1, E2, p = np.broadcast_arrays(r1, r2, m1, m2, E1, E2, p)
        a1 = np.broadcast_to(np.asarray(prim.alpha1, dtype=float), r1.shape)
        form = Form(form)
        if form is Form.CANONICAL:
            e1 = E1 + p * a1
            e2 = E2 + p * (1.0 - a1)
        else:
            e1, e2 = E1, E2
        return cls(*(np.array(x, dtype=float) for x in (r1, r2, m1, m2, e1, e2, p)), form=form)


@dataclass
class ClosureOut:
    """Derived per-cell quantities returned by the closure."""

    alpha1: np.ndarray
    alpha2: np.ndarray
    rho1: np.ndarray
    rho2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    p: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    eta: np.ndarray
    dp: np.ndarray
    v_tau: np.ndarray


@dataclass(frozen=True)
class OutputPlan:
    times: tuple = ()
    prefix: str = "snapshot"


@dataclass(frozen=True)
class CaseConfig:
    grid: Grid
    t_end: float
    left_state: Primitive
    right_state: Primitive
    interface_position: float
    eos: EosParams
    model: ModelConfig
    output: OutputPlan = field(default_factory=OutputPlan)
    time_policy: str = "snap"
    name: str = "case"
    boundary_rtol: float = 1e-8

    def __post_init__(self):
        if not self.t_end >= 0.0:
            raise ValidationError(f"t_end must be >= 0, got {self.t_end}")
        self.left_state.validate(self.eos, "left")
        self.right_state.validate(self.eos, "right")
        self.grid.check_stencil(self.model.ghost_width)
        if not self.boundary_rtol > 0.0:
            raise ValidationError(f"boundary_rtol must be > 0, got {self.boundary_rtol}")
        if self.time_policy not in ("snap", "shorten"):
            raise ValidationError(f"unknown time_policy {self.time_policy!r}")

    def replace(self, **changes) -> "CaseConfig":
        return dataclasses.replace(self, **changes)

    def with_cells(self, n_cells: int) -> "CaseConfig":
        """Same physical case on a grid of ``n_cells`` cells."""
        grid = Grid.from_length(n_cells, self.grid.length, self.grid.x0)
        return self.replace(grid=grid)

    def initial_primitives(self) -> Primitive:
        x = self.grid.centers
        left = x < self.interface_position
        vals = [np.where(left, lv, rv) for lv, rv in
                zip(self.left_state.as_tuple(), self.right_state.as_tuple())]
        return Primitive(*(np.asarray(v, dtype=float) for v in vals))

    def initial_fields(self) -> FieldSet:
        return FieldSet.from_primitives(self.initial_primitives(), self.eos, self.model.form)
