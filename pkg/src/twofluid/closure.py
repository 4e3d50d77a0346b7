"""Algebraic recovery of primitive variables from conserved cell values.

Both forms reduce equal pressure in the two stiffened-gas laws to a quadratic
``A X^2 + B X + C = 0`` in ``X = alpha1``.  In the canonical form the energy
slot carries ``F_j = E_j + p alpha_j`` and the quadratic depends on the
pressure memory; in the solved form ``A`` depends on the EOS only.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import (
    ClosureInconsistency,
    NoAdmissibleRoot,
    SoundSpeedError,
    TwoAdmissibleRoots,
)
from .state import ClosureOut, EosParams, Form

EPS_A = 1e-12
ROOT_MARGIN = 1e-14
PRESSURE_RTOL = 1e-9
ROUNDING_ULPS = 64


class QuadCoeffs(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


def quad_coeffs_canonical(F1, F2, m1, m2, v1, v2, p_prev, eos: EosParams) -> QuadCoeffs:
    K1, K2, P1, P2 = eos.K1, eos.K2, eos.p_inf1, eos.p_inf2
    kin1 = 0.5 * (K1 - 1.0) * m1 * v1
    kin2 = 0.5 * (K2 - 1.0) * m2 * v2
    A = (K1 - 1.0) * p_prev + K1 * P1 - (K2 - 1.0) * p_prev - K2 * P2
    B = (-(K1 - 1.0) * F1 - (K2 - 1.0) * F2 - K1 * P1 + K2 * P2
         + kin1 + kin2 + (K2 - K1) * p_prev)
    C = (K1 - 1.0) * F1 - kin1
    return QuadCoeffs(*np.broadcast_arrays(A, B, C))


def quad_coeffs_solved(E1, E2, m1, m2, v1, v2, eos: EosParams) -> QuadCoeffs:
    K1, K2, P1, P2 = eos.K1, eos.K2, eos.p_inf1, eos.p_inf2
    kin1 = 0.5 * (K1 - 1.0) * m1 * v1
    kin2 = 0.5 * (K2 - 1.0) * m2 * v2
    A = K1 * P1 - K2 * P2 + 0.0 * E1
    B = -(K1 - 1.0) * E1 - (K2 - 1.0) * E2 - K1 * P1 + K2 * P2 + kin1 + kin2
    C = (K1 - 1.0) * E1 - kin1
    return QuadCoeffs(*np.broadcast_arrays(A, B, C))


def _admissible(x):
    return (x > ROOT_MARGIN) & (x < 1.0 - ROOT_MARGIN)


def solve_alpha(q: QuadCoeffs):
    """Return the root of ``A X^2 + B X + C`` lying in the open interval (0, 1).

    Works elementwise on arrays.  Nearly-degenerate quadratics
    (``|A| <= 1e-12 max(|B|, |C|)``) are solved as ``B X + C = 0``.

    Raises
    ------
    NoAdmissibleRoot
        No root in (0, 1) for some cell.
    TwoAdmissibleRoots
        Both roots in (0, 1) for some cell.
    """
    A, B, C = (np.asarray(c, dtype=float) for c in q)
    scalar = A.ndim == 0 and B.ndim == 0 and C.ndim == 0
    A, B, C = (np.atleast_1d(c) for c in np.broadcast_arrays(A, B, C))

    linear = np.abs(A) <= EPS_A * np.maximum(np.abs(B), np.abs(C))
    with np.errstate(divide="ignore", invalid="ignore"):
        disc = B * B - 4.0 * A * C
        sqrt_disc = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
        sgn = np.where(B >= 0.0, 1.0, -1.0)
        qq = -0.5 * (B + sgn * sqrt_disc)
        x1 = qq / A
        x2 = C / qq
        x_lin = -C / B

    ok1 = _admissible(x1) & ~linear
    ok2 = _admissible(x2) & ~linear
    ok_lin = _admissible(x_lin) & linear
    count = ok1.astype(int) + ok2.astype(int) + ok_lin.astype(int)

    # a double root shows up as two equal admissible values
    double = ok1 & ok2 & (x1 == x2)
    count = np.where(double, 1, count)

    none = np.flatnonzero(count == 0)
    if none.size:
        i = int(none[0])
        raise NoAdmissibleRoot(
            f"no root of the alpha1 quadratic in (0, 1): A={A[i]:.6g} B={B[i]:.6g} C={C[i]:.6g}",
            cell=None if scalar else i,
        )
    two = np.flatnonzero(count > 1)
    if two.size:
        i = int(two[0])
        raise TwoAdmissibleRoots(
            f"two roots of the alpha1 quadratic in (0, 1): {x1[i]:.6g}, {x2[i]:.6g}",
            cell=None if scalar else i,
        )
    alpha = np.where(linear, x_lin, np.where(ok1, x1, x2))
    return float(alpha[0]) if scalar else alpha


def interface_terms(alpha1, alpha2, rho1, rho2, v1, v2, delta, eos: EosParams):
    """Interface pressure correction ``dp`` and interface velocity ``v_tau``."""
    dp = delta * alpha1 * alpha2 * rho1 * rho2 / (rho1 * alpha2 + rho2 * alpha1) * (v1 - v2) ** 2
    w1 = alpha2 * eos.gamma1
    w2 = alpha1 * eos.gamma2
    v_tau = (w1 * v1 + w2 * v2) / (w1 + w2)
    return dp, v_tau


def sound_speeds_sq(p, rho1, rho2, eos: EosParams, kind: str = "reduced"):
    if kind == "reduced":
        c1 = (p + eos.K1 * eos.p_inf1) / rho1
        c2 = (p + eos.K2 * eos.p_inf2) / rho2
    else:
        c1 = eos.K1 * (p + eos.p_inf1) / rho1
        c2 = eos.K2 * (p + eos.p_inf2) / rho2
    return c1, c2


def _pressures(E1, E2, alpha1, alpha2, rho1, rho2, v1, v2, eos):
    p1 = (eos.K1 - 1.0) * (E1 / alpha1 - 0.5 * rho1 * v1**2) - eos.K1 * eos.p_inf1
    p2 = (eos.K2 - 1.0) * (E2 / alpha2 - 0.5 * rho2 * v2**2) - eos.K2 * eos.p_inf2
    return p1, p2


def rounding_floor(p1, p2, alpha1, alpha2, rho1, rho2, v1, v2, eos):
    """Pressure gap that a few ulps of error in alpha1 alone can produce.

    ``dp_j/dalpha_j`` is ``(p_j + K_j p_inf_j + (K_j - 1) rho_j v_j^2 / 2) / alpha_j``;
    for a stiff liquid at low pressure and small ``alpha_j`` this dwarfs ``p``.
    """
    s1 = (np.abs(p1) + eos.K1 * eos.p_inf1 + eos.gamma1 * 0.5 * rho1 * v1**2) / alpha1
    s2 = (np.abs(p2) + eos.K2 * eos.p_inf2 + eos.gamma2 * 0.5 * rho2 * v2**2) / alpha2
    return ROUNDING_ULPS * np.finfo(float).eps * np.maximum(s1, s2)


def _check_pressures(p1, p2, check, floor=0.0):
    if not check:
        return
    scale = np.maximum(np.maximum(np.abs(p1), np.abs(p2)), 1.0)
    bad = np.flatnonzero(~(np.abs(p1 - p2) <= PRESSURE_RTOL * scale + floor))
    if bad.size:
        i = int(bad[0])
        raise ClosureInconsistency(
            f"phase pressures disagree: p1={p1[i]:.17g} p2={p2[i]:.17g}", cell=i
        )


def _finish(alpha1, r1, r2, v1, v2, E1, E2, delta, eos, sound_speed, check):
    alpha2 = 1.0 - alpha1
    rho1 = r1 / alpha1
    rho2 = r2 / alpha2
    p1, p2 = _pressures(E1, E2, alpha1, alpha2, rho1, rho2, v1, v2, eos)
    if check:
        floor = rounding_floor(p1, p2, alpha1, alpha2, rho1, rho2, v1, v2, eos)
        _check_pressures(p1, p2, check, floor)
    p = 0.5 * (p1 + p2)
    c1sq, c2sq = sound_speeds_sq(p, rho1, rho2, eos, sound_speed)
    bad = np.flatnonzero(~((c1sq > 0.0) & (c2sq > 0.0)))
    if bad.size and check:
        raise SoundSpeedError("negative squared sound speed", cell=int(bad[0]))
    with np.errstate(invalid="ignore"):
        c1 = np.sqrt(c1sq)
        c2 = np.sqrt(c2sq)
    eta = p / (c2sq * alpha1 * rho2 + c1sq * alpha2 * rho1)
    dp, v_tau = interface_terms(alpha1, alpha2, rho1, rho2, v1, v2, delta, eos)
    return ClosureOut(alpha1=alpha1, alpha2=alpha2, rho1=rho1, rho2=rho2, v1=v1, v2=v2,
                      p=p, E1=E1, E2=E2, c1=c1, c2=c2, eta=eta, dp=dp, v_tau=v_tau)


def recover_canonical(r1, r2, m1, m2, F1, F2, p_prev, eos: EosParams, delta=0.0,
                      sound_speed="reduced", check=True) -> ClosureOut:
    """Closure for the canonical form, with ``p_prev`` as pressure memory."""
    r1, r2, m1, m2, F1, F2, p_prev = (np.atleast_1d(np.asarray(x, dtype=float))
                                      for x in (r1, r2, m1, m2, F1, F2, p_prev))
    v1 = m1 / r1
    v2 = m2 / r2
    alpha1 = solve_alpha(quad_coeffs_canonical(F1, F2, m1, m2, v1, v2, p_prev, eos))
    E1 = F1 - p_prev * alpha1
    E2 = F2 - p_prev * (1.0 - alpha1)
    return _finish(alpha1, r1, r2, v1, v2, E1, E2, delta, eos, sound_speed, check)


def recover_solved(r1, r2, m1, m2, E1, E2, eos: EosParams, delta=0.0,
                   sound_speed="reduced", check=True) -> ClosureOut:
    """Closure for the solved form; also fills sound speeds and ``eta``."""
    r1, r2, m1, m2, E1, E2 = (np.atleast_1d(np.asarray(x, dtype=float))
                              for x in (r1, r2, m1, m2, E1, E2))
    v1 = m1 / r1
    v2 = m2 / r2
    alpha1 = solve_alpha(quad_coeffs_solved(E1, E2, m1, m2, v1, v2, eos))
    return _finish(alpha1, r1, r2, v1, v2, E1, E2, delta, eos, sound_speed, check)


def recover(fields, eos: EosParams, delta=0.0, sound_speed="reduced", check=True) -> ClosureOut:
    """Closure of a :class:`FieldSet`, dispatching on its form."""
    if fields.form is Form.CANONICAL:
        return recover_canonical(fields.r1, fields.r2, fields.m1, fields.m2,
                                 fields.e1, fields.e2, fields.p_prev, eos, delta,
                                 sound_speed, check)
    return recover_solved(fields.r1, fields.r2, fields.m1, fields.m2,
                          fields.e1, fields.e2, eos, delta, sound_speed, check)
