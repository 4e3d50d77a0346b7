"""Order-1 building blocks of the splitting scheme.

Every operator maps cell arrays to fresh cell arrays; ghost values come from
:func:`pad` (zero-gradient for ``"transmissive"``, wrap-around for
``"periodic"``).
"""

from __future__ import annotations

import numpy as np

from .errors import CFLViolation, DiffusionLimitError


def pad(omega, width, boundary="transmissive"):
    mode = "wrap" if boundary == "periodic" else "edge"
    return np.pad(np.asarray(omega, dtype=float), width, mode=mode)


def check_cfl(v, r):
    cfl = float(np.max(np.abs(v))) * r if np.size(v) else 0.0
    if not np.isfinite(cfl):
        raise CFLViolation("non-finite velocity", cell=int(np.flatnonzero(~np.isfinite(v))[0]))
    if cfl > 1.0:
        raise CFLViolation(f"max|v|*r = {cfl:.6g} exceeds 1", cell=int(np.argmax(np.abs(v))))
    return cfl


def upwind_transport(omega, v, r, boundary="transmissive", check=True):
    """One explicit donor-cell step of ``omega_t + (omega v)_x = 0``.

    ``out_i = omega_i + r [omega_{i-1} v+_{i-1} - omega_i |v_i| + omega_{i+1} v-_{i+1}]``
    with ``v+ = max(v, 0)`` and ``v- = max(-v, 0)``.
    """
    if check:
        check_cfl(v, r)
    w = pad(omega, 1, boundary)
    u = pad(v, 1, boundary)
    vp = np.maximum(u, 0.0)
    vm = np.maximum(-u, 0.0)
    return w[1:-1] + r * (w[:-2] * vp[:-2] - w[1:-1] * (vp[1:-1] + vm[1:-1]) + w[2:] * vm[2:])


def average_o1(omega, a, boundary="transmissive"):
    """Three-point smoothing with weights ``(a, 1 - 2a, a)``."""
    w = pad(omega, 1, boundary)
    return a * w[:-2] + (1.0 - 2.0 * a) * w[1:-1] + a * w[2:]


def viscous_increment(omega, mu, r, h, boundary="transmissive"):
    """Explicit second-difference diffusion ``omega += (r mu / h) * d2(omega)``."""
    if mu == 0.0:
        return np.array(omega, dtype=float)
    lam = r * mu / h
    if lam > 0.5:
        raise DiffusionLimitError(f"r*mu/h = {lam:.6g} exceeds 1/2")
    w = pad(omega, 1, boundary)
    return w[1:-1] + lam * (w[2:] - 2.0 * w[1:-1] + w[:-2])


def centered_half_diff(omega, boundary="transmissive"):
    """``(omega_{i+1} - omega_{i-1}) / 2``: h times the centered derivative."""
    w = pad(omega, 1, boundary)
    return 0.5 * (w[2:] - w[:-2])


def pressure_correction_canonical(r1, r2, m1, m2, F1, F2, clo, r, h, g,
                                  boundary="transmissive", diff=centered_half_diff):
    """Momentum and ``F*`` update of the canonical form from averaged values.

    ``clo`` is the closure of the averaged fields.  ``diff`` returns h times a
    centered derivative; the order-1 scheme uses ``(w_{i+1} - w_{i-1})/2``.
    """
    da = diff(clo.alpha1, boundary)
    dpres = diff(clo.p, boundary)
    rhg = r * h * g
    jump = r * clo.dp * da
    m1_new = m1 - jump - r * clo.alpha1 * dpres + rhg * r1
    m2_new = m2 + jump - r * clo.alpha2 * dpres + rhg * r2
    F1_new = F1 - clo.v_tau * jump + rhg * m1
    F2_new = F2 + clo.v_tau * jump + rhg * m2
    return m1_new, m2_new, F1_new, F2_new


def energy_fluxes(clo, boundary="transmissive", diff=centered_half_diff):
    """The nonconservative energy terms ``T1, T2`` of the solved form.

    Returned with the order-1 normalisation, i.e. built from full centered
    differences ``w_{i+1} - w_{i-1}`` (twice ``diff``).
    """
    dpres = 2.0 * diff(clo.p, boundary)
    da = 2.0 * diff(clo.alpha1, boundary)
    d1 = 2.0 * diff(clo.alpha1 * clo.v1, boundary)
    d2 = 2.0 * diff(clo.alpha2 * clo.v2, boundary)
    a1, a2, eta = clo.alpha1, clo.alpha2, clo.eta
    c1sq = clo.c1**2
    c2sq = clo.c2**2
    slip = eta * a1 * a2 * (clo.v1 - clo.v2) * dpres
    iface = clo.v_tau * clo.dp * da
    T1 = a1 * clo.v1 * dpres - slip + eta * clo.rho2 * a1 * c2sq * (d1 + d2) + iface
    T2 = a2 * clo.v2 * dpres + slip + eta * clo.rho1 * a2 * c1sq * (d1 + d2) - iface
    return T1, T2


def pressure_correction_solved(m1_bar, m2_bar, E1_bar, E2_bar, r1, r2, m1, m2, clo, r, h, g,
                               boundary="transmissive", diff=centered_half_diff):
    """Momentum and energy update of the solved form.

    ``clo`` and ``r1, r2, m1, m2`` are the time-n values; the ``*_bar`` arrays
    are the transported and averaged ones.
    """
    da = diff(clo.alpha1, boundary)
    dpres = diff(clo.p, boundary)
    rhg = r * h * g
    jump = r * clo.dp * da
    m1_new = m1_bar - jump - r * clo.alpha1 * dpres + rhg * r1
    m2_new = m2_bar + jump - r * clo.alpha2 * dpres + rhg * r2
    T1, T2 = energy_fluxes(clo, boundary, diff)
    E1_new = E1_bar - 0.5 * r * T1 + rhg * m1
    E2_new = E2_bar - 0.5 * r * T2 + rhg * m2
    return m1_new, m2_new, E1_new, E2_new
