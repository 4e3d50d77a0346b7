import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TOUMI_EOS, random_states
from twofluid.closure import (
    QuadCoeffs,
    interface_terms,
    quad_coeffs_canonical,
    quad_coeffs_solved,
    recover_canonical,
    recover_solved,
    solve_alpha,
    sound_speeds_sq,
)
from twofluid.errors import ClosureInconsistency, NoAdmissibleRoot, SoundSpeedError, TwoAdmissibleRoots
from twofluid.state import EosParams, Primitive, primitives_to_conserved

mpmath.mp.dps = 50


# --- extended-precision transcriptions, written independently of the package

def mp_coeffs_canonical(F1, F2, m1, m2, v1, v2, p, eos):
    K1, K2, P1, P2 = (mpmath.mpf(x) for x in (eos.K1, eos.K2, eos.p_inf1, eos.p_inf2))
    F1, F2, m1, m2, v1, v2, p = (mpmath.mpf(x) for x in (F1, F2, m1, m2, v1, v2, p))
    A = (K1 - 1) * p + K1 * P1 - (K2 - 1) * p - K2 * P2
    B = (-(K1 - 1) * F1 - (K2 - 1) * F2 - K1 * P1 + K2 * P2
         + (K1 - 1) * m1 * v1 / 2 + (K2 - 1) * m2 * v2 / 2 + (K2 - K1) * p)
    C = (K1 - 1) * F1 - (K1 - 1) * m1 * v1 / 2
    return A, B, C


def mp_coeffs_solved(E1, E2, m1, m2, v1, v2, eos):
    K1, K2, P1, P2 = (mpmath.mpf(x) for x in (eos.K1, eos.K2, eos.p_inf1, eos.p_inf2))
    E1, E2, m1, m2, v1, v2 = (mpmath.mpf(x) for x in (E1, E2, m1, m2, v1, v2))
    A = K1 * P1 - K2 * P2
    B = -(K1 - 1) * E1 - (K2 - 1) * E2 - K1 * P1 + K2 * P2 + (K1 - 1) * m1 * v1 / 2 + (K2 - 1) * m2 * v2 / 2
    C = (K1 - 1) * E1 - (K1 - 1) * m1 * v1 / 2
    return A, B, C


def _close(got, ref, scale):
    return abs(mpmath.mpf(float(got)) - ref) <= 1e-13 * scale


def test_coefficients_match_extended_precision(rng, eos):
    prim = random_states(rng, 200)
    r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(prim, eos)
    a1 = prim.alpha1
    F1 = E1 + p * a1
    F2 = E2 + p * (1 - a1)
    v1, v2 = m1 / r1, m2 / r2
    qc = quad_coeffs_canonical(F1, F2, m1, m2, v1, v2, p, eos)
    qs = quad_coeffs_solved(E1, E2, m1, m2, v1, v2, eos)
    for i in range(200):
        ref = mp_coeffs_canonical(F1[i], F2[i], m1[i], m2[i], v1[i], v2[i], p[i], eos)
        scale = max(abs(x) for x in ref)
        assert all(_close(g[i], r, scale) for g, r in zip(qc, ref))
        ref = mp_coeffs_solved(E1[i], E2[i], m1[i], m2[i], v1[i], v2[i], eos)
        scale = max(abs(x) for x in ref)
        assert all(_close(g[i], r, scale) for g, r in zip(qs, ref))


def test_coefficients_degenerate_when_phases_coincide():
    eos = EosParams(K1=1.4, K2=1.4, p_inf1=3e5, p_inf2=3e5)
    q = quad_coeffs_canonical(2e5, 3e5, 1.0, 2.0, 3.0, 4.0, 1e5, eos)
    assert q.A == 0.0
    q = quad_coeffs_solved(2e5, 3e5, 1.0, 2.0, 3.0, 4.0, eos)
    assert q.A == 0.0


def test_coefficients_zero_velocity():
    eos = TOUMI_EOS
    q = quad_coeffs_canonical(2e5, 3e9, 0.0, 0.0, 0.0, 0.0, 1e6, eos)
    assert q.C == pytest.approx(0.4 * 2e5, rel=1e-15)
    q = quad_coeffs_solved(2e5, 3e9, 0.0, 0.0, 0.0, 0.0, eos)
    assert q.C == pytest.approx(0.4 * 2e5, rel=1e-15)


def test_solve_alpha_examples():
    assert solve_alpha(QuadCoeffs(0.0, -1.0, 0.5)) == 0.5
    assert solve_alpha(QuadCoeffs(1.0, -1.3, 0.3)) == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(NoAdmissibleRoot):
        solve_alpha(QuadCoeffs(1.0, 3.0, 2.0))
    with pytest.raises(TwoAdmissibleRoots):
        solve_alpha(QuadCoeffs(1.0, -0.9, 0.18))  # roots 0.3, 0.6


def test_solve_alpha_reports_cell():
    A = np.array([1.0, 1.0, 1.0])
    B = np.array([-1.3, 3.0, -1.3])
    C = np.array([0.3, 2.0, 0.3])
    with pytest.raises(NoAdmissibleRoot) as info:
        solve_alpha(QuadCoeffs(A, B, C))
    assert info.value.cell == 1


def test_solve_alpha_root_at_zero_rejected():
    # roots 0 and 0.5: 0 lies outside the open interval
    assert solve_alpha(QuadCoeffs(2.0, -1.0, 0.0)) == pytest.approx(0.5)


def test_solve_alpha_near_degenerate_uses_linear():
    x = solve_alpha(QuadCoeffs(1e-14, -2.0, 0.5))
    assert x == 0.25


@settings(max_examples=200, deadline=None)
@given(root=st.floats(0.01, 0.99), other=st.floats(1.5, 50.0) | st.floats(-50.0, -0.5),
       lam=st.floats(1e-6, 1e6) | st.floats(-1e6, -1e-6))
def test_solve_alpha_scale_invariant(root, other, lam):
    q = QuadCoeffs(1.0, -(root + other), root * other)
    x = solve_alpha(q)
    assert x == pytest.approx(root, rel=1e-12, abs=1e-14)
    y = solve_alpha(QuadCoeffs(lam * q.A, lam * q.B, lam * q.C))
    assert y == pytest.approx(x, rel=1e-12, abs=1e-14)


def _prim_err(clo, prim):
    errs = []
    for name in ("alpha1", "rho1", "rho2", "p"):
        ref = getattr(prim, name)
        errs.append(np.max(np.abs(getattr(clo, name) - ref) / np.abs(ref)))
    for name in ("v1", "v2"):
        ref = getattr(prim, name)
        errs.append(np.max(np.abs(getattr(clo, name) - ref) / np.maximum(np.abs(ref), 1.0)))
    return max(errs)


def test_round_trip_solved(rng, eos):
    prim = random_states(rng, 1000)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    clo = recover_solved(r1, r2, m1, m2, E1, E2, eos)
    assert _prim_err(clo, prim) <= 1e-10
    assert np.all(clo.alpha1 + clo.alpha2 == 1.0)


def test_round_trip_canonical(rng, eos):
    prim = random_states(rng, 1000)
    r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(prim, eos)
    F1 = E1 + p * prim.alpha1
    F2 = E2 + p * (1 - prim.alpha1)
    clo = recover_canonical(r1, r2, m1, m2, F1, F2, p, eos)
    assert _prim_err(clo, prim) <= 1e-10


def test_forward_construction_alpha_quarter(eos):
    prim = Primitive(0.25, 226.0, 1048.0, 0.0, 0.0, 2e7)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    clo = recover_solved(r1, r2, m1, m2, E1, E2, eos)
    assert abs(clo.alpha1[0] - 0.25) <= 1e-10


def test_canonical_perturbed_memory_stays_consistent(rng, eos):
    prim = random_states(rng, 500)
    r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(prim, eos)
    F1 = E1 + p * prim.alpha1
    F2 = E2 + p * (1 - prim.alpha1)
    # check=True would raise ClosureInconsistency if the phase pressures split
    clo = recover_canonical(r1, r2, m1, m2, F1, F2, 1.01 * p, eos)
    assert np.all((clo.alpha1 > 0) & (clo.alpha1 < 1))


def test_symmetric_state():
    eos = EosParams(K1=1.4, K2=1.4)
    prim = Primitive(0.5, 1.2, 1.2, 0.0, 0.0, 1e5)
    r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(prim, eos)
    clo = recover_canonical(r1, r2, m1, m2, E1 + 0.5 * p, E2 + 0.5 * p, p, eos)
    assert clo.rho1[0] == pytest.approx(clo.rho2[0], rel=1e-14)
    assert clo.alpha1[0] == pytest.approx(0.5, rel=1e-14)


def test_sound_speed_literal(rng, eos):
    prim = random_states(rng, 100)
    c1, c2 = sound_speeds_sq(prim.p, prim.rho1, prim.rho2, eos)
    np.testing.assert_allclose(c1, (prim.p + 1.4 * 0.0) / prim.rho1, rtol=1e-15)
    np.testing.assert_allclose(c2, (prim.p + 2.8 * 8.5e8) / prim.rho2, rtol=1e-15)
    s1, s2 = sound_speeds_sq(prim.p, prim.rho1, prim.rho2, eos, "stiffened")
    np.testing.assert_allclose(s2, 2.8 * (prim.p + 8.5e8) / prim.rho2, rtol=1e-15)


def test_solved_closure_fills_speeds_and_eta(rng, eos):
    prim = random_states(rng, 100)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    clo = recover_solved(r1, r2, m1, m2, E1, E2, eos)
    c1sq = (clo.p + eos.K1 * eos.p_inf1) / clo.rho1
    c2sq = (clo.p + eos.K2 * eos.p_inf2) / clo.rho2
    np.testing.assert_allclose(clo.c1**2, c1sq, rtol=1e-12)
    eta = clo.p / (c2sq * clo.alpha1 * clo.rho2 + c1sq * clo.alpha2 * clo.rho1)
    np.testing.assert_allclose(clo.eta, eta, rtol=1e-12)


def test_eta_zero_at_zero_pressure():
    eos = EosParams(K1=2.0, K2=2.8, p_inf1=1e5, p_inf2=8.5e8)
    prim = Primitive(0.4, 10.0, 1000.0, 1.0, 2.0, 0.0)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    clo = recover_solved(r1, r2, m1, m2, E1, E2, eos)
    assert abs(clo.eta[0]) < 1e-12


def test_negative_sound_speed_aborts():
    eos = EosParams(K1=1.4, K2=2.8, p_inf1=0.0, p_inf2=8.5e8)
    # gas pressure well below zero: the gas law gives negative c1^2
    r1, r2 = 0.4 * 10.0, 0.6 * 1000.0
    p = -1e5
    E1 = 0.4 * p / 0.4
    E2 = 0.6 * (p + 2.8 * 8.5e8) / 1.8
    with pytest.raises((SoundSpeedError, NoAdmissibleRoot, TwoAdmissibleRoots)):
        recover_solved(r1, r2, 0.0, 0.0, E1, E2, eos)


def test_pressure_mismatch_detected(eos):
    prim = Primitive(0.3, 50.0, 1000.0, 0.0, 0.0, 1e6)
    r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(prim, eos)
    from twofluid.closure import _finish
    with pytest.raises(ClosureInconsistency):
        _finish(np.array([0.3000001]), np.atleast_1d(r1), np.atleast_1d(r2), np.zeros(1),
                np.zeros(1), np.atleast_1d(E1), np.atleast_1d(E2), 0.0, eos, "reduced", True)


def test_interface_terms_examples(eos):
    dp, vt = interface_terms(0.3, 0.7, 50.0, 1000.0, 4.0, 4.0, 2.0, eos)
    assert dp == 0.0 and vt == pytest.approx(4.0)
    dp, _ = interface_terms(0.3, 0.7, 50.0, 1000.0, 10.0, 1.0, 0.0, eos)
    assert dp == 0.0
    _, vt = interface_terms(0.0, 1.0, 50.0, 1000.0, 10.0, 1.0, 2.0, eos)
    assert vt == 10.0


def test_interface_terms_formula(eos):
    a1, a2, r1, r2, v1, v2 = 0.3, 0.7, 50.0, 1000.0, 10.0, 1.0
    dp, vt = interface_terms(a1, a2, r1, r2, v1, v2, 2.0, eos)
    assert dp == pytest.approx(2 * a1 * a2 * r1 * r2 / (r1 * a2 + r2 * a1) * 81.0, rel=1e-14)
    w1, w2 = a2 * 0.4, a1 * 1.8
    assert vt == pytest.approx((w1 * v1 + w2 * v2) / (w1 + w2), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(a1=st.floats(0.001, 0.999), v1=st.floats(-100, 100), v2=st.floats(-100, 100))
def test_v_tau_between_phase_velocities(a1, v1, v2):
    _, vt = interface_terms(a1, 1 - a1, 50.0, 1000.0, v1, v2, 2.0, TOUMI_EOS)
    assert min(v1, v2) - 1e-12 * max(abs(v1), abs(v2), 1) <= vt
    assert vt <= max(v1, v2) + 1e-12 * max(abs(v1), abs(v2), 1)


def test_low_pressure_gap_within_rounding_floor(rng, eos):
    # below ~1 bar the stiff liquid law amplifies one ulp of alpha1 past 1e-9 |p|
    prim = random_states(rng, 2000, p_lo=3.0)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    clo = recover_solved(r1, r2, m1, m2, E1, E2, eos)  # would raise if the gap exceeded the floor
    from twofluid.closure import _pressures, rounding_floor
    p1, p2 = _pressures(E1, E2, clo.alpha1, clo.alpha2, clo.rho1, clo.rho2, clo.v1, clo.v2, eos)
    gap = np.abs(p1 - p2)
    assert np.all(gap <= 1e-9 * np.maximum(np.abs(p1), 1.0) + rounding_floor(
        p1, p2, clo.alpha1, clo.alpha2, clo.rho1, clo.rho2, clo.v1, clo.v2, eos))
    assert np.max(np.abs(clo.p - prim.p) / prim.p) < 1e-6


def test_pressure_invariant_at_working_pressures(rng, eos):
    prim = random_states(rng, 5000)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    clo = recover_solved(r1, r2, m1, m2, E1, E2, eos)
    from twofluid.closure import _pressures
    p1, p2 = _pressures(E1, E2, clo.alpha1, clo.alpha2, clo.rho1, clo.rho2, clo.v1, clo.v2, eos)
    assert np.max(np.abs(p1 - p2) / np.maximum(np.maximum(np.abs(p1), np.abs(p2)), 1.0)) <= 1e-9
