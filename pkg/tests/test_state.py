import numpy as np
import pytest

from twofluid.errors import ValidationError, VacuumError
from twofluid.state import (
    CaseConfig,
    EosParams,
    FieldSet,
    Form,
    Grid,
    ModelConfig,
    Order,
    Primitive,
    primitives_to_conserved,
)


def test_conserved_simple_state():
    eos = EosParams(K1=1.4, K2=1.4)
    r1, r2, m1, m2, E1, E2, p = primitives_to_conserved(Primitive(0.5, 1.0, 1.0, 0.0, 0.0, 1e5), eos)
    assert E1 == pytest.approx(1.25e5, rel=1e-15)
    assert E2 == pytest.approx(1.25e5, rel=1e-15)
    assert m1 == 0.0 and m2 == 0.0
    assert r1 == 0.5 and r2 == 0.5


def test_conserved_formula(eos):
    prim = Primitive(0.3, 50.0, 1000.0, 12.0, -3.0, 2e6)
    r1, r2, m1, m2, E1, E2, _ = primitives_to_conserved(prim, eos)
    assert r1 == pytest.approx(15.0)
    assert m2 == pytest.approx(700.0 * -3.0)
    expected = 0.7 * ((2e6 + 2.8 * 8.5e8) / 1.8 + 0.5 * 1000.0 * 9.0)
    assert E2 == pytest.approx(expected, rel=1e-14)


def test_energy_increases_with_pressure(eos):
    p = np.linspace(-1e8, 1e8, 50)
    _, _, _, _, E1, E2, _ = primitives_to_conserved(Primitive(0.4, 20.0, 900.0, 3.0, 1.0, p), eos)
    assert np.all(np.diff(E2) > 0)
    p = np.linspace(1e3, 1e8, 50)
    _, _, _, _, E1, E2, _ = primitives_to_conserved(Primitive(0.4, 20.0, 900.0, 3.0, 1.0, p), eos)
    assert np.all(np.diff(E1) > 0)


@pytest.mark.parametrize("bad", [dict(K1=1.0), dict(K2=0.5), dict(p_inf1=-1.0)])
def test_eos_rejects(bad):
    kw = dict(K1=1.4, K2=2.8, p_inf1=0.0, p_inf2=1.0)
    kw.update(bad)
    with pytest.raises(ValidationError):
        EosParams(**kw)


def test_gamma_derived():
    eos = EosParams(K1=1.4, K2=2.8)
    assert eos.gamma1 == 1.4 - 1.0
    assert eos.gamma2 == 2.8 - 1.0


@pytest.mark.parametrize("kw", [
    dict(r=0.0), dict(a=0.5), dict(a=-0.1), dict(delta=-1.0), dict(mu1=-1e-3),
    dict(boundary="reflective"), dict(post_treatment_halfwidth=-1), dict(sound_speed="x"),
])
def test_model_config_rejects(kw):
    with pytest.raises(ValidationError):
        ModelConfig(**kw)


def test_model_config_p3_allows_large_a():
    cfg = ModelConfig(order=3, a=0.8)
    assert cfg.order is Order.P3
    assert cfg.ghost_width == 3


def test_grid():
    g = Grid.from_length(4, 2.0, x0=1.0)
    assert g.h == 0.5
    np.testing.assert_allclose(g.centers, [1.25, 1.75, 2.25, 2.75])
    with pytest.raises(ValidationError):
        Grid(1, 1.0)
    with pytest.raises(ValidationError):
        Grid(5, 1.0).check_stencil(3)


@pytest.mark.parametrize("field,value", [("alpha1", 1.2), ("alpha1", 0.0), ("rho2", -1.0),
                                         ("p", -3e9)])
def test_primitive_validation_names_key(eos, field, value):
    kw = dict(alpha1=0.5, rho1=1.0, rho2=1000.0, v1=0.0, v2=0.0, p=1e5)
    kw[field] = value
    with pytest.raises(ValidationError, match=field):
        Primitive(**kw).validate(eos, "left")


def test_fieldset_canonical_packs_F(eos):
    prim = Primitive(np.array([0.2, 0.6]), np.array([30.0, 40.0]), np.array([990.0, 1000.0]),
                     np.zeros(2), np.ones(2), np.array([1e6, 2e6]))
    fs = FieldSet.from_primitives(prim, eos, Form.CANONICAL)
    fsol = FieldSet.from_primitives(prim, eos, Form.SOLVED)
    np.testing.assert_allclose(fs.e1, fsol.e1 + prim.p * prim.alpha1, rtol=1e-15)
    np.testing.assert_allclose(fs.e2, fsol.e2 + prim.p * (1 - prim.alpha1), rtol=1e-15)
    np.testing.assert_array_equal(fs.p_prev, prim.p)


def test_fieldset_length_mismatch():
    with pytest.raises(ValidationError):
        FieldSet(*(np.ones(3),) * 6, np.ones(4))


def test_vacuum_guard():
    fs = FieldSet(np.array([1.0, 1e-14]), np.ones(2), np.zeros(2), np.zeros(2),
                  np.ones(2), np.ones(2), np.ones(2))
    with pytest.raises(VacuumError):
        fs.check_vacuum()


def test_case_initial_profile(eos):
    left = Primitive(0.25, 200.0, 1000.0, 0.0, 0.0, 2e7)
    right = Primitive(0.1, 100.0, 1000.0, 0.0, 0.0, 1e7)
    case = CaseConfig(Grid.from_length(10, 10.0), 0.01, left, right, 5.0, eos, ModelConfig())
    prim = case.initial_primitives()
    np.testing.assert_array_equal(prim.alpha1, [0.25] * 5 + [0.1] * 5)
    assert case.with_cells(20).grid.h == 0.5


def test_case_rejects_bad_state(eos):
    left = Primitive(1.2, 200.0, 1000.0, 0.0, 0.0, 2e7)
    right = Primitive(0.1, 100.0, 1000.0, 0.0, 0.0, 1e7)
    with pytest.raises(ValidationError, match="alpha1"):
        CaseConfig(Grid.from_length(10, 10.0), 0.01, left, right, 5.0, eos, ModelConfig())
