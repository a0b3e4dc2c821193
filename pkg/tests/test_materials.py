import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nriguide.materials import (LayerStack, MaterialError, MaterialModel, StackOrderError,
                                material_from_dict, permeability, permittivity, validate_stack)


def lorentz_ratio(wp, wt, g, w):
    # (wp^2 - w^2 - i w g) / (wt^2 - w^2 - i w g), algebraically equal to the model
    return (wp**2 - w**2 - 1j * w * g) / (wt**2 - w**2 - 1j * w * g)


def test_strong_absorption_values():
    m = MaterialModel.drude_lorentz(1.25, 1, 1e-3, 1.189, 1, 1e-3)
    eps, mu = permittivity(m, 1.08), permeability(m, 1.08)
    assert eps.real == pytest.approx(-2.38, abs=5e-3)
    assert eps.imag == pytest.approx(2.19e-2, abs=5e-5)
    assert mu.real == pytest.approx(-1.48, abs=1e-2)
    assert mu.imag == pytest.approx(1.61e-2, abs=5e-5)


def test_low_absorption_values():
    m = MaterialModel.drude_lorentz(1.25, 1, 1e-10, 1.189, 1, 1e-10)
    eps, mu = permittivity(m, 1.09), permeability(m, 1.09)
    assert eps.real == pytest.approx(-1.99, abs=5e-3)
    assert eps.imag == pytest.approx(1.73e-9, abs=5e-12)
    assert mu.real == pytest.approx(-1.20, abs=5e-3)
    assert mu.imag == pytest.approx(1.27e-9, abs=5e-12)


def test_caption_plasma_frequency_gives_other_value():
    m = MaterialModel.drude_lorentz(1.32, 1, 1e-10, 1.32, 1, 1e-10)
    assert permittivity(m, 1.09).real == pytest.approx(-2.946, abs=1e-3)


@given(wp=st.floats(0.1, 3), wt=st.floats(0.1, 3), g=st.floats(0, 1), w=st.floats(0.05, 3))
def test_matches_ratio_form(wp, wt, g, w):
    assume(g > 0 or abs(w - wt) > 1e-3)
    m = MaterialModel.drude_lorentz(wp, wt, g, wp, wt, g)
    assert permittivity(m, w) == pytest.approx(lorentz_ratio(wp, wt, g, w), rel=1e-9, abs=1e-9)


@given(wt=st.floats(0.1, 3), g=st.floats(0, 5), w=st.floats(0.01, 5))
def test_no_coupling_is_exactly_one(wt, g, w):
    m = MaterialModel.drude_lorentz(wt, wt, g, wt, wt, g)
    assert permittivity(m, w) == 1
    assert permeability(m, w) == 1


@given(wt=st.floats(0.1, 2), extra=st.floats(0.01, 1), g=st.floats(0, 1), w=st.floats(0.01, 3))
def test_passive_medium_absorbs(wt, extra, g, w):
    assume(g > 0 or abs(w - wt) > 1e-6)
    m = MaterialModel.drude_lorentz(wt + extra, wt, g, wt + extra, wt, g)
    assert permittivity(m, w).imag >= 0


def test_pole_at_resonance():
    m = MaterialModel.drude_lorentz(1.25, 1, 0, 1.25, 1, 0)
    with pytest.raises(MaterialError):
        permittivity(m, 1.0)
    with pytest.raises(MaterialError):
        permittivity(m, -1.0)


def test_invalid_models():
    with pytest.raises(MaterialError):
        MaterialModel.drude_lorentz(1.25, 1, -1e-3, 1.25, 1, 0)
    with pytest.raises(MaterialError):
        MaterialModel.drude_lorentz(1.25, 0, 0, 1.25, 1, 0)
    with pytest.raises(MaterialError):
        MaterialModel(kind="plasma")


def test_stack_geometry_checks(vacuum):
    with pytest.raises(MaterialError):
        LayerStack(vacuum, vacuum, vacuum, 1.0, 1.0)
    with pytest.raises(MaterialError):
        LayerStack(vacuum, vacuum, vacuum, 1.0, 0.0)
    with pytest.raises(MaterialError):
        LayerStack(vacuum, vacuum, vacuum, -1.0, 0.5)


def test_validate_stack_ordering(vacuum):
    core = MaterialModel.fixed(-1.99, -1.99)
    assert validate_stack(LayerStack(vacuum, vacuum, core, 1, 0.5), 1.0).ok
    inverted = LayerStack(MaterialModel.fixed(4, 1), vacuum, MaterialModel.fixed(2, 1), 1, 0.5)
    report = validate_stack(inverted, 1.0)
    assert not report.ok and report.violations
    with pytest.raises(StackOrderError):
        validate_stack(inverted, 1.0, strict=True)
    # equal indices leave the guided interval empty
    assert not validate_stack(LayerStack(vacuum, vacuum, vacuum, 1, 0.5), 1.0).core_above_lower


def test_media_and_symmetry():
    vac = MaterialModel.vacuum()
    core = MaterialModel.drude_lorentz(1.25, 1, 1e-10, 1.25, 1, 1e-10)
    stack = LayerStack(vac, vac, core, 3.0, 0.75)
    media = stack.media(1.09)
    assert media.left_handed(3) and not media.left_handed(1)
    assert media.symmetric
    assert np.all(media.real_part().eps.imag == 0)
    assert stack.lossless().absorption == 0
    assert stack.is_symmetric(1.09)


@pytest.mark.parametrize("model", [
    MaterialModel.fixed(2.25 + 0.1j, 1.0),
    MaterialModel.drude_lorentz(1.25, 1, 1e-3, 1.189, 1, 1e-3),
])
def test_dict_round_trip(model):
    assert material_from_dict(model.to_dict()) == model


def test_dict_errors():
    with pytest.raises(MaterialError):
        material_from_dict({"kind": "drude_lorentz", "omega_pe": 1.0})
    with pytest.raises(MaterialError):
        material_from_dict({"kind": "fixed", "eps": [1, 2, 3]})
