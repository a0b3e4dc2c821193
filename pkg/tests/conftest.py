import pytest

from nriguide.materials import LayerStack, MaterialModel

_ACCEPTANCE = []


def record_acceptance(number, title, passed, detail=""):
    _ACCEPTANCE.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {number:>2}. {title}: {detail}")


@pytest.fixture
def vacuum():
    return MaterialModel.vacuum()


def low_loss_core(gamma=1e-10, omega_pm=1.25):
    return MaterialModel.drude_lorentz(1.25, 1.0, gamma, omega_pm, 1.0, gamma)


def strong_loss_core(gamma=1e-3):
    return MaterialModel.drude_lorentz(1.25, 1.0, gamma, 1.189, 1.0, gamma)


def slab(core, d, frac=0.25):
    vac = MaterialModel.vacuum()
    return LayerStack(vac, vac, core, d, frac * d)


def fixed_slab(eps3, mu3, d, frac=0.5):
    vac = MaterialModel.vacuum()
    return LayerStack(vac, vac, MaterialModel.fixed(eps3, mu3), d, frac * d)
