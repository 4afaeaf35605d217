
import pytest

from transduce_sim.budget import ExponentialLossFit, GeometrySpec, LossModel, SuperconductorSpec
from transduce_sim.constants import E_CHARGE
from transduce_sim.model import CavityMode, CenterClass
from transduce_sim.system import TransducerSystem


T_CLASS = CenterClass(g13=2e6, g12=40.0, gamma13=1e6, gamma12=1.0, omega_p=4e6)
ER_CLASS = CenterClass(g13=3e4, g12=300.0, gamma13=1e4, gamma12=1e3, omega_p=4.5e6)
CAV_A = CavityMode(226.1e12, 2e9)
CAV_C = CavityMode(8e9, 8e5)


@pytest.fixture
def t_class():
    return T_CLASS


@pytest.fixture
def er_class():
    return ER_CLASS


@pytest.fixture
def t_system():
    return TransducerSystem.homogeneous(T_CLASS, 1e6, CAV_A, CAV_C, n_pump_ref=50)


@pytest.fixture
def er_system():
    return TransducerSystem.homogeneous(ER_CLASS, 1e7, CavityMode(195.2e12, 2e9), CAV_C, n_pump_ref=5e4)


@pytest.fixture
def loss_model():
    geo = GeometrySpec(1716e-18, 40e-18, d_om=1e-6)
    sc = SuperconductorSpec(0.2, 3.7e10 / E_CHARGE * 1e18, 1.5e-3 * E_CHARGE, 300.0,
                            qp_params={"eta_pb": 0.6, "r_rec": 1e-15})
    return LossModel(geo, sc, ExponentialLossFit.from_decade_span(10e9), f_pump=226.092e12)


# acceptance criteria outcomes, printed as one block after the run
ACCEPTANCE: dict[float, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
