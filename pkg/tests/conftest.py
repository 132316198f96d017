import numpy as np
import pytest

from app.physics.design import matched
from app.physics.network import GyratorCircuit

OMEGA0 = 2.0 * np.pi * 5e9
Z_TL = 50.0


def build_circuit(lc: float = 0.0, z0: float = 0.1, g: float = None, omega0: float = OMEGA0,
                  **kwargs) -> GyratorCircuit:
    """Normalized-parameter circuit, impedance matched unless g is given"""
    circ = GyratorCircuit.from_normalized(omega0=omega0, z_tl=Z_TL, lc=lc, z0=z0, g=0.0 if g is None else g, **kwargs)
    return matched(circ) if g is None else circ


@pytest.fixture
def make_circuit():
    return build_circuit


@pytest.fixture
def ideal_circuit() -> GyratorCircuit:
    """L_c = 0 and G = 1/Z_TL: perfect gyration at ω0"""
    return build_circuit()


@pytest.fixture
def inductive_circuit() -> GyratorCircuit:
    return build_circuit(lc=0.5, z0=10.0)


@pytest.fixture
def spectroscopy_csv(tmp_path):
    """Linear E_J(V) = 2 + 3V GHz on ten points"""
    path = tmp_path / "ej.csv"
    lines = ["# synthetic direct E_J data", "voltage,value"]
    for v in np.linspace(-0.5, 0.5, 10):
        v = float(v)
        lines.append(f"{v!r},{2.0 + 3.0 * v!r}")
    path.write_text("\n".join(lines) + "\n")
    return path
