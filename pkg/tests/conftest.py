import numpy as np
import pytest
from hypothesis import settings

from palatini.jets import J1, J2, make_point
from palatini.tensor import ETA

settings.register_profile("ci", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("ci")


def flat_point(layout=J1, g=ETA):
    """Constant metric, vanishing connection and velocities."""
    blocks = {
        "x": np.zeros(4), "g": np.asarray(g, float), "Gamma": np.zeros((4, 4, 4)),
        "dg": np.zeros((4, 4, 4)), "dGamma": np.zeros((4,) * 4),
        "ddg": np.zeros((4,) * 4), "ddGamma": np.zeros((4,) * 5),
    }
    return make_point(layout, **{b: blocks[b] for b in layout.blocks})


@pytest.fixture
def minkowski():
    return flat_point(J1)


@pytest.fixture
def minkowski2():
    return flat_point(J2)
