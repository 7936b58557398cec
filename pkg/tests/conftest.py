import numpy as np
import pytest

from dotmol import LayoutGeometry, MoleculeParams, Topology


@pytest.fixture
def params():
    return MoleculeParams()


@pytest.fixture
def geometry():
    return LayoutGeometry(topology=Topology.line(2))


@pytest.fixture
def line3():
    return LayoutGeometry(topology=Topology.line(3))


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
