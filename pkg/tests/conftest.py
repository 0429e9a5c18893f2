import pytest

import fiberdyn as fd


@pytest.fixture
def space1():
    return fd.AtomicMeasureSpace((("w0", 1.0),))


@pytest.fixture
def space2():
    return fd.AtomicMeasureSpace.uniform(2)


@pytest.fixture
def space3():
    return fd.AtomicMeasureSpace.uniform(3)


@pytest.fixture
def space_weighted():
    return fd.AtomicMeasureSpace((("a", 0.2), ("b", 0.3), ("c", 0.5)))
