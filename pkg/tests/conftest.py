import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mbrep import _kernels
from mbrep.multrep import MultVector, RepSpace
from mbrep.system import spherical_system
from mbrep.words import Alphabet, Word


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    _kernels.warmup()


@pytest.fixture(scope="session")
def rank2():
    return Alphabet.rank(2)


@pytest.fixture(scope="session")
def spherical_space(rank2):
    system, forms = spherical_system(rank2)
    return RepSpace(system, forms)


@pytest.fixture(scope="session")
def seed_a(rank2, spherical_space):
    return MultVector.seed(spherical_space, {Word.parse(rank2, "a"): [1.0]})
