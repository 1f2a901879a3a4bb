import numpy as np
import pytest

from glqlab.glq import GlqProblem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def scalar(a=0.0, b=1.0, c=1.0, k=1.0, z=0.0, v=0.0):
    """1x1 problem built from scalars."""
    one = np.ones((1, 1))
    return GlqProblem.create(A=a * one, B=b * one, C=c * one, K=k * one, z=[z], v=[v])
