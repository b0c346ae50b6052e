import numpy as np
import pytest

from crossing_lab import kernels


@pytest.fixture(scope="session")
def built_kernels():
    return {name: kernels.build_kernel(spec)
            for name, spec in kernels.default_specs().items()}


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
