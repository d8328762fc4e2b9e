import pytest

from otscale import accel


@pytest.fixture(scope="session", autouse=True)
def _warm_backend():
    # Compile everything once up front so timed tests measure the
    # algorithms rather than jit compilation.
    accel.warmup()
