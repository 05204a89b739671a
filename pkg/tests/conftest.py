import pytest

from transitvuln import build_path_cache, fixtures, kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    previous = kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


@pytest.fixture(scope="session")
def cross7():
    return fixtures.cross7()


@pytest.fixture(scope="session")
def cross7_cache(cross7):
    return build_path_cache(cross7)


@pytest.fixture
def single_od(cross7):
    # a1 -> b2, 10 passengers: the worked example used across modules
    return fixtures.single_od(cross7, 1, 6, 10.0)
