import pytest

from tbsim.config import paper_config


@pytest.fixture(scope="session")
def car_cfg():
    return paper_config("car")


@pytest.fixture(scope="session")
def fringe_cfg():
    return paper_config("fringe")
