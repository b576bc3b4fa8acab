import pytest

from srgen.subject import StaticModel

from support import load


@pytest.fixture
def bank():
    return load("bank_account.sub")


@pytest.fixture
def bank_model(bank):
    return StaticModel(bank)
