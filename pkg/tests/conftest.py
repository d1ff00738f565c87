import pytest

from gridcount.builder import build_base, build_id_test, build_ood_test, build_noisy_train

SEED = 0


@pytest.fixture(scope="session")
def base_splits():
    return build_base(SEED)


@pytest.fixture(scope="session")
def id_set():
    return build_id_test(SEED)


@pytest.fixture(scope="session")
def ood_set():
    return build_ood_test(SEED)


@pytest.fixture(scope="session")
def noisy_tr(base_splits):
    train, val = base_splits
    return build_noisy_train(train + val, SEED)
