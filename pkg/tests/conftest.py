import os

import pytest

from fastecpp import disc, prover, trialdiv

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
GOLDEN_CERT_PATH = os.path.join(DATA_DIR, "cert_10pow20.txt")


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return str(tmp_path_factory.mktemp("fastecpp-cache"))


@pytest.fixture(scope="session")
def table2000():
    return disc.class_number_table(2000)


@pytest.fixture(scope="session")
def product_2_20(cache_dir):
    return trialdiv.prime_product(1, 1 << 20, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def env(cache_dir):
    """Shared tables for proving runs (class numbers, prime products)."""
    config = prover.ProveConfig(cache_dir=cache_dir)
    environment = prover.Environment(config)
    environment.ensure_table(1 << 20, workers=4)
    environment.ensure_products(1 << 20)
    return environment


@pytest.fixture(scope="session")
def golden_text():
    with open(GOLDEN_CERT_PATH, "r", encoding="ascii") as f:
        return f.read()
