"""Shared fixtures: small lattices, cached builds and an isolated CLI environment."""
from pathlib import Path

import pytest

from tilelat.builder.builder import build_lp
from tilelat.builder.models import EnumerationScheme, Subgroup
from tilelat.config import get_experiment_config, get_settings
from tilelat.exactvec import SparseVector
from tilelat.observability.logging import configure_logging

REPO_ROOT = Path(__file__).resolve().parents[1]


def e(index: int, value=1) -> SparseVector:
    """value * e_index"""
    return SparseVector.basis(index, value)


def vec(*values) -> SparseVector:
    """Dense shorthand: vec(1, 0, 2) = e_0 + 2 e_2"""
    return SparseVector({i: v for i, v in enumerate(values) if v != 0})


@pytest.fixture(scope="session", autouse=True)
def quiet_logging():
    configure_logging(level="WARNING", fmt="console")


@pytest.fixture
def square_lattice() -> Subgroup:
    """2Z^2 on coordinates {0, 1} in l_2"""
    return Subgroup.from_generators([e(0, 2), e(1, 2)], 2)


@pytest.fixture
def square_lattice_l1() -> Subgroup:
    return Subgroup.from_generators([e(0, 2), e(1, 2)], 1)


@pytest.fixture
def line_lattice() -> Subgroup:
    """2Z on coordinate 0 in l_2"""
    return Subgroup.from_generators([e(0, 2)], 2)


@pytest.fixture(scope="session")
def grid_scheme() -> EnumerationScheme:
    return EnumerationScheme(kind="grid", seed=0)


@pytest.fixture(scope="session")
def lp2_build(grid_scheme) -> Subgroup:
    return build_lp(2, grid_scheme, 200)


@pytest.fixture(scope="session")
def lp1_build(grid_scheme) -> Subgroup:
    return build_lp(1, grid_scheme, 200)


@pytest.fixture
def cli_env(tmp_path, monkeypatch):
    """Fresh settings pointing at the repository's experiments file"""
    monkeypatch.setenv("TILELAT_EXPERIMENTS_CONFIG_PATH", str(REPO_ROOT / "config" / "experiments.yaml"))
    monkeypatch.delenv("TILELAT_METRICS_PATH", raising=False)
    get_settings.cache_clear()
    get_experiment_config.cache_clear()
    yield tmp_path
    get_settings.cache_clear()
    get_experiment_config.cache_clear()
