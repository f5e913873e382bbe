import pytest

from persuasim import GarblingPolicy, ModelParams, SimConfig


@pytest.fixture(scope="session")
def bench_params() -> ModelParams:
    """Symmetric unit-ratio benchmark: exits of [0.25, 0.75] from 0.5."""
    return ModelParams(mu_h=1.0, mu_l=0.0, sigma=1.0, p0=0.5, p_bar=0.75)


@pytest.fixture(scope="session")
def no_garbling() -> GarblingPolicy:
    return GarblingPolicy.none()


@pytest.fixture()
def quick_cfg() -> SimConfig:
    """Small but statistically usable run for unit tests."""
    return SimConfig(n_paths=4000, du=5e-5, max_u=4.0, seed=1234, bridge_correction=True)
