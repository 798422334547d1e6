import numpy as np
import pytest

from mixedsde import TimeGrid, generate_fbm


@pytest.fixture(scope="session")
def fbm_750_1024():
    """Shared medium-resolution fBm batch (H=0.75, n=1024, 200 paths)."""
    return generate_fbm(TimeGrid(1.0, 1024), 0.75, 200, seed=7)


def sample_cov_se(exact: np.ndarray, count: int) -> np.ndarray:
    """Standard error of zero-mean Gaussian sample covariance entries."""
    return np.sqrt((exact**2 + np.outer(np.diag(exact), np.diag(exact))) / count)
