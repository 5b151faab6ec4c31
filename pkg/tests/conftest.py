import numpy as np
import pytest

from statesel.benchgen import (
    default_coupled_spec,
    default_decoupled_spec,
    simulate_rlc,
    simulate_synth,
)
from statesel.datamodel import ChannelMeta, SplitSpec, TimeSeriesDataset, split
from statesel.dmdc import c2d_zoh
from statesel.prefilter import prefilter


@pytest.fixture(scope="session")
def rlc_dataset():
    return simulate_rlc()


@pytest.fixture(scope="session")
def rlc_split(rlc_dataset):
    return split(rlc_dataset, SplitSpec(0.8))


@pytest.fixture(scope="session")
def rlc_kept(rlc_split):
    train, _ = rlc_split
    return prefilter(train).kept


@pytest.fixture(scope="session")
def coupled_dataset():
    return simulate_synth(default_coupled_spec())


@pytest.fixture(scope="session")
def coupled_split(coupled_dataset):
    return split(coupled_dataset, SplitSpec(0.8))


@pytest.fixture(scope="session")
def coupled_kept(coupled_split):
    train, _ = coupled_split
    return prefilter(train).kept


@pytest.fixture(scope="session")
def decoupled_dataset():
    return simulate_synth(default_decoupled_spec())


@pytest.fixture(scope="session")
def decoupled_split(decoupled_dataset):
    return split(decoupled_dataset, SplitSpec(0.8))


@pytest.fixture(scope="session")
def decoupled_kept(decoupled_split):
    train, _ = decoupled_split
    return prefilter(train).kept


def random_stable_discrete(rng, n, m, p, radius=0.9):
    """Random discrete (Ad, Bd, Cd) with spectral radius scaled below 1."""
    Ad = rng.standard_normal((n, n))
    Ad *= radius / max(abs(np.linalg.eigvals(Ad)))
    Bd = rng.standard_normal((n, m))
    Cd = rng.standard_normal((p, n))
    return Ad, Bd, Cd


def simulate_discrete(Ad, Bd, V, x0=None):
    """Plain recurrence used as the independent data generator in tests."""
    n, steps = Ad.shape[0], V.shape[1]
    X = np.empty((n, steps + 1))
    X[:, 0] = np.zeros(n) if x0 is None else x0
    for k in range(steps):
        X[:, k + 1] = Ad @ X[:, k] + Bd @ V[:, k]
    return X


def make_lti_dataset(rng, n_junk=2, steps=800, dt=0.1, n_realizations=2):
    """Small exact-LTI dataset: 2 true states, junk candidates, 1 input, 1 output.

    Junk channels are quadratic in the states, so no subset containing them
    fits exactly. Used by selector tests where speed matters.
    """
    A = np.array([[-0.4, 0.0], [0.5, -1.1]])
    B = np.array([[1.0], [0.0]])
    Ad, Bd = c2d_zoh(A, B, dt)
    manifest = [ChannelMeta("u", "input"), ChannelMeta("y", "output")]
    manifest += [ChannelMeta(f"x{j + 1}", "candidate") for j in range(2)]
    manifest += [ChannelMeta(f"junk{j + 1}", "candidate") for j in range(n_junk)]
    reals = []
    for _ in range(n_realizations):
        V = np.repeat(rng.standard_normal(steps // 8), 8)[None, :steps]
        X = simulate_discrete(Ad, Bd, V)[:, :steps]
        y = X[0] + 0.3 * X[1]
        rows = [V[0], y, X[0], X[1]]
        rows += [X[j % 2] ** 2 + 0.1 * rng.standard_normal(steps) for j in range(n_junk)]
        reals.append(np.vstack(rows))
    return TimeSeriesDataset(dt=dt, realizations=tuple(reals), manifest=tuple(manifest))
