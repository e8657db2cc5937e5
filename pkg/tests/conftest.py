import math

import numpy as np
import pytest

from gmdiff import random_spec, standard_mixture_1d, standard_normal_spec


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion, with runtime
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\n[{status}] {name} ({report.duration:.1f}s)", flush=True)


@pytest.fixture
def std1d():
    return standard_normal_spec(1)


@pytest.fixture
def std2d():
    return standard_normal_spec(2)


@pytest.fixture
def anchor():
    """The repo's standard 1D two-component mixture (means +-2, var 0.25)."""
    return standard_mixture_1d()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def naive_density(weights, means, covs, x):
    """Unvectorized direct mixture density; the reference oracle for the
    log-sum-exp implementation."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for w, mu, cov in zip(weights, means, covs):
        mu = np.asarray(mu, dtype=float)
        cov = np.asarray(cov, dtype=float)
        d = len(mu)
        diff = x - mu
        quad = float(diff @ np.linalg.inv(cov) @ diff)
        norm = (2.0 * math.pi) ** (d / 2.0) * math.sqrt(np.linalg.det(cov))
        total += w * math.exp(-0.5 * quad) / norm
    return total


def make_random_spec(d, k, seed, eig_range=(0.25, 4.0), mean_scale=2.0):
    return random_spec(d, k, np.random.default_rng(seed),
                       eig_range=eig_range, mean_scale=mean_scale)
