import heapq
import json
import math
import os
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", category=DeprecationWarning)

from immigration.distributions import EtaLaw, InterarrivalLaw
from immigration.kernels import Indicator

script_directory = os.path.dirname(os.path.abspath(__file__))
PROJECT_DIR = os.path.dirname(script_directory)


def mm_infinity_queue_length(arrival_rate, service_rate, t, rng):
    """Number of customers in an M/M/inf system at time ``t``, started empty at 0.

    Event-driven simulation with its own arrival and departure clocks; shares
    no code with the package.
    """
    departures = []
    now = 0.0
    # the first customer arrives at time 0, like the renewal epoch S_0
    heapq.heappush(departures, now + rng.exponential(1.0 / service_rate))
    while True:
        now += rng.exponential(1.0 / arrival_rate)
        if now > t:
            break
        heapq.heappush(departures, now + rng.exponential(1.0 / service_rate))
    return sum(1 for d in departures if d > t)


def mm_infinity_sample(n, t, seed, arrival_rate=1.0, service_rate=1.0):
    rng = np.random.default_rng(seed)
    return np.array([mm_infinity_queue_length(arrival_rate, service_rate, t, rng) for _ in range(n)])


def poisson_pmf(k, mean):
    return math.exp(-mean) * mean**k / math.factorial(k)


def write_config(directory, config):
    path = os.path.join(str(directory), "config.json")
    with open(path, "w") as f:
        json.dump(config, f)
    return path


@pytest.fixture
def exp_law():
    return InterarrivalLaw.exponential(1.0)


@pytest.fixture
def mm_inf_kernel():
    return Indicator(EtaLaw.exponential(1.0))


@pytest.fixture
def minimal_config():
    return {
        "schema": 1,
        "seed": 7,
        "law": {"family": "exponential", "rate": 1.0},
        "kernel": {"kind": "indicator", "eta": {"family": "exponential", "rate": 1.0}},
        "mode": {"t": 30.0, "u_grid": [0.0], "n_replicates": 100},
    }
