import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from randheap.heap import Heap

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile("default")


@st.composite
def drop_sequences(draw, min_m=4, max_m=20, max_len=200):
    """(m, [(column, sign), ...])"""
    m = draw(st.integers(min_m, max_m))
    n = draw(st.integers(0, max_len))
    drops = draw(st.lists(st.tuples(st.integers(0, m - 1), st.sampled_from((1, -1))), min_size=n, max_size=n))
    return m, drops


def build(m, drops):
    heap = Heap(m)
    events = [heap.drop(c, s) for c, s in drops]
    return heap, events


def random_heap(rng: np.random.Generator, m: int, n: int) -> Heap:
    heap = Heap(m)
    for k in rng.integers(0, 2 * m, n):
        heap.drop(int(k % m), 1 if k < m else -1)
    return heap


@pytest.fixture
def report(capsys):
    """Print one line straight to the terminal, past pytest's capture."""
    def emit(line: str):
        with capsys.disabled():
            print("\n" + line, flush=True)
    return emit
