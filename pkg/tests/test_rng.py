import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcasampler.samplers import RngPolicy


def test_jump_equals_stream():
    rng = RngPolicy(1234)
    block = rng.uniforms(10, 7, count=50)
    for k in range(50):
        assert np.array_equal(rng.uniforms(10 + k, 7)[0], block[k])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(0, 10**9), st.integers(1, 40), st.integers(0, 39))
def test_single_draw_is_pure(seed, step, width, slot):
    slot = slot % width
    a = RngPolicy(seed).uniform(step, slot, width)
    b = RngPolicy(seed).uniforms(step, width)[0, slot]
    assert a == b
    assert 0.0 < a < 1.0


def test_open_interval_and_moments():
    u = RngPolicy(7).uniforms(0, 1000, count=200)
    assert u.min() > 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1 / 12) < 0.002


def test_streams_and_seeds_differ():
    base = RngPolicy(5).uniforms(0, 16)
    assert not np.array_equal(base, RngPolicy(6).uniforms(0, 16))
    assert not np.array_equal(base, RngPolicy(5, stream=1).uniforms(0, 16))
    assert RngPolicy(5).substream(3) == RngPolicy(5, 3)


def test_widths_share_no_state_between_steps():
    rng = RngPolicy(9)
    # step t only owns its own counter block, so changing t changes every slot
    a, b = rng.uniforms(0, 5), rng.uniforms(1, 5)
    assert not np.any(a == b)


def test_bad_arguments():
    with pytest.raises(ValueError):
        RngPolicy(0).uniforms(-1, 3)
    with pytest.raises(ValueError):
        RngPolicy(0).uniforms(0, 0)
    with pytest.raises(ValueError):
        RngPolicy(0).uniform(0, 3, 3)
