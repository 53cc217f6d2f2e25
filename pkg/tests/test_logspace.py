import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from attractorlab.logspace import (LogModeVector, MIN_NORMAL_LOG, NEG_INF,
                                   UnderflowError, log_add_signed, logsumexp)

finite_vals = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False,
                        allow_infinity=False).filter(lambda v: v == 0.0 or abs(v) > 1e-12)


def test_log_add_signed_matches_dense():
    cases = [(1, 0.0, 1, 0.0), (1, 0.0, -1, 0.0), (1, 2.0, -1, 1.0), (-1, -3.0, -1, -4.0)]
    for s1, l1, s2, l2 in cases:
        s, l = log_add_signed(s1, l1, s2, l2)
        dense = s1 * math.exp(l1) + s2 * math.exp(l2)
        if dense == 0.0:
            assert s == 0 and l == NEG_INF
        else:
            assert s == (1 if dense > 0 else -1)
            assert math.isclose(l, math.log(abs(dense)), rel_tol=1e-12)


def test_log_add_signed_far_below_double_range():
    # magnitudes around e^-5000 never flush
    s, l = log_add_signed(1, -5000.0, 1, -5000.0)
    assert s == 1 and math.isclose(l, -5000.0 + math.log(2.0))
    s, l = log_add_signed(1, -5000.0, -1, -5000.0)
    assert s == 0 and l == NEG_INF


@given(st.lists(finite_vals, min_size=1, max_size=12))
def test_dense_round_trip(values):
    # log/exp round trip carries |log x| * ulp relative error
    vec = LogModeVector.from_dense(values)
    back = vec.to_dense(len(values))
    assert np.allclose(back, values, rtol=1e-13, atol=0.0)


def test_sign_zero_iff_absent():
    vec = LogModeVector({3: (1, -2.0), 5: (0, -1.0), 7: (1, NEG_INF)})
    assert vec.indices() == [3]
    assert vec.sign(5) == 0 and vec.logmag(5) == NEG_INF


def test_to_dense_underflow_raises_and_flags():
    vec = LogModeVector({1: (1, -800.0), 2: (1, -1.0)})
    with pytest.raises(UnderflowError):
        vec.to_dense(2)
    dense, flagged = vec.to_dense(2, strict=False)
    assert flagged == [1]
    assert dense[0] == 0.0 and dense[1] == pytest.approx(math.exp(-1.0))


def test_subtract_and_scale():
    a = LogModeVector.from_dense([1.0, 2.0, 0.0])
    b = LogModeVector.from_dense([1.0, 0.5, -3.0])
    d = a.subtract(b)
    assert np.allclose(d.to_dense(3), [0.0, 1.5, 3.0])
    assert np.allclose(a.scaled(math.log(2.0)).to_dense(3), [2.0, 4.0, 0.0])


def test_norm_log_plain_equals_euclidean():
    vals = [0.3, -1.2, 0.0, 4.5]
    vec = LogModeVector.from_dense(vals)
    assert vec.norm_log() == pytest.approx(math.log(np.linalg.norm(vals)), rel=1e-13)


def test_logsumexp_empty_and_neginf():
    assert logsumexp([]) == NEG_INF
    assert logsumexp([NEG_INF, NEG_INF]) == NEG_INF
    assert logsumexp([0.0, NEG_INF]) == pytest.approx(0.0)
