"""Operator-norm sandwiches: dual closed forms, ascent, exact enumeration."""

import itertools
import math

import numpy as np
import pytest

from hlcert import (
    BudgetError,
    DomainError,
    FormTensor,
    NormMethod,
    ScalarField,
    alternating_max,
    crude_upper,
    dual_norm_linear,
    evaluate,
    exact_linf_enum,
    generate,
)
from hlcert.norms import _ascend

REAL = ScalarField.REAL
COMPLEX = ScalarField.COMPLEX


def _tensor(coeffs, field=REAL):
    arr = np.asarray(coeffs)
    return FormTensor(m=arr.ndim, n=arr.shape[0], field=field, coeffs=arr)


def _brute_force_linf(T):
    # independent oracle: enumerate sign vectors in EVERY slot
    best = 0.0
    for signs in itertools.product([-1.0, 1.0], repeat=T.m * T.n):
        vecs = [np.array(signs[k * T.n : (k + 1) * T.n]) for k in range(T.m)]
        best = max(best, abs(evaluate(T, vecs)))
    return best


def test_dual_norm_self_dual_case():
    value, x = dual_norm_linear(np.array([1.0, -2.0]), 2.0)
    assert value == pytest.approx(math.sqrt(5.0), rel=1e-14)
    assert np.allclose(x, np.array([1.0, -2.0]) / math.sqrt(5.0), atol=1e-14)


def test_dual_norm_linf_case():
    value, x = dual_norm_linear(np.array([1.0, -2.0]), math.inf)
    assert value == 3.0
    assert np.array_equal(x, np.array([1.0, -1.0]))


def test_dual_norm_zero_vector():
    value, x = dual_norm_linear(np.zeros(3), 2.0)
    assert value == 0.0
    assert np.linalg.norm(x) == 1.0


def test_dual_norm_p1():
    value, x = dual_norm_linear(np.array([1.0, -3.0, 2.0]), 1.0)
    assert value == 3.0
    assert np.abs(x).sum() == 1.0
    assert float(np.array([1.0, -3.0, 2.0]) @ x) == pytest.approx(3.0)


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, 7.0, math.inf])
def test_dual_norm_maximizer_properties(p):
    rng = np.random.default_rng(31)
    for complex_case in (False, True):
        c = rng.standard_normal(5)
        if complex_case:
            c = c + 1j * rng.standard_normal(5)
        value, x = dual_norm_linear(c, p)
        pnorm = np.abs(x).max() if math.isinf(p) else (np.abs(x) ** p).sum() ** (1.0 / p)
        assert pnorm == pytest.approx(1.0, abs=1e-12)
        attained = c @ x
        assert abs(attained) == pytest.approx(value, rel=1e-12)
        # holder: no unit vector can beat the dual norm
        assert abs(attained) <= value + 1e-12


def test_alternating_sparse_unit_exact():
    for p in (1.5, 2.0, math.inf):
        T = generate("sparse_unit", 2, 3, REAL, 11)
        est = alternating_max(T, p, restarts=4, seed=0)
        assert est.lower == pytest.approx(1.0, abs=1e-12)
        assert est.upper == pytest.approx(1.0, abs=1e-12)


def test_alternating_identity_linf_matches_enum():
    T = _tensor(np.eye(2))
    oracle = exact_linf_enum(T)
    assert oracle.lower == 2.0
    est = alternating_max(T, math.inf, restarts=16, seed=1)
    assert est.lower == pytest.approx(2.0, abs=1e-10)


def test_alternating_rank_one_p2():
    # rank-one tensor: norm factors into dual norms of the two vectors
    T = _tensor(np.ones((2, 2)))
    est = alternating_max(T, 2.0, restarts=8, seed=2)
    assert est.lower == pytest.approx(2.0, rel=1e-10)
    assert est.upper == 4.0  # crude coefficient mass, loose here


def test_rank_one_closed_form_oracle():
    rng = np.random.default_rng(17)
    for p in (2.0, 3.0):
        pp = p / (p - 1.0)
        u = rng.standard_normal(3)
        v = rng.standard_normal(3)
        T = _tensor(np.outer(u, v))
        oracle = (np.abs(u) ** pp).sum() ** (1 / pp) * (np.abs(v) ** pp).sum() ** (1 / pp)
        est = alternating_max(T, p, restarts=8, seed=3)
        assert est.lower == pytest.approx(oracle, rel=1e-9)


def test_witness_validity():
    rng = np.random.default_rng(41)
    for p in (2.0, 3.0, math.inf):
        for _ in range(5):
            T = generate("gaussian", 3, 3, REAL, int(rng.integers(2**32)))
            est = alternating_max(T, p, restarts=4, seed=int(rng.integers(2**32)))
            assert len(est.witness) == 3
            for x in est.witness:
                pnorm = (
                    np.abs(x).max() if math.isinf(p) else (np.abs(x) ** p).sum() ** (1.0 / p)
                )
                assert pnorm == pytest.approx(1.0, abs=1e-12)
            assert abs(evaluate(T, list(est.witness))) == pytest.approx(
                est.lower, abs=1e-10 * max(1.0, est.lower)
            )


def test_witness_validity_exact_enum():
    T = generate("gaussian", 2, 3, REAL, 19)
    est = exact_linf_enum(T)
    assert abs(evaluate(T, list(est.witness))) == pytest.approx(est.lower, rel=1e-12)
    for x in est.witness:
        assert np.abs(x).max() == 1.0


def test_monotone_ascent_trace():
    rng = np.random.default_rng(53)
    for _ in range(10):
        T = generate("gaussian", 2, 4, REAL, int(rng.integers(2**32)))
        vectors = [
            x / np.linalg.norm(x) for x in rng.standard_normal((2, 4))
        ]
        _, _, trace, _ = _ascend(np.asarray(T.coeffs), vectors, 2.0, 50, 1e-12)
        for earlier, later in zip(trace, trace[1:]):
            assert later >= earlier - 1e-12


def test_exact_enum_matches_brute_force():
    rng = np.random.default_rng(61)
    for _ in range(25):
        n = int(rng.integers(2, 4))
        T = generate("gaussian", 2, n, REAL, int(rng.integers(2**32)))
        est = exact_linf_enum(T)
        assert est.lower == est.upper
        assert est.lower == pytest.approx(_brute_force_linf(T), rel=1e-12)


def test_exact_enum_trilinear_brute_force():
    T = generate("signs", 3, 2, REAL, 71)
    est = exact_linf_enum(T)
    assert est.lower == pytest.approx(_brute_force_linf(T), rel=1e-12)


def test_exact_enum_sign_matrix():
    est = exact_linf_enum(_tensor(np.array([[1.0, 1.0], [1.0, -1.0]])))
    assert est.lower == 2.0
    assert est.method is NormMethod.EXACT_SIGN_ENUM


def test_exact_enum_guards():
    with pytest.raises(DomainError):
        exact_linf_enum(generate("steinhaus", 2, 2, COMPLEX, 1))
    with pytest.raises(BudgetError):
        exact_linf_enum(generate("gaussian", 2, 8, REAL, 1), pattern_budget=4)


def test_crude_upper_examples():
    assert crude_upper(generate("sparse_unit", 2, 3, REAL, 2)) == 1.0
    assert crude_upper(_tensor(np.eye(2))) == 2.0
    assert crude_upper(_tensor(np.ones((2, 2)))) == 4.0


def test_alternating_never_exceeds_exact():
    rng = np.random.default_rng(77)
    agree = 0
    for _ in range(20):
        n = int(rng.integers(2, 4))
        T = generate("gaussian", 2, n, REAL, int(rng.integers(2**32)))
        exact = exact_linf_enum(T).lower
        est = alternating_max(T, math.inf, restarts=50, seed=int(rng.integers(2**32)))
        assert est.lower <= exact + 1e-12
        if abs(est.lower - exact) <= 1e-9 * max(1.0, exact):
            agree += 1
    assert agree >= 19


def test_norms_nondecreasing_in_p():
    # unit balls grow with p, so certified lower bounds at smaller p cannot
    # beat the exact norm at p = inf
    rng = np.random.default_rng(83)
    for _ in range(10):
        T = generate("gaussian", 2, 3, REAL, int(rng.integers(2**32)))
        exact_inf = exact_linf_enum(T).upper
        for p in (1.5, 2.0, 4.0):
            est = alternating_max(T, p, restarts=8, seed=1)
            assert est.lower <= exact_inf + 1e-9


def test_m1_dual_closed_form():
    T = FormTensor(m=1, n=4, field=REAL, coeffs=np.array([3.0, -4.0, 0.0, 0.0]))
    est = alternating_max(T, 2.0, restarts=1, seed=0)
    assert est.method is NormMethod.DUAL_CLOSED_FORM
    assert est.lower == pytest.approx(5.0, rel=1e-14)
    enum = exact_linf_enum(T)
    assert enum.lower == pytest.approx(7.0, rel=1e-14)  # l1 mass on l_inf


def test_alternating_domain_errors():
    T = generate("gaussian", 2, 2, REAL, 1)
    with pytest.raises(DomainError):
        alternating_max(T, 1.0)
    with pytest.raises(DomainError):
        alternating_max(T, 2.0, restarts=0)


def test_estimates_jsonable():
    est = exact_linf_enum(_tensor(np.eye(2)))
    payload = est.to_jsonable()
    assert set(payload) == {"lower", "upper", "method", "restarts", "converged"}
