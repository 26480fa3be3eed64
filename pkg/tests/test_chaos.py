"""Chaos moments, Khinchin/contraction checks, and the proof-chain verifier."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlcert import (
    BudgetError,
    DomainError,
    FormTensor,
    ScalarField,
    check_contraction,
    check_khinchin,
    check_multiple_khinchin,
    exponents,
    generate,
    khinchin_A,
    rademacher_moment,
    solve_q0,
    steinhaus_moment,
    verify_proof_chain,
)

REAL = ScalarField.REAL
COMPLEX = ScalarField.COMPLEX


def _tensor(coeffs, field=REAL):
    arr = np.asarray(coeffs)
    return FormTensor(m=arr.ndim, n=arr.shape[0], field=field, coeffs=arr)


def _moment_by_loops(a, q):
    # independent oracle: explicit enumeration of all sign patterns
    n = len(a)
    total = 0.0
    for signs in itertools.product([-1.0, 1.0], repeat=n):
        total += abs(sum(s * c for s, c in zip(signs, a))) ** q
    return (total / 2**n) ** (1.0 / q)


def test_rademacher_moment_examples():
    assert rademacher_moment([1.0, 1.0], 2.0).value == pytest.approx(
        math.sqrt(2.0), rel=1e-14
    )
    # 4-pattern oracle: (|2| + 0 + 0 + |-2|) / 4 = 1
    assert rademacher_moment([1.0, 1.0], 1.0).value == pytest.approx(1.0, rel=1e-14)
    assert rademacher_moment([-2.5], 1.7).value == pytest.approx(2.5, rel=1e-14)


def test_rademacher_moment_matches_loop_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(1, 7))
        a = rng.standard_normal(n)
        q = float(rng.uniform(1.0, 3.0))
        assert rademacher_moment(a, q).value == pytest.approx(
            _moment_by_loops(a, q), rel=1e-12
        )


def test_rademacher_moment_budget_and_domain():
    with pytest.raises(BudgetError):
        rademacher_moment(np.ones(25), 2.0)
    with pytest.raises(DomainError):
        rademacher_moment([1.0], 0.5)
    with pytest.raises(DomainError):
        rademacher_moment([[1.0]], 2.0)


def test_moment_monotone_in_q():
    rng = np.random.default_rng(9)
    for _ in range(5):
        a = rng.standard_normal(6)
        values = [rademacher_moment(a, q).value for q in (1.0, 1.3, 1.7, 2.0, 2.5)]
        for lo, hi in zip(values, values[1:]):
            assert hi >= lo - 1e-12


def test_monte_carlo_agrees_with_exact():
    # 100-case grid at 1e6 samples: at least 95 within 3 standard errors
    rng = np.random.default_rng(21)
    within = 0
    cases = 100
    for i in range(cases):
        a = rng.standard_normal(int(rng.integers(2, 9)))
        q = float(rng.choice([1.0, 1.3, 1.7, 2.0]))
        exact = rademacher_moment(a, q).value
        mc = rademacher_moment(a, q, mode="mc", samples=1_000_000, seed=i)
        assert mc.stderr is not None
        if abs(mc.value - exact) <= 3.0 * mc.stderr + 1e-9:
            within += 1
    assert within >= 95


def test_monte_carlo_deterministic_per_seed_and_jobs():
    a = [1.0, -0.5, 2.0]
    m1 = rademacher_moment(a, 1.5, mode="mc", samples=5000, seed=3, jobs=2)
    m2 = rademacher_moment(a, 1.5, mode="mc", samples=5000, seed=3, jobs=2)
    m3 = rademacher_moment(a, 1.5, mode="mc", samples=5000, seed=4, jobs=2)
    assert m1.value == m2.value
    assert m1.value != m3.value


def test_steinhaus_moment_q2_orthogonality():
    # E|sum a_j z_j|^2 = sum |a_j|^2 exactly; MC must land within noise
    a = np.array([1.0 + 1.0j, -2.0, 0.5j])
    mom = steinhaus_moment(a, 2.0, samples=200_000, seed=7)
    target = float(np.sqrt((np.abs(a) ** 2).sum()))
    assert abs(mom.value - target) <= 4.0 * (mom.stderr or 0.0) + 1e-6


def test_check_khinchin_equality_cases():
    # q = 2 is equality for every vector
    rng = np.random.default_rng(33)
    for _ in range(5):
        a = rng.standard_normal(5)
        rep = check_khinchin(a, 2.0, REAL)
        assert rep.ratio == pytest.approx(1.0, abs=1e-12)
    # the known extremal pair at q = 1 (and any q <= q0)
    rep = check_khinchin([1.0, 1.0], 1.0, REAL)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)
    rep = check_khinchin([1.0, 1.0], 1.5, REAL)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)
    # single-term vectors: the moment equals the l2 mass exactly, so the
    # attainment ratio is 1/A_q (1 only at q = 2)
    rep = check_khinchin([3.0], 1.3, REAL)
    assert rep.mid == pytest.approx(rep.lhs / khinchin_A(1.3, REAL).value, abs=1e-12)
    assert rep.mid == pytest.approx(3.0, abs=1e-12)
    rep = check_khinchin([3.0], 2.0, REAL)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_check_khinchin_random_corpus_no_violation():
    rng = np.random.default_rng(45)
    q0 = solve_q0()
    for _ in range(30):
        a = rng.standard_normal(int(rng.integers(1, 9)))
        for q in (1.0, 1.3, q0, 1.9, 2.0):
            rep = check_khinchin(a, q, REAL)
            assert rep.passed
            assert rep.ratio >= 1.0 - 1e-12


def test_check_khinchin_complex_soft():
    rng = np.random.default_rng(57)
    a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    rep = check_khinchin(a, 1.5, COMPLEX, samples=50_000, seed=2)
    assert rep.mode == "mc"
    assert rep.passed


def test_contraction_single_coefficient():
    arr = np.zeros((2, 2))
    arr[0, 1] = -3.0
    rep = check_contraction(arr, 1.7)
    assert rep.max_coeff == 3.0
    assert rep.moment == pytest.approx(3.0, rel=1e-12)


def test_contraction_m1_pair():
    rep = check_contraction(np.array([1.0, 1.0]), 2.0)
    assert rep.max_coeff == 1.0
    assert rep.moment == pytest.approx(math.sqrt(2.0), rel=1e-12)


def test_contraction_sign_matrix_16_pattern_oracle():
    arr = np.array([[1.0, 1.0], [1.0, -1.0]])
    # oracle: all 16 patterns by explicit loops
    total = 0.0
    for e1, e2, d1, d2 in itertools.product([-1.0, 1.0], repeat=4):
        val = (
            e1 * d1 * arr[0, 0] + e1 * d2 * arr[0, 1]
            + e2 * d1 * arr[1, 0] + e2 * d2 * arr[1, 1]
        )
        total += val**2
    oracle = math.sqrt(total / 16.0)
    assert oracle == pytest.approx(2.0, rel=1e-14)
    rep = check_contraction(arr, 2.0)
    assert rep.moment == pytest.approx(oracle, rel=1e-12)
    assert rep.max_coeff == 1.0


def test_contraction_random_corpus():
    rng = np.random.default_rng(60)
    for m, N in [(1, 8), (2, 4), (3, 3)]:
        for _ in range(5):
            arr = rng.standard_normal((N,) * m)
            for t in (1.0, 2.0, 3.0):
                assert check_contraction(arr, t).passed


def test_contraction_guards():
    with pytest.raises(DomainError):
        check_contraction(np.ones((2, 3)), 2.0)  # not cubical
    with pytest.raises(DomainError):
        check_contraction(np.ones((2, 2)), 0.5)
    with pytest.raises(BudgetError):
        check_contraction(np.ones((5, 5, 5, 5, 5, 5)), 2.0)


def test_multiple_khinchin_m2_reduces_to_khinchin():
    rng = np.random.default_rng(71)
    T = generate("gaussian", 2, 4, REAL, int(rng.integers(2**32)))
    lam = 1.3
    A = khinchin_A(lam, REAL).value
    rep = check_multiple_khinchin(T, lam)
    for row in rep.rows:
        a = np.asarray(T.coeffs)[row["j1"] - 1]
        lhs = float(np.sqrt((a**2).sum()))
        rhs = rademacher_moment(a, lam).value / A
        assert row["lhs"] == pytest.approx(lhs, rel=1e-12)
        assert row["rhs"] == pytest.approx(rhs, rel=1e-12)


def test_multiple_khinchin_m3_brute_force_oracle():
    T = generate("signs", 3, 2, REAL, 5)
    lam = 1.0
    A = khinchin_A(lam, REAL).value
    rep = check_multiple_khinchin(T, lam)
    arr = np.asarray(T.coeffs)
    for row in rep.rows:
        j1 = row["j1"] - 1
        total = 0.0
        for e1, e2, d1, d2 in itertools.product([-1.0, 1.0], repeat=4):
            val = (
                e1 * d1 * arr[j1, 0, 0] + e1 * d2 * arr[j1, 0, 1]
                + e2 * d1 * arr[j1, 1, 0] + e2 * d2 * arr[j1, 1, 1]
            )
            total += abs(val) ** lam
        R = (total / 16.0) ** (1.0 / lam)
        assert row["rhs"] == pytest.approx(R / A**2, rel=1e-12)
        assert row["lhs"] == pytest.approx(
            float(np.sqrt((arr[j1] ** 2).sum())), rel=1e-12
        )
        assert row["passed"]


def test_multiple_khinchin_sparse_unit_trivial():
    T = generate("sparse_unit", 3, 2, REAL, 9)
    rep = check_multiple_khinchin(T, 1.5)
    assert rep.passed


def test_multiple_khinchin_single_slice():
    T = generate("gaussian", 2, 3, REAL, 13)
    rep = check_multiple_khinchin(T, 1.0, j1=2)
    assert len(rep.rows) == 1 and rep.rows[0]["j1"] == 2


def test_chain_sparse_unit_all_links():
    S = generate("sparse_unit", 2, 2, REAL, 3)
    rep = verify_proof_chain(S, 2.0, 2.0)
    assert rep.passed
    # at lambda0 = 2 the constant factor is 1 and every quantity collapses to |c|
    for link in rep.links:
        assert link.lhs == pytest.approx(1.0, abs=1e-12)
        assert link.rhs == pytest.approx(1.0, abs=1e-12)


def test_chain_sign_matrix_frozen_values():
    S = _tensor(np.array([[1.0, 1.0], [1.0, -1.0]]))
    rep = verify_proof_chain(S, 1.0, 2.0)
    assert rep.passed
    factor = khinchin_A(1.0, REAL).value ** (-1.0)  # A_1^(-2*(m-1)/s) = A_1^(-1)
    assert rep.constant_factor == pytest.approx(factor, rel=1e-14)
    assert rep.norm_lower == 2.0
    # every displayed quantity equals 2*sqrt(2) for this extremal matrix
    assert rep.links[0].lhs == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-13)
    assert rep.links[-1].rhs == pytest.approx(factor * 2.0, rel=1e-13)
    assert rep.links[-1].name == "overall_bound"


def test_chain_m3_signs_lambda15():
    S = generate("signs", 3, 2, REAL, 8)
    e = exponents(3, 5.0, 1.5)
    rep = verify_proof_chain(S, 1.5, e.s)
    assert rep.passed
    for link in rep.links:
        assert link.slack >= -1e-12 or link.kind == "equality"


def test_chain_index_consistency():
    S = generate("gaussian", 3, 2, REAL, 15)
    swapped = FormTensor(
        m=3, n=2, field=REAL, coeffs=np.swapaxes(np.asarray(S.coeffs), 0, 1)
    )
    rep_i = verify_proof_chain(S, 1.0, 2.0, index=2)
    rep_1 = verify_proof_chain(swapped, 1.0, 2.0, index=1)
    for a, b in zip(rep_i.links, rep_1.links):
        assert a.lhs == pytest.approx(b.lhs, rel=1e-10)
        assert a.rhs == pytest.approx(b.rhs, rel=1e-10)


def test_chain_link_names_and_order():
    S = generate("gaussian", 2, 3, REAL, 19)
    rep = verify_proof_chain(S, 1.2, 2.5)
    assert [link.name for link in rep.links] == [
        "holder_interpolation",
        "multiple_khinchin",
        "fubini_substitution",
        "sup_domination",
        "overall_bound",
    ]
    assert rep.first_failure is None


def test_chain_random_corpus():
    rng = np.random.default_rng(90)
    for m, n, lam in [(2, 3, 1.0), (2, 3, 1.5), (3, 2, 1.0), (3, 2, 1.5)]:
        for _ in range(5):
            S = generate("gaussian", m, n, REAL, int(rng.integers(2**32)))
            rep = verify_proof_chain(S, lam, 2.0)
            assert rep.passed


def test_chain_domain_guards():
    S = generate("gaussian", 2, 2, REAL, 1)
    with pytest.raises(DomainError):
        verify_proof_chain(S, 1.0, 1.5)  # s < 2
    with pytest.raises(DomainError):
        verify_proof_chain(S, 0.5, 2.0)
    with pytest.raises(DomainError):
        verify_proof_chain(S, 1.0, 2.0, index=3)


def test_chain_complex_monte_carlo_soft():
    S = generate("steinhaus", 2, 3, COMPLEX, 27)
    rep = verify_proof_chain(S, 1.5, 2.0, mc_samples=20_000, seed=4)
    assert rep.mode == "mc"
    assert rep.passed
    assert rep.mc_stderr is not None
    assert rep.norm_upper >= rep.norm_lower


@given(
    s=st.floats(min_value=2.0, max_value=8.0, allow_nan=False),
    data=st.lists(st.floats(min_value=0.0, max_value=10.0), min_size=1, max_size=8),
)
@settings(max_examples=150, deadline=None)
def test_interpolation_identity(s, data):
    # the Holder step in isolation: ||v||_s <= ||v||_2^theta * ||v||_inf^(1-theta)
    v = np.array(data)
    theta = 2.0 / s
    lhs = (v**s).sum() ** (1.0 / s)
    rhs = ((v**2).sum() ** 0.5) ** theta * (v.max() ** (1.0 - theta)) if v.max() > 0 else 0.0
    assert lhs <= rhs + 1e-12 * max(1.0, rhs)


def test_interpolation_exact_on_single_support():
    v = np.zeros(5)
    v[2] = 3.7
    s = 3.0
    theta = 2.0 / s
    lhs = (v**s).sum() ** (1.0 / s)
    rhs = ((v**2).sum() ** 0.5) ** theta * v.max() ** (1.0 - theta)
    assert lhs == pytest.approx(rhs, rel=1e-14)
