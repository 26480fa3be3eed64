"""Rademacher/Steinhaus chaos moments and the inequality checks built on them.

Integrals of Rademacher chaoses over [0,1]^k are uniform averages over sign
patterns, so every real-field quantity here is computed exactly by
enumeration (budgets permitting).  Steinhaus quantities have no finite
extreme-point set and are estimated by Monte Carlo with reported standard
errors; checks on those are 3-sigma soft checks, never hard asserts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Tuple

import numpy as np

from .errors import BudgetError, DomainError, ViolationError
from .norms import alternating_max, crude_upper, exact_linf_enum
from .special import ScalarField, khinchin_A
from .tensor import (
    DEFAULT_BLOCK,
    PATTERN_BUDGET,
    FormTensor,
    contract_trailing_signs,
    iter_sign_blocks,
)

__all__ = [
    "ChaosMoment",
    "KhinchinReport",
    "ContractionReport",
    "MultipleKhinchinReport",
    "ChainLink",
    "ChainReport",
    "rademacher_moment",
    "steinhaus_moment",
    "check_khinchin",
    "check_contraction",
    "check_multiple_khinchin",
    "verify_proof_chain",
]

EXACT_SLACK = 1e-12       # absolute slack on exactly-enumerated inequalities
EQUALITY_RTOL = 1e-10     # relative tolerance on chain equality links
MC_SLACK = 1e-9           # absolute widening added to 3-sigma soft checks
MAX_EXACT_N = 24          # exact single-vector enumeration budget, in bits


@dataclass(frozen=True)
class ChaosMoment:
    """L_q norm of a chaos: exact enumeration or seeded Monte Carlo."""

    order: int                    # number of independent sign/phase vectors
    q: float
    value: float
    mode: str                     # "exact" | "mc"
    samples: Optional[int] = None
    seed: Optional[int] = None
    jobs: int = 1
    stderr: Optional[float] = None


def rademacher_moment(
    a,
    q: float,
    mode: str = "exact",
    samples: int = 100_000,
    seed=0,
    jobs: int = 1,
) -> ChaosMoment:
    """(average of |sum_j eps_j a_j|^q over sign vectors)^(1/q).

    Exact mode enumerates all 2^n patterns (n <= 24).  Monte Carlo splits
    `samples` across `jobs` derived streams and merges them in stream order,
    so the value is deterministic for a fixed (seed, jobs) pair.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise DomainError("coefficient vector must be one-dimensional and nonempty")
    if q < 1.0:
        raise DomainError(f"q must be >= 1, got {q}")
    n = a.size
    if mode == "exact":
        if n > MAX_EXACT_N:
            raise BudgetError(f"exact enumeration supports n <= {MAX_EXACT_N}, got {n}")
        total = 0.0
        count = 0
        for signs in iter_sign_blocks(n):
            vals = np.abs(signs @ a) ** q
            total += float(vals.sum())
            count += vals.size
        return ChaosMoment(order=1, q=q, value=(total / count) ** (1.0 / q), mode="exact")
    if mode != "mc":
        raise DomainError(f"mode must be 'exact' or 'mc', got {mode!r}")
    mean, stderr = _mc_mean(
        lambda rng, k: np.abs((rng.integers(0, 2, size=(k, n)) * 2.0 - 1.0) @ a) ** q,
        samples,
        seed,
        jobs,
    )
    value, value_err = _power_mean(mean, stderr, q)
    return ChaosMoment(
        order=1, q=q, value=value, mode="mc",
        samples=samples, seed=seed, jobs=jobs, stderr=value_err,
    )


def steinhaus_moment(a, q: float, samples: int = 100_000, seed=0, jobs: int = 1) -> ChaosMoment:
    """Monte-Carlo L_q norm of sum_j z_j a_j with independent unimodular z_j."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 1 or a.size == 0:
        raise DomainError("coefficient vector must be one-dimensional and nonempty")
    if q < 1.0:
        raise DomainError(f"q must be >= 1, got {q}")
    n = a.size
    mean, stderr = _mc_mean(
        lambda rng, k: np.abs(np.exp(2j * math.pi * rng.random((k, n))) @ a) ** q,
        samples,
        seed,
        jobs,
    )
    value, value_err = _power_mean(mean, stderr, q)
    return ChaosMoment(
        order=1, q=q, value=value, mode="mc",
        samples=samples, seed=seed, jobs=jobs, stderr=value_err,
    )


def _mc_mean(draw, samples: int, seed, jobs: int) -> Tuple[float, float]:
    """Mean and standard error of a per-sample statistic over derived streams.

    Streams get fixed sample allocations and are merged in stream order, so
    the result depends only on (seed, jobs), not on scheduling.
    """
    if samples < 2:
        raise DomainError("need at least 2 samples")
    if jobs < 1:
        raise DomainError("jobs must be >= 1")
    per = [samples // jobs] * jobs
    for i in range(samples % jobs):
        per[i] += 1
    total = 0.0
    total_sq = 0.0
    for child, k in zip(np.random.SeedSequence(seed).spawn(jobs), per):
        if k == 0:
            continue
        vals = draw(np.random.default_rng(child), k)
        total += float(vals.sum())
        total_sq += float((vals**2).sum())
    mean = total / samples
    var = max(total_sq / samples - mean**2, 0.0)
    return mean, math.sqrt(var / samples)


def _power_mean(mean: float, stderr: float, q: float) -> Tuple[float, float]:
    # delta method for mean^(1/q)
    if mean <= 0.0:
        return 0.0, stderr
    value = mean ** (1.0 / q)
    return value, stderr * value / (q * mean)


@dataclass(frozen=True)
class KhinchinReport:
    """One Khinchin check: lhs = A_q * l2(a), mid = chaos L_q norm."""

    q: float
    field: ScalarField
    lhs: float
    mid: float
    ratio: float        # mid / lhs, >= 1 when the inequality holds
    mode: str
    passed: bool
    stderr: Optional[float] = None

    def to_jsonable(self) -> dict:
        return {
            "q": self.q,
            "field": self.field.value,
            "lhs": self.lhs,
            "mid": self.mid,
            "ratio": self.ratio,
            "mode": self.mode,
            "passed": self.passed,
            "stderr": self.stderr,
        }


def check_khinchin(
    a,
    q: float,
    field: ScalarField = ScalarField.REAL,
    samples: int = 100_000,
    seed=0,
    jobs: int = 1,
) -> KhinchinReport:
    """Check A_q * (sum |a_j|^2)^(1/2) <= chaos L_q norm.

    Real field: exact Rademacher enumeration, violation beyond 1e-12 slack
    raises ViolationError (the constant is optimal, so a violation is a bug).
    Complex field: Steinhaus Monte Carlo, 3-sigma soft check.
    """
    A = khinchin_A(q, field).value
    if field is ScalarField.REAL:
        arr = np.asarray(a, dtype=np.float64)
        moment = rademacher_moment(arr, q, mode="exact")
    else:
        arr = np.asarray(a, dtype=np.complex128)
        moment = steinhaus_moment(arr, q, samples=samples, seed=seed, jobs=jobs)
    lhs = A * float(np.sqrt((np.abs(arr) ** 2).sum()))
    mid = moment.value
    slack = EXACT_SLACK if moment.mode == "exact" else 3.0 * (moment.stderr or 0.0) + MC_SLACK
    passed = mid >= lhs - slack
    if not passed:
        raise ViolationError(
            f"Khinchin check failed: A_q*l2 = {lhs!r} > moment = {mid!r} (q={q}, {field.value})"
        )
    ratio = mid / lhs if lhs > 0.0 else 1.0
    return KhinchinReport(
        q=q, field=field, lhs=lhs, mid=mid, ratio=ratio,
        mode=moment.mode, passed=passed, stderr=moment.stderr,
    )


@dataclass(frozen=True)
class ContractionReport:
    """Lemma check: every single chaos coefficient is dominated by the L_t norm."""

    m: int
    N: int
    t: float
    max_coeff: float
    moment: float
    ratio: float       # moment / max_coeff
    passed: bool

    def to_jsonable(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "t": self.t,
            "max_coeff": self.max_coeff,
            "moment": self.moment,
            "ratio": self.ratio,
            "passed": self.passed,
        }


def check_contraction(a, t: float, pattern_budget: int = PATTERN_BUDGET) -> ContractionReport:
    """Check max_J |a_J| <= L_t norm of the full m-fold Rademacher chaos.

    Exact enumeration over all 2^(N*m) sign patterns; real coefficients.
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim < 1:
        raise DomainError("coefficient tensor must have at least one axis")
    if t < 1.0:
        raise DomainError(f"t must be >= 1, got {t}")
    sizes = set(arr.shape)
    if len(sizes) != 1:
        raise DomainError(f"coefficient tensor must be cubical, got shape {arr.shape}")
    m = arr.ndim
    N = arr.shape[0]
    nbits = N * m
    total = 0.0
    count = 0
    for signs_flat in iter_sign_blocks(nbits, pattern_budget=pattern_budget):
        K = signs_flat.shape[0]
        signs = signs_flat.reshape(K, m, N)
        chaos = contract_trailing_signs(arr, signs)  # (K,)
        total += float((np.abs(chaos) ** t).sum())
        count += K
    moment = (total / count) ** (1.0 / t)
    max_coeff = float(np.abs(arr).max())
    passed = max_coeff <= moment + EXACT_SLACK
    if not passed:
        raise ViolationError(
            f"contraction check failed: max coefficient {max_coeff!r} > L_{t} norm {moment!r}"
        )
    ratio = moment / max_coeff if max_coeff > 0.0 else 1.0
    return ContractionReport(
        m=m, N=N, t=t, max_coeff=max_coeff, moment=moment, ratio=ratio, passed=passed,
    )


@dataclass(frozen=True)
class MultipleKhinchinReport:
    """Per-slice check of the iterated Khinchin bound on a form tensor."""

    lambda0: float
    constant: float                     # A_{lambda0}^{-(m-1)}
    rows: Tuple[dict, ...]              # per-j1: lhs, rhs, slack, passed
    passed: bool

    def to_jsonable(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "constant": self.constant,
            "rows": list(self.rows),
            "passed": self.passed,
        }


def _slice_chaos_stats(
    coeffs: np.ndarray,
    lambda0: float,
    pattern_budget: int,
    block: int,
) -> Tuple[np.ndarray, float, float]:
    """Exact per-slice chaos statistics for a real tensor with axis 0 free.

    Returns (mean of |V|^lambda0 per first index, mean over patterns of
    sum_j |V_j|^lambda0, max over patterns of the same sum), where
    V[k, j] = chaos of slice j under sign pattern k on the trailing axes.
    """
    m = coeffs.ndim
    n = coeffs.shape[0]
    nbits = n * (m - 1)
    col_total = np.zeros(n)
    sum_total = 0.0
    sup_value = -math.inf
    count = 0
    for signs_flat in iter_sign_blocks(nbits, block=block, pattern_budget=pattern_budget):
        K = signs_flat.shape[0]
        signs = signs_flat.reshape(K, m - 1, n)
        V = np.abs(contract_trailing_signs(coeffs, signs)) ** lambda0  # (K, n)
        col_total += V.sum(axis=0)
        row_sums = V.sum(axis=1)
        sum_total += float(row_sums.sum())
        sup_value = max(sup_value, float(row_sums.max()))
        count += K
    return col_total / count, sum_total / count, sup_value


def check_multiple_khinchin(
    T: FormTensor,
    lambda0: float,
    j1: Optional[int] = None,
    pattern_budget: int = PATTERN_BUDGET,
    block: int = DEFAULT_BLOCK,
) -> MultipleKhinchinReport:
    """Check (sum_{other indices} |T|^2)^(1/2) <= A^{-(m-1)} R per first-index slice.

    R is the exact L_{lambda0} norm of the (m-1)-fold Rademacher chaos with
    the slice's coefficients.  j1 restricts the check to one slice (1-based);
    by default every slice is checked.  Real field only.
    """
    if T.field is not ScalarField.REAL:
        raise DomainError("exact multiple-Khinchin check supports the real field only")
    if T.m < 2:
        raise DomainError("need an m-linear form with m >= 2")
    if not (1.0 <= lambda0 <= 2.0):
        raise DomainError(f"lambda0 must lie in [1, 2], got {lambda0}")
    A = khinchin_A(lambda0, ScalarField.REAL).value
    constant = A ** (-(T.m - 1))
    col_means, _, _ = _slice_chaos_stats(T.coeffs, lambda0, pattern_budget, block)
    R = col_means ** (1.0 / lambda0)
    flat = T.coeffs.reshape(T.n, -1)
    l2 = np.sqrt((flat**2).sum(axis=1))
    indices = range(1, T.n + 1) if j1 is None else [j1]
    rows: List[dict] = []
    for j in indices:
        if not (1 <= j <= T.n):
            raise DomainError(f"j1 must lie in [1, {T.n}], got {j}")
        lhs = float(l2[j - 1])
        rhs = float(constant * R[j - 1])
        slack = rhs - lhs
        passed = slack >= -EXACT_SLACK
        rows.append({"j1": j, "lhs": lhs, "rhs": rhs, "slack": slack, "passed": passed})
        if not passed:
            raise ViolationError(
                f"multiple-Khinchin check failed at slice j1={j}: lhs {lhs!r} > rhs {rhs!r}"
            )
    return MultipleKhinchinReport(
        lambda0=lambda0, constant=constant, rows=tuple(rows), passed=True,
    )


@dataclass(frozen=True)
class ChainLink:
    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    kind: str = "inequality"  # or "equality"

    def to_jsonable(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ChainReport:
    """Step-by-step record of the mixed-sum proof chain for one index."""

    lambda0: float
    s: float
    index: int
    field: ScalarField
    mode: str                    # "exact" | "mc"
    links: Tuple[ChainLink, ...]
    constant_factor: float       # A_{lambda0}^{-2(m-1)/s}
    norm_lower: float
    norm_upper: float
    sup_value: float             # enumerated/sampled sup quantity, diagnostic
    passed: bool
    first_failure: Optional[str] = None
    mc_stderr: Optional[float] = None

    def to_jsonable(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "s": self.s,
            "index": self.index,
            "field": self.field.value,
            "mode": self.mode,
            "links": [link.to_jsonable() for link in self.links],
            "constant_factor": self.constant_factor,
            "norm_lower": self.norm_lower,
            "norm_upper": self.norm_upper,
            "passed": self.passed,
            "first_failure": self.first_failure,
        }


def verify_proof_chain(
    S: FormTensor,
    lambda0: float,
    s: float,
    index: int = 1,
    pattern_budget: int = PATTERN_BUDGET,
    block: int = DEFAULT_BLOCK,
    mc_samples: int = 100_000,
    seed=0,
    raise_on_failure: bool = True,
) -> ChainReport:
    """Verify every step of the mixed-sum chain for a form on l_inf^n.

    Chain, for the chosen index (1-based) with theta = 2/s and A the optimal
    Khinchin constant at lambda0:

      1. holder_interpolation: the lambda0-mixed l_s sum is at most the
         interpolated l_2/max expression per slice;
      2. multiple_khinchin: per-slice l_2 and max are dominated by
         A^{-(m-1)} R_j and R_j, aggregating to A^{-2(m-1)/s} (sum R_j^l0)^(1/l0);
      3. fubini_substitution: the R-sum equals the integral of the summed
         chaos (association identity, checked to 1e-10 relative);
      4. sup_domination: that integral is at most ||S|| on l_inf.

    The final link `overall_bound` composes them.  Real field: everything by
    exact enumeration, ||S|| by exact sign enumeration, failures raise
    ViolationError naming the link (unless raise_on_failure=False).  Complex
    field: Steinhaus Monte Carlo with 3-sigma soft checks against the
    alternating-ascent/crude norm sandwich; nothing raises on noise.
    """
    if S.m < 2:
        raise DomainError("need an m-linear form with m >= 2")
    if not (1 <= index <= S.m):
        raise DomainError(f"index must lie in [1, {S.m}], got {index}")
    if s < 2.0:
        raise DomainError(f"the interpolation step needs s >= 2, got {s}")
    if not (1.0 <= lambda0 <= 2.0):
        raise DomainError(f"lambda0 must lie in [1, 2], got {lambda0}")

    coeffs = np.moveaxis(S.coeffs, index - 1, 0)
    m, n = S.m, S.n
    theta = 2.0 / s
    A = khinchin_A(lambda0, S.field).value
    factor = A ** (-2.0 * (m - 1) / s)

    flat = np.abs(coeffs.reshape(n, -1))
    lhs_chain = float(((flat**s).sum(axis=1) ** (lambda0 / s)).sum() ** (1.0 / lambda0))
    l2 = np.sqrt((flat**2).sum(axis=1))
    mx = flat.max(axis=1)
    holder_mid = float(
        (((l2**theta) * (mx ** (1.0 - theta))) ** lambda0).sum() ** (1.0 / lambda0)
    )

    stderr = None
    if S.field is ScalarField.REAL:
        mode = "exact"
        col_means, int_mean, sup_raw = _slice_chaos_stats(
            coeffs, lambda0, pattern_budget, block
        )
        est = exact_linf_enum(S, pattern_budget=pattern_budget, block=block)
        norm_lower = norm_upper = est.lower
        ineq_slack = EXACT_SLACK
    else:
        mode = "mc"
        col_means, int_mean, sup_raw, total_stderr = _slice_chaos_stats_mc(
            coeffs, lambda0, mc_samples, seed
        )
        est = alternating_max(S, math.inf, seed=np.random.SeedSequence([_seed_int(seed), 1]))
        norm_lower, norm_upper = est.lower, crude_upper(S)
        total = float(col_means.sum())
        stderr = (
            total_stderr * total ** (1.0 / lambda0 - 1.0) / lambda0 if total > 0.0 else 0.0
        )
        ineq_slack = 3.0 * stderr * factor + MC_SLACK

    r_sum = float(col_means.sum() ** (1.0 / lambda0))          # (sum_j R_j^l0)^(1/l0)
    integral = float(int_mean ** (1.0 / lambda0))
    sup_value = factor * float(sup_raw ** (1.0 / lambda0))

    q1 = holder_mid
    q2 = factor * r_sum
    q3 = factor * integral
    q4 = factor * (norm_upper if mode == "mc" else norm_lower)

    links = [
        _ineq_link("holder_interpolation", lhs_chain, q1, EXACT_SLACK),
        _ineq_link("multiple_khinchin", q1, q2, ineq_slack),
        _eq_link("fubini_substitution", q2, q3),
        _ineq_link("sup_domination", q3, q4, ineq_slack),
        _ineq_link("overall_bound", lhs_chain, q4, ineq_slack),
    ]
    first_failure = next((link.name for link in links if not link.passed), None)
    report = ChainReport(
        lambda0=lambda0,
        s=s,
        index=index,
        field=S.field,
        mode=mode,
        links=tuple(links),
        constant_factor=factor,
        norm_lower=norm_lower,
        norm_upper=norm_upper,
        sup_value=sup_value,
        passed=first_failure is None,
        first_failure=first_failure,
        mc_stderr=stderr,
    )
    if first_failure is not None and raise_on_failure and mode == "exact":
        link = next(l for l in links if l.name == first_failure)
        raise ViolationError(
            f"proof chain link {first_failure!r} failed: "
            f"lhs {link.lhs!r} vs rhs {link.rhs!r} (slack {link.slack:.3e})"
        )
    return report


def _ineq_link(name: str, lhs: float, rhs: float, slack_tol: float) -> ChainLink:
    slack = rhs - lhs
    return ChainLink(name=name, lhs=lhs, rhs=rhs, slack=slack, passed=slack >= -slack_tol)


def _eq_link(name: str, lhs: float, rhs: float) -> ChainLink:
    slack = rhs - lhs
    scale = max(abs(lhs), abs(rhs), 1e-30)
    return ChainLink(
        name=name, lhs=lhs, rhs=rhs, slack=slack,
        passed=abs(slack) <= EQUALITY_RTOL * scale, kind="equality",
    )


def _slice_chaos_stats_mc(
    coeffs: np.ndarray,
    lambda0: float,
    samples: int,
    seed,
) -> Tuple[np.ndarray, float, float, float]:
    """Steinhaus Monte-Carlo analogue of _slice_chaos_stats (complex field)."""
    m = coeffs.ndim
    n = coeffs.shape[0]
    rng = np.random.default_rng(np.random.SeedSequence([_seed_int(seed), 0]))
    col_total = np.zeros(n)
    sum_total = 0.0
    sum_sq = 0.0
    sup_value = -math.inf
    block = 8192
    remaining = samples
    while remaining > 0:
        K = min(block, remaining)
        phases = np.exp(2j * math.pi * rng.random((K, m - 1, n)))
        V = np.abs(contract_trailing_signs(coeffs, phases)) ** lambda0
        col_total += V.sum(axis=0)
        row_sums = V.sum(axis=1)
        sum_total += float(row_sums.sum())
        sum_sq += float((row_sums**2).sum())
        sup_value = max(sup_value, float(row_sums.max()))
        remaining -= K
    col_means = col_total / samples
    int_mean = sum_total / samples
    var = max(sum_sq / samples - int_mean**2, 0.0)
    return col_means, int_mean, sup_value, math.sqrt(var / samples)


def _seed_int(seed) -> int:
    if seed is None:
        return 0
    if isinstance(seed, (int, np.integer)):
        return int(seed) & 0xFFFFFFFF
    raise DomainError(f"seeds must be integers (or None), got {type(seed).__name__}")
