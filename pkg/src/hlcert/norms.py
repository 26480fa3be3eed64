"""Lower and upper bounds on the operator norm of an m-linear form over l_p balls.

Lower bounds come with an explicit witness tuple of unit vectors; upper
bounds are either the crude coefficient-mass bound (valid for every p >= 1)
or, for real forms on l_inf, the exact value from enumerating the extreme
points of the unit ball (sign vectors) in all slots but one, the last slot
being optimized in closed form.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Tuple

import numpy as np

from .errors import BudgetError, DomainError
from .special import ScalarField
from .tensor import (
    DEFAULT_BLOCK,
    PATTERN_BUDGET,
    FormTensor,
    contract_trailing_signs,
    iter_sign_blocks,
)

__all__ = [
    "NormMethod",
    "NormEstimate",
    "dual_norm_linear",
    "crude_upper",
    "alternating_max",
    "exact_linf_enum",
]


class NormMethod(enum.Enum):
    ALTERNATING_MAX = "alternating_max"
    EXACT_SIGN_ENUM = "exact_sign_enum"
    DUAL_CLOSED_FORM = "dual_closed_form"
    CRUDE_UPPER = "crude_upper"


@dataclass
class NormEstimate:
    """Certified sandwich lower <= ||T|| <= upper with the achieving witness.

    The witness is the tuple of unit-norm argument vectors whose evaluation
    attains `lower`; it is kept on the object but left out of the JSON view.
    """

    lower: float
    upper: float
    method: NormMethod
    restarts: int
    converged: bool
    witness: Tuple[np.ndarray, ...] = dataclass_field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"estimate lower {self.lower} > upper {self.upper}")

    def to_jsonable(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method.value,
            "restarts": self.restarts,
            "converged": self.converged,
        }


def _phase(c: np.ndarray) -> np.ndarray:
    # unimodular u with u*c = |c|; zeros map to +1
    if np.iscomplexobj(c):
        mags = np.abs(c)
        out = np.ones_like(c)
        nz = mags > 0.0
        out[nz] = np.conj(c[nz]) / mags[nz]
        return out
    out = np.ones_like(c)
    out[c < 0.0] = -1.0
    return out


def dual_norm_linear(c: np.ndarray, p: float) -> Tuple[float, np.ndarray]:
    """Exact norm of x -> <c, x> on l_p^n, with a unit maximizer.

    Returns (||c||_{p'}, x) where p' = p/(p-1) and <c, x> = ||c||_{p'} with
    ||x||_p = 1.  c = 0 returns value 0 and the first basis vector.
    """
    if p < 1.0:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    c = np.asarray(c)
    mags = np.abs(c)
    if not mags.any():
        x = np.zeros_like(c)
        x[0] = 1.0
        return 0.0, x
    if math.isinf(p):
        return float(mags.sum()), _phase(c)
    if p == 1.0:
        j = int(np.argmax(mags))
        x = np.zeros_like(c)
        x[j] = _phase(c[j : j + 1])[0]
        return float(mags[j]), x
    pp = p / (p - 1.0)
    scale = mags.max()
    value = float(scale * ((mags / scale) ** pp).sum() ** (1.0 / pp))
    u = (mags / scale) ** (pp - 1.0)
    x = _phase(c) * u
    x /= ((np.abs(x) ** p).sum()) ** (1.0 / p)
    return value, x


def crude_upper(T: FormTensor, p: float = 1.0) -> float:
    """Coefficient mass sum_J |coeff[J]|: an upper bound on ||T|| for every p >= 1."""
    if p < 1.0:
        raise DomainError(f"p must be >= 1 or inf, got {p}")
    return float(np.abs(T.coeffs).sum())


def _contract_all_but(coeffs: np.ndarray, vectors: List[np.ndarray], k: int) -> np.ndarray:
    # coefficient vector of the linear functional in slot k, other slots fixed
    acc = np.moveaxis(coeffs, k, 0)
    for i in range(len(vectors) - 1, -1, -1):
        if i == k:
            continue
        acc = np.tensordot(acc, vectors[i], axes=([acc.ndim - 1], [0]))
    return acc


def _random_unit(rng: np.random.Generator, n: int, p: float, complex_field: bool) -> np.ndarray:
    x = rng.standard_normal(n)
    if complex_field:
        x = x + 1j * rng.standard_normal(n)
    if math.isinf(p):
        return _phase(np.conj(x))
    norm = float((np.abs(x) ** p).sum() ** (1.0 / p))
    if norm == 0.0:
        out = np.zeros_like(x)
        out[0] = 1.0
        return out
    return x / norm


def _ascend(
    coeffs: np.ndarray,
    vectors: List[np.ndarray],
    p: float,
    max_iters: int,
    tol: float,
) -> Tuple[float, List[np.ndarray], List[float], bool]:
    """One block-coordinate ascent run; returns (value, vectors, sweep values, converged).

    Each slot update replaces that argument with the exact maximizer of the
    induced linear functional, so the value sequence is nondecreasing.
    """
    m = len(vectors)
    value = 0.0
    trace: List[float] = []
    converged = False
    for _ in range(max_iters):
        previous = value
        for k in range(m):
            c = _contract_all_but(coeffs, vectors, k)
            value, vectors[k] = dual_norm_linear(c, p)
        trace.append(value)
        if value - previous <= tol * max(value, 1e-300):
            converged = True
            break
    return value, vectors, trace, converged


def alternating_max(
    T: FormTensor,
    p: float,
    restarts: int = 32,
    max_iters: int = 500,
    tol: float = 1e-10,
    seed=None,
) -> NormEstimate:
    """Lower-bound ||T|| by block-coordinate ascent from random restarts.

    Fixing all arguments but one reduces the problem to an exact linear dual
    norm, so each sweep is monotone.  The upper bound is the crude
    coefficient mass.  Restarts draw independent unit starting tuples from
    seeds spawned off `seed`; the result is their max, so it is deterministic
    and order-independent.
    """
    if not (p > 1.0):
        raise DomainError(f"alternating_max needs p > 1 (or inf), got {p}")
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    upper = crude_upper(T, p)
    complex_field = T.field is ScalarField.COMPLEX
    if T.m == 1:
        value, x = dual_norm_linear(T.coeffs, p)
        return NormEstimate(
            lower=min(value, upper),
            upper=upper,
            method=NormMethod.DUAL_CLOSED_FORM,
            restarts=0,
            converged=True,
            witness=(x,),
        )
    best_value = -1.0
    best_witness: Tuple[np.ndarray, ...] = ()
    best_converged = False
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    for child in ss.spawn(restarts):
        rng = np.random.default_rng(child)
        vectors = [_random_unit(rng, T.n, p, complex_field) for _ in range(T.m)]
        value, vectors, _, converged = _ascend(T.coeffs, vectors, p, max_iters, tol)
        if value > best_value:
            best_value = value
            best_witness = tuple(vectors)
            best_converged = converged
    return NormEstimate(
        lower=min(best_value, upper),
        upper=upper,
        method=NormMethod.ALTERNATING_MAX,
        restarts=restarts,
        converged=best_converged,
        witness=best_witness,
    )


def exact_linf_enum(
    T: FormTensor,
    pattern_budget: int = PATTERN_BUDGET,
    block: int = DEFAULT_BLOCK,
) -> NormEstimate:
    """Exact ||T|| on (l_inf^n)^m for real scalars, by sign enumeration.

    The l_inf ball's extreme points are sign vectors; slots 2..m are
    enumerated (2^(n(m-1)) patterns) and the first slot is closed in l_1-dual
    form: value = max over patterns of sum_j1 |T(e_j1, eps2, ..., epsm)|.
    """
    if T.field is not ScalarField.REAL:
        raise DomainError("exact l_inf enumeration supports the real field only")
    r = T.m - 1
    nbits = T.n * r
    if (1 << nbits) > pattern_budget:
        raise BudgetError(
            f"2^{nbits} sign patterns exceed the budget {pattern_budget}"
        )
    best = -1.0
    best_index = 0
    start = 0
    for signs_flat in iter_sign_blocks(nbits, block=block, pattern_budget=pattern_budget):
        K = signs_flat.shape[0]
        signs = signs_flat.reshape(K, r, T.n)
        slices = contract_trailing_signs(T.coeffs, signs)  # (K, n)
        values = np.abs(slices).sum(axis=1)
        k = int(np.argmax(values))
        if values[k] > best:
            best = float(values[k])
            best_index = start + k
        start += K
    # rebuild the witness from the best pattern index
    shifts = np.arange(nbits, dtype=np.uint64)
    bits = (np.uint64(best_index) >> shifts) & np.uint64(1)
    signs = (bits.astype(np.float64) * 2.0 - 1.0).reshape(1, r, T.n)
    slice_best = contract_trailing_signs(T.coeffs, signs)[0]
    witness = (_phase(slice_best),) + tuple(signs[0])
    return NormEstimate(
        lower=best,
        upper=best,
        method=NormMethod.EXACT_SIGN_ENUM,
        restarts=0,
        converged=True,
        witness=witness,
    )
