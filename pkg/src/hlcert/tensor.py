"""Dense coefficient tensors of m-linear forms and their mixed norms.

A form T on the n-dimensional l_p space (m arguments) is stored as the dense
array coeff[j1, ..., jm] = T(e_j1, ..., e_jm), row-major with j1 slowest.
Desk scale: n <= 32, m <= 4 keeps n^m small, so everything is plain numpy.

This module also hosts the sign-pattern enumeration primitives shared by the
exact norm and chaos-moment code: a block iterator over {-1,+1}^nbits and a
batched contraction of trailing tensor slots against per-pattern sign
vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetError, DomainError
from .special import ScalarField

__all__ = [
    "FormTensor",
    "MixedNormSpec",
    "GENERATE_KINDS",
    "MAX_ENTRIES",
    "PATTERN_BUDGET",
    "evaluate",
    "mixed_norm",
    "generate",
    "tensor_to_json",
    "tensor_from_json",
    "iter_sign_blocks",
    "contract_trailing_signs",
]

MAX_ENTRIES = 10**7       # default memory budget for generation, in coefficients
PATTERN_BUDGET = 2**24    # default enumeration budget, in sign patterns
DEFAULT_BLOCK = 4096      # sign patterns contracted per numpy batch

GENERATE_KINDS = ("gaussian", "signs", "sparse_unit", "steinhaus")


@dataclass(frozen=True, eq=False)
class FormTensor:
    """Immutable dense coefficient tensor of an m-linear form."""

    m: int
    n: int
    field: ScalarField
    coeffs: np.ndarray  # shape (n,)*m, float64 or complex128, read-only

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise DomainError(f"need m >= 1 and n >= 1, got m={self.m}, n={self.n}")
        dtype = np.complex128 if self.field is ScalarField.COMPLEX else np.float64
        arr = np.asarray(self.coeffs, dtype=dtype)
        if arr.size != self.n**self.m:
            raise DomainError(
                f"coefficient count {arr.size} != n^m = {self.n**self.m}"
            )
        arr = arr.reshape((self.n,) * self.m).copy()
        if not np.all(np.isfinite(arr)):
            raise DomainError("coefficients must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def size(self) -> int:
        return self.coeffs.size


@dataclass(frozen=True)
class MixedNormSpec:
    """Outer l_alpha sum over index i of inner l_s sums over the other indices.

    fixed_index is 1-based, mirroring the j_i subscript convention.
    """

    fixed_index: int
    inner_exponent: float   # s
    outer_exponent: float   # alpha

    def __post_init__(self) -> None:
        if self.inner_exponent < 1.0 or self.outer_exponent < 1.0:
            raise DomainError("mixed-norm exponents must be finite and >= 1")
        if not (math.isfinite(self.inner_exponent) and math.isfinite(self.outer_exponent)):
            raise DomainError("mixed-norm exponents must be finite and >= 1")


def evaluate(T: FormTensor, vectors: Sequence[np.ndarray]):
    """Evaluate the form: sum_J coeff[J] * x1[j1] * ... * xm[jm].

    Multilinear (no conjugation in any slot).  Raises DomainError on a
    length mismatch.
    """
    if len(vectors) != T.m:
        raise DomainError(f"expected {T.m} vectors, got {len(vectors)}")
    acc = T.coeffs
    for x in vectors:
        x = np.asarray(x)
        if x.shape != (T.n,):
            raise DomainError(f"vector length {x.shape} != ({T.n},)")
        acc = np.tensordot(acc, x, axes=([0], [0]))
    value = acc[()]
    if np.iscomplexobj(acc):
        return complex(value)
    return float(value)


def mixed_norm(T: FormTensor, spec: MixedNormSpec) -> float:
    """(sum_{j_i} (sum_{other indices} |coeff|^s)^(alpha/s))^(1/alpha).

    Stride-based: the fixed axis is moved to the front, no transposed copy of
    the data is materialized beyond the (n, n^(m-1)) view.  Collapses to the
    flat l_s norm when alpha = s.
    """
    i = spec.fixed_index
    if not (1 <= i <= T.m):
        raise DomainError(f"fixed_index must lie in [1, {T.m}], got {i}")
    s = spec.inner_exponent
    alpha = spec.outer_exponent
    flat = np.moveaxis(T.coeffs, i - 1, 0).reshape(T.n, -1)
    inner = np.abs(flat) ** s
    per_row = inner.sum(axis=1) ** (1.0 / s)
    return float((per_row**alpha).sum() ** (1.0 / alpha))


def generate(
    kind: str,
    m: int,
    n: int,
    field: ScalarField,
    seed,
    max_entries: int = MAX_ENTRIES,
) -> FormTensor:
    """Draw a trial tensor, deterministically for a given seed.

    kinds: 'gaussian' (standard normals, independent re/im when complex),
    'signs' (+-1 entries), 'sparse_unit' (a single 1 at a random position),
    'steinhaus' (unimodular complex entries; complex field only).
    """
    if kind not in GENERATE_KINDS:
        raise DomainError(f"unknown generator kind {kind!r}; choose from {GENERATE_KINDS}")
    size = n**m
    if size > max_entries:
        raise BudgetError(f"n^m = {size} exceeds the entry budget {max_entries}")
    rng = np.random.default_rng(seed)
    shape = (n,) * m
    if kind == "gaussian":
        coeffs = rng.standard_normal(shape)
        if field is ScalarField.COMPLEX:
            coeffs = coeffs + 1j * rng.standard_normal(shape)
    elif kind == "signs":
        coeffs = rng.integers(0, 2, size=shape) * 2.0 - 1.0
        if field is ScalarField.COMPLEX:
            coeffs = coeffs.astype(np.complex128)
    elif kind == "sparse_unit":
        coeffs = np.zeros(shape)
        flat_index = int(rng.integers(0, size))
        coeffs.flat[flat_index] = 1.0
        if field is ScalarField.COMPLEX:
            coeffs = coeffs.astype(np.complex128)
    else:  # steinhaus
        if field is not ScalarField.COMPLEX:
            raise DomainError("steinhaus coefficients require the complex field")
        coeffs = np.exp(2j * math.pi * rng.random(shape))
    return FormTensor(m=m, n=n, field=field, coeffs=coeffs)


def tensor_to_json(T: FormTensor) -> str:
    """Serialize to the flat JSON schema {m, n, field, coeffs} (row-major).

    Complex entries are emitted as [re, im] pairs.
    """
    flat = T.coeffs.reshape(-1)
    if T.field is ScalarField.COMPLEX:
        coeffs = [[float(c.real), float(c.imag)] for c in flat]
    else:
        coeffs = [float(c) for c in flat]
    return json.dumps(
        {"m": T.m, "n": T.n, "field": T.field.value, "coeffs": coeffs},
        sort_keys=True,
    )


def tensor_from_json(text: str) -> FormTensor:
    """Inverse of tensor_to_json."""
    obj = json.loads(text)
    field = ScalarField.parse(obj["field"])
    raw = obj["coeffs"]
    if field is ScalarField.COMPLEX:
        flat = np.array([complex(re, im) for re, im in raw], dtype=np.complex128)
    else:
        flat = np.array(raw, dtype=np.float64)
    return FormTensor(m=int(obj["m"]), n=int(obj["n"]), field=field, coeffs=flat)


def iter_sign_blocks(
    nbits: int,
    block: int = DEFAULT_BLOCK,
    pattern_budget: int = PATTERN_BUDGET,
) -> Iterator[np.ndarray]:
    """Yield the 2^nbits sign patterns in blocks of float64 {-1,+1} rows.

    Bit b of the pattern index maps to column b.  nbits = 0 yields a single
    empty pattern, which makes the degenerate enumerations below uniform.
    """
    if nbits < 0:
        raise DomainError("nbits must be nonnegative")
    total = 1 << nbits
    if total > pattern_budget:
        raise BudgetError(f"2^{nbits} patterns exceed the budget {pattern_budget}")
    shifts = np.arange(nbits, dtype=np.uint64)
    for start in range(0, total, block):
        idx = np.arange(start, min(start + block, total), dtype=np.uint64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        yield bits.astype(np.float64) * 2.0 - 1.0


def contract_trailing_signs(coeffs: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Contract the last r axes of `coeffs` against r per-pattern sign vectors.

    signs has shape (K, r, n): signs[k, i] multiplies tensor axis
    (ndim - r + i).  Returns an array of shape (K,) + leading axes, e.g.
    (K, n) when one leading axis is kept free and (K,) when r = ndim.
    """
    K, r, n = signs.shape
    if r == 0:
        return np.broadcast_to(coeffs, (K,) + coeffs.shape)
    acc = np.einsum("...a,ka->k...", coeffs, signs[:, r - 1, :])
    for i in range(r - 2, -1, -1):
        acc = np.einsum("k...a,ka->k...", acc, signs[:, i, :])
    return acc
