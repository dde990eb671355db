"""Declarative prime-function specs and additive evaluation.

A :class:`PrimeFunction` fixes the value at primes; an :class:`Extension`
fixes how values spread to prime powers (strongly additive, completely
additive, or either with a finite table of prime-power overrides).  The
number-of-distinct-prime-divisors function, its with-multiplicity variant,
the residue-class-restricted variant, and the half-weight variant are all
built from these two pieces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .config import MEMBER_BLOCK
from .sieve import Progression, primes_upto_monolithic

KINDS = (
    "constant",
    "one_over_loglog",
    "one_over_log",
    "sqrt_loglog",
    "one_minus_one_over_p",
    "one_minus_one_over_log",
    "indicator_one",
    "scaled",
    "tabulated",
)

# Default start primes.  Values at primes below the start are 0, which
# leaves every downstream sum identical to a sum truncated at the start.
_DEFAULT_START = {
    "constant": 2,
    "indicator_one": 2,
    "one_over_loglog": 11,
    "one_over_log": 3,
    "sqrt_loglog": 3,
    "one_minus_one_over_p": 2,
    "one_minus_one_over_log": 3,
    "tabulated": 2,
}

# Hard lower bounds per kind: log log p must exceed 0/1 style constraints.
_MIN_START = {
    "one_over_loglog": 11,
    "one_over_log": 3,
    "sqrt_loglog": 3,
    "one_minus_one_over_log": 3,
}


class TabulatedLookupError(KeyError):
    """A tabulated function was evaluated at a prime it has no entry for."""


@dataclass(frozen=True)
class PrimeFunction:
    """Value of an arithmetic function at primes.

    Parameters
    ----------
    kind : str
        One of :data:`KINDS`.
    c : float
        Constant value (kind="constant") or scale factor (kind="scaled").
    inner : PrimeFunction, optional
        Wrapped spec for kind="scaled".
    table : tuple of (prime, value), optional
        Entries for kind="tabulated".
    default : float, optional
        Fallback for tabulated lookups; without it a missing prime raises.
    p0 : int, optional
        Start prime; primes below contribute 0.  Kind default when None.
    residue_filter : Progression, optional
        When set, primes outside the residue class contribute 0 (used by
        the restricted prime-divisor counter).
    """

    kind: str
    c: float = 1.0
    inner: "PrimeFunction | None" = None
    table: tuple[tuple[int, float], ...] | None = None
    default: float | None = None
    p0: int | None = None
    residue_filter: Progression | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown function kind {self.kind!r}")
        if self.kind == "scaled" and self.inner is None:
            raise ValueError("scaled kind requires an inner spec")
        if self.kind == "tabulated" and not self.table:
            raise ValueError("tabulated kind requires a non-empty table")
        minimum = _MIN_START.get(self.kind)
        if minimum is not None and self.p0 is not None and self.p0 < minimum:
            raise ValueError(
                f"kind {self.kind} requires start prime >= {minimum}, got {self.p0}"
            )

    @property
    def start_prime(self) -> int:
        if self.p0 is not None:
            return self.p0
        if self.kind == "scaled":
            return self.inner.start_prime
        if self.kind == "tabulated":
            return min(p for p, _ in self.table)
        return _DEFAULT_START[self.kind]

    @property
    def nonnegative(self) -> bool:
        if self.kind == "constant":
            return self.c >= 0
        if self.kind == "scaled":
            return self.inner.nonnegative if self.c >= 0 else False
        if self.kind == "tabulated":
            vals = [v for _, v in self.table]
            if self.default is not None:
                vals.append(self.default)
            return all(v >= 0 for v in vals)
        return True  # remaining kinds are nonnegative past their start prime

    def value_bound(self) -> float | None:
        """Supremum of |f(p)| over p >= start prime, None if unbounded."""
        p0 = self.start_prime
        if self.kind == "constant":
            return abs(self.c)
        if self.kind == "indicator_one":
            return 1.0
        if self.kind == "one_over_loglog":
            return 1.0 / math.log(math.log(p0))
        if self.kind == "one_over_log":
            return 1.0 / math.log(p0)
        if self.kind == "sqrt_loglog":
            return None
        if self.kind == "one_minus_one_over_p":
            return 1.0
        if self.kind == "one_minus_one_over_log":
            return max(abs(1.0 - 1.0 / math.log(p0)), 1.0)
        if self.kind == "scaled":
            inner = self.inner.value_bound()
            return None if inner is None else abs(self.c) * inner
        vals = [abs(v) for _, v in self.table]
        if self.default is not None:
            vals.append(abs(self.default))
        return max(vals)

    @property
    def bounded_by_one(self) -> bool:
        bound = self.value_bound()
        return bound is not None and bound <= 1.0 + 1e-15

    def values_at(self, primes: np.ndarray | Sequence[int]) -> np.ndarray:
        """Vectorized f(p) for an array of primes (0 below start / off-class)."""
        p_int = np.asarray(primes, dtype=np.int64)
        p = p_int.astype(np.float64)
        # entries below the start prime are masked to 0 at the end; clip the
        # formula input so they never produce NaN on the way there
        pc = np.maximum(p, float(self.start_prime))
        kind = self.kind
        if kind == "constant":
            vals = np.full(p.shape, self.c)
        elif kind == "indicator_one":
            vals = np.ones(p.shape)
        elif kind == "one_over_loglog":
            vals = 1.0 / np.log(np.log(pc))
        elif kind == "one_over_log":
            vals = 1.0 / np.log(pc)
        elif kind == "sqrt_loglog":
            vals = np.sqrt(np.log(np.log(pc)))
        elif kind == "one_minus_one_over_p":
            vals = 1.0 - 1.0 / pc
        elif kind == "one_minus_one_over_log":
            vals = 1.0 - 1.0 / np.log(pc)
        elif kind == "scaled":
            vals = self.c * self.inner.values_at(p_int)
        else:  # tabulated
            lookup = dict(self.table)
            vals = np.empty(p.shape)
            start = self.start_prime
            for i, q in enumerate(p_int.ravel()):
                q = int(q)
                if q < start:
                    vals.flat[i] = 0.0
                    continue
                v = lookup.get(q, self.default)
                if v is None:
                    raise TabulatedLookupError(
                        f"no table entry (and no default) for prime {q}"
                    )
                vals.flat[i] = v
        vals = np.where(p_int < self.start_prime, 0.0, vals)
        if self.residue_filter is not None and not self.residue_filter.is_full:
            k, l = self.residue_filter.modulus, self.residue_filter.residue
            vals = np.where(p_int % k == l, vals, 0.0)
        return vals


def eval_at_prime(fn: PrimeFunction, p: int) -> float:
    """f(p) for a single prime; 0 below the start prime."""
    return float(fn.values_at(np.array([p], dtype=np.int64))[0])


@dataclass(frozen=True)
class Extension:
    """Prime-power rule: f(p^a) = f(p) ("strong") or a*f(p) ("complete").

    A finite overrides table ((p, a) -> value) replaces individual
    prime-power values on top of the base mode; the table being finite is
    what keeps an overridden function in the same limit-law family as its
    base.
    """

    mode: str = "strong"
    overrides: tuple[tuple[tuple[int, int], float], ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("strong", "complete"):
            raise ValueError(f"extension mode must be strong|complete, got {self.mode!r}")
        for (p, a), _ in self.overrides:
            if p < 2 or a < 1:
                raise ValueError(f"invalid override position ({p}, {a})")

    @property
    def override_map(self) -> dict[tuple[int, int], float]:
        return dict(self.overrides)

    @property
    def is_strongly_additive(self) -> bool:
        return self.mode == "strong" and not self.overrides


STRONG = Extension("strong")
COMPLETE = Extension("complete")


def prime_power_value(fn: PrimeFunction, ext: Extension, p: int, a: int) -> float:
    ov = ext.override_map.get((p, a))
    if ov is not None:
        return ov
    v = eval_at_prime(fn, p)
    return v if ext.mode == "strong" else a * v


def eval_additive(
    fn: PrimeFunction, ext: Extension, factorization: Iterable[tuple[int, int]]
) -> float:
    """Sum of prime-power values over a factorization (0 for the empty one)."""
    return sum(prime_power_value(fn, ext, p, a) for p, a in factorization)


@dataclass(frozen=True)
class FunctionPair:
    """A strongly additive reference function and a compared function."""

    f_star: tuple[PrimeFunction, Extension]
    f: tuple[PrimeFunction, Extension]
    declared_class: str  # "H" | "V"

    def __post_init__(self) -> None:
        if self.declared_class not in ("H", "V"):
            raise ValueError("declared_class must be 'H' or 'V'")


def builtin(name: str, progression: Progression | None = None) -> tuple[PrimeFunction, Extension]:
    """Canonical built-in functions by name.

    omega        distinct prime divisors
    big_omega    prime divisors with multiplicity
    omega1       distinct prime divisors lying in the given residue class
    half_omega   omega scaled by 0.5
    """
    key = name.lower()
    if key in ("omega", "w"):
        return PrimeFunction("indicator_one"), STRONG
    if key in ("big_omega", "bigomega", "capital_omega"):
        return PrimeFunction("indicator_one"), COMPLETE
    if key == "omega1":
        if progression is None:
            raise ValueError("omega1 needs a progression for its residue filter")
        return PrimeFunction("indicator_one", residue_filter=progression), STRONG
    if key == "half_omega":
        return (
            PrimeFunction("scaled", c=0.5, inner=PrimeFunction("indicator_one")),
            STRONG,
        )
    raise ValueError(f"unknown builtin {name!r}")


def parse_fn(text: str) -> PrimeFunction:
    """Parse the CLI spec syntax, e.g. const:0.7, invloglog, scaled:-1:invloglog."""
    head, _, rest = text.partition(":")
    head = head.lower()
    if head in ("const", "constant"):
        return PrimeFunction("constant", c=float(rest))
    if head == "invloglog":
        return PrimeFunction("one_over_loglog")
    if head == "invlog":
        return PrimeFunction("one_over_log")
    if head == "sqrtloglog":
        return PrimeFunction("sqrt_loglog")
    if head in ("one_minus_inv_p", "oneminusinvp"):
        return PrimeFunction("one_minus_one_over_p")
    if head in ("one_minus_inv_log", "oneminusinvlog"):
        return PrimeFunction("one_minus_one_over_log")
    if head in ("one", "indicator_one", "omega"):
        return PrimeFunction("indicator_one")
    if head == "scaled":
        factor, _, inner = rest.partition(":")
        return PrimeFunction("scaled", c=float(factor), inner=parse_fn(inner))
    if head == "tab":
        entries = {}
        default = None
        for item in rest.split(","):
            lhs, _, rhs = item.partition("=")
            if lhs.strip() == "default":
                default = float(rhs)
            else:
                entries[int(lhs)] = float(rhs)
        return PrimeFunction(
            "tabulated", table=tuple(sorted(entries.items())), default=default
        )
    raise ValueError(f"cannot parse function spec {text!r}")


# ---------------------------------------------------------------------------
# Continuous forms, for quadrature against the density of primes


def continuous_value(fn: PrimeFunction) -> Callable[[float], float]:
    """The kind's formula as a function of a real t (no start/filter masking)."""
    kind = fn.kind
    if kind == "constant":
        c = fn.c
        return lambda t: c
    if kind == "indicator_one":
        return lambda t: 1.0
    if kind == "one_over_loglog":
        return lambda t: 1.0 / math.log(math.log(t))
    if kind == "one_over_log":
        return lambda t: 1.0 / math.log(t)
    if kind == "sqrt_loglog":
        return lambda t: math.sqrt(math.log(math.log(t)))
    if kind == "one_minus_one_over_p":
        return lambda t: 1.0 - 1.0 / t
    if kind == "one_minus_one_over_log":
        return lambda t: 1.0 - 1.0 / math.log(t)
    if kind == "scaled":
        g = continuous_value(fn.inner)
        c = fn.c
        return lambda t: c * g(t)
    raise ValueError(f"kind {kind!r} has no continuous form")


def continuous_derivative(fn: PrimeFunction) -> Callable[[float], float]:
    """d/dt of the continuous form, catalogued per kind."""
    kind = fn.kind
    if kind in ("constant", "indicator_one"):
        return lambda t: 0.0
    if kind == "one_over_loglog":
        return lambda t: -1.0 / (t * math.log(t) * math.log(math.log(t)) ** 2)
    if kind == "one_over_log":
        return lambda t: -1.0 / (t * math.log(t) ** 2)
    if kind == "sqrt_loglog":
        return lambda t: 1.0 / (2.0 * t * math.log(t) * math.sqrt(math.log(math.log(t))))
    if kind == "one_minus_one_over_p":
        return lambda t: 1.0 / (t * t)
    if kind == "one_minus_one_over_log":
        return lambda t: 1.0 / (t * math.log(t) ** 2)
    if kind == "scaled":
        g = continuous_derivative(fn.inner)
        c = fn.c
        return lambda t: c * g(t)
    raise ValueError(f"kind {kind!r} has no catalogued derivative")


# ---------------------------------------------------------------------------
# Bulk evaluation over progression members


def _residue_for(start: int, step: int, modulus: int) -> int:
    # smallest t >= 0 with start + t*step == 0 (mod modulus); caller ensures
    # gcd(step, modulus) == 1
    inv = pow(step, -1, modulus)
    return (-start * inv) % modulus


def iter_progression_values(
    specs: Sequence[tuple[PrimeFunction, Extension]],
    progression: Progression,
    n: int,
    block_members: int = MEMBER_BLOCK,
) -> Iterator[list[np.ndarray]]:
    """Evaluate additive functions over all progression members up to n.

    Yields, per block of members, one float64 array per spec.  One shared
    factorization sweep serves every spec: members are peeled by the base
    primes up to sqrt(n) with stride arithmetic on the member index (the
    members form an arithmetic sequence, so multiples of p fall on a
    fixed stride), after which any residual > 1 is a single large prime
    factor of multiplicity one.
    """
    total = progression.count(n)
    if total == 0:
        return
    start = progression.first_member
    k = progression.modulus

    base = [int(p) for p in primes_upto_monolithic(math.isqrt(n))]
    usable = [(j, p) for j, p in enumerate(base) if k % p != 0]
    t_res = {p: _residue_for(start, k, p) for _, p in usable}

    base_arr = np.array(base, dtype=np.int64)
    f_at_base = [fn.values_at(base_arr) if base else np.empty(0) for fn, _ in specs]
    complete_mode = [ext.mode == "complete" for _, ext in specs]

    for t_lo in range(0, total, block_members):
        t_hi = min(t_lo + block_members, total)
        size = t_hi - t_lo
        members = start + k * np.arange(t_lo, t_hi, dtype=np.int64)
        residual = members.copy()
        vals = [np.zeros(size) for _ in specs]

        for j, p in usable:
            off = (t_res[p] - t_lo) % p
            if off >= size:
                continue
            idx = np.arange(off, size, p)
            residual[idx] //= p
            for i in range(len(specs)):
                fp = f_at_base[i][j]
                if fp != 0.0:
                    vals[i][idx] += fp
            cur = idx[residual[idx] % p == 0]
            while cur.size:
                residual[cur] //= p
                for i in range(len(specs)):
                    fp = f_at_base[i][j]
                    if complete_mode[i] and fp != 0.0:
                        vals[i][cur] += fp
                cur = cur[residual[cur] % p == 0]

        big = residual > 1
        if np.any(big):
            leftovers = residual[big]
            for i, (fn, _) in enumerate(specs):
                fv = fn.values_at(leftovers)
                if np.any(fv):
                    vals[i][big] += fv

        # Finite prime-power overrides: members with p^a exactly dividing
        # them sit on a stride mod p^a minus the sub-stride mod p^(a+1).
        for i, (fn, ext) in enumerate(specs):
            for (p, a), v in ext.overrides:
                if k % p == 0:
                    continue
                pa = p**a
                if pa > n:
                    continue
                ca = _residue_for(start, k, pa)
                off = (ca - t_lo) % pa
                if off >= size:
                    continue
                idx = np.arange(off, size, pa)
                ca1 = _residue_for(start, k, pa * p)
                t_vals = t_lo + idx
                exact = idx[(t_vals - ca1) % (pa * p) != 0]
                if exact.size == 0:
                    continue
                base_val = eval_at_prime(fn, p)
                if ext.mode == "complete":
                    base_val *= a
                vals[i][exact] += v - base_val

        yield vals


def collect_values(
    fn: PrimeFunction,
    ext: Extension,
    progression: Progression,
    n: int,
    block_members: int = MEMBER_BLOCK,
) -> np.ndarray:
    """Materialize f over all members up to n (desk scale)."""
    blocks = [b[0] for b in iter_progression_values([(fn, ext)], progression, n, block_members)]
    if not blocks:
        return np.empty(0)
    return np.concatenate(blocks)
