"""The independent-variable model for an additive function on a progression.

Each prime contributes a two-valued variable X_p that equals f(p) with
probability 1/p and 0 otherwise; the model sum is S = sum of independent
X_p over the chosen prime set.  Cumulants add across independent terms,
so exact central moments of S come from a per-prime moment-to-cumulant
recursion followed by the cumulant-to-central-moment recursion, both
generic up to order 10.  Alongside the exact values we carry the
first-order approximation sum f(p)^u / p and its gap budget
sum |f(p)|^u / p^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import prime_sums
from .arith_fn import FunctionPair, PrimeFunction, eval_at_prime, iter_progression_values
from .config import MEMBER_BLOCK, U_MAX_CAP, U_MAX_DEFAULT
from .moments import CoMoments, MomentSummary
from .sieve import Progression, primes_in_progression, sieve_primes

MODES = ("restricted", "density")


@dataclass(frozen=True)
class BernoulliTerm:
    """One model term: value f(p) with probability 1/p, else 0."""

    p: int
    value: float

    @property
    def success_prob(self) -> float:
        return 1.0 / self.p

    def raw_moment(self, j: int) -> float:
        return self.value**j / self.p


@dataclass(frozen=True)
class ModelMoments:
    n: int
    progression: Progression
    mode: str
    kappa: dict[int, float]  # cumulants 1..u_max
    mu: dict[int, float]  # exact central moments 1..u_max (mu_1 = 0)
    first_order: dict[int, float]  # sum f(p)^u / p per order
    gap_bound: dict[int, float]  # sum |f(p)|^u / p^2 per order
    term_count: int


@dataclass(frozen=True)
class SampleSet:
    seed: int
    trials: int
    values: np.ndarray


@dataclass(frozen=True)
class LindebergReport:
    n: int
    epsilon: float
    variance: float  # D(n) = sum f(p)^2 / p over the prime set
    ratio: float  # (1/D) * sum over |f(p)| > eps*sqrt(D) of f(p)^2/p
    max_over_sqrt_d: float  # max |f(p)| / sqrt(D(n))


@dataclass(frozen=True)
class PairComparison:
    summary_star: MomentSummary
    summary: MomentSummary
    mean_diff: float
    mu_diff: dict[int, float]
    predictions_star: dict[str, float]
    predictions: dict[str, float]
    override_contribution: float | None  # class-H pairs with explicit overrides


def mode_primes(progression: Progression, n: int, mode: str) -> np.ndarray:
    """Prime set behind a model: the residue class itself, or all p not
    dividing the modulus (the uniform-density reading)."""
    if mode == "restricted":
        return primes_in_progression(n, progression).primes
    if mode == "density":
        primes = sieve_primes(n).primes
        k = progression.modulus
        if k > 1:
            mask = np.ones(primes.size, dtype=bool)
            for p in primes[primes <= k]:
                if k % int(p) == 0:
                    mask &= primes != p
            primes = primes[mask]
        return primes
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _raw_to_cumulants(raw: np.ndarray) -> np.ndarray:
    """Per-term cumulants from raw moments, vectorized across terms.

    raw[j] is the array of j-th raw moments (raw[0] = 1); the standard
    recursion kappa_n = m_n - sum C(n-1, j-1) kappa_j m_{n-j} applies.
    """
    u_max = raw.shape[0] - 1
    kappa = np.zeros_like(raw)
    for order in range(1, u_max + 1):
        acc = raw[order].copy()
        for j in range(1, order):
            acc -= math.comb(order - 1, j - 1) * kappa[j] * raw[order - j]
        kappa[order] = acc
    return kappa


def _cumulants_to_central(kappa: Sequence[float]) -> list[float]:
    """Central moments from cumulants via the same recursion with kappa_1 = 0."""
    u_max = len(kappa) - 1
    shifted = list(kappa)
    shifted[1] = 0.0
    central = [1.0] + [0.0] * u_max
    for order in range(1, u_max + 1):
        acc = 0.0
        for j in range(1, order + 1):
            acc += math.comb(order - 1, j - 1) * shifted[j] * central[order - j]
        central[order] = acc
    return central


def exact_moments(
    fn: PrimeFunction,
    progression: Progression,
    n: int,
    u_max: int = U_MAX_DEFAULT,
    mode: str = "restricted",
) -> ModelMoments:
    """Exact cumulants and central moments of the model sum up to u_max."""
    if not 1 <= u_max <= U_MAX_CAP:
        raise ValueError(f"u_max must be in [1, {U_MAX_CAP}]")
    primes = mode_primes(progression, n, mode)
    fv = fn.values_at(primes)
    active = fv != 0.0
    p = primes[active].astype(np.float64)
    f = fv[active]

    if p.size == 0:
        zeros = {u: 0.0 for u in range(1, u_max + 1)}
        return ModelMoments(n, progression, mode, dict(zeros), dict(zeros), dict(zeros), dict(zeros), 0)

    raw = np.zeros((u_max + 1, p.size))
    raw[0] = 1.0
    inv_p = 1.0 / p
    power = np.ones_like(f)
    first = {}
    gap = {}
    for j in range(1, u_max + 1):
        power = power * f
        raw[j] = power * inv_p
        first[j] = float(np.sum(power * inv_p))
        gap[j] = float(np.sum(np.abs(power) * inv_p * inv_p))

    kappa_terms = _raw_to_cumulants(raw)
    kappa = {j: float(np.sum(kappa_terms[j])) for j in range(1, u_max + 1)}
    central = _cumulants_to_central([0.0] + [kappa[j] for j in range(1, u_max + 1)])
    mu = {j: central[j] for j in range(1, u_max + 1)}
    return ModelMoments(n, progression, mode, kappa, mu, first, gap, int(p.size))


def central_moment_first_order(
    fn: PrimeFunction, progression: Progression, n: int, u: int
) -> float:
    """First-order stand-in for the u-th central moment: the exact sum of f(p)^u / p."""
    if u < 2:
        raise ValueError(f"central moment order must be >= 2, got {u}")
    return prime_sums.prime_power_sum(fn, u, n, progression).value


def brute_force_central_moments(
    terms: Sequence[BernoulliTerm], u_max: int
) -> dict[int, float]:
    """Enumerate all 2^m outcomes of the model sum (oracle, m <= ~20)."""
    values = np.zeros(1)
    probs = np.ones(1)
    for t in terms:
        values = np.concatenate([values, values + t.value])
        probs = np.concatenate([probs * (1.0 - t.success_prob), probs * t.success_prob])
    mean = float(np.dot(probs, values))
    d = values - mean
    out = {1: 0.0}
    for u in range(2, u_max + 1):
        out[u] = float(np.dot(probs, d**u))
    return out


def sample(
    fn: PrimeFunction,
    progression: Progression,
    n: int,
    trials: int,
    seed: int,
    mode: str = "restricted",
) -> SampleSet:
    """Monte Carlo realizations of the model sum.

    Work is scattered per prime: the number of successful trials is drawn
    from Binomial(trials, 1/p) and f(p) is added to that many distinct
    trial slots (Floyd sampling), giving expected work O(trials * lnln n)
    instead of O(trials * pi(n)).  Every prime owns a counter-based
    stream keyed by (seed, prime index), so results are reproducible and
    independent of evaluation order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    primes = mode_primes(progression, n, mode)
    fv = fn.values_at(primes)
    active = np.flatnonzero(fv != 0.0)
    values = np.zeros(trials)
    for idx in active:
        g = np.random.Generator(
            np.random.Philox(key=np.array([seed, idx], dtype=np.uint64))
        )
        p = int(primes[idx])
        c = int(g.binomial(trials, 1.0 / p))
        if c == 0:
            continue
        slots = _floyd_sample(g, trials, c)
        values[slots] += fv[idx]
    return SampleSet(seed, trials, values)


def _floyd_sample(g: np.random.Generator, n: int, c: int) -> np.ndarray:
    # uniform c-subset of range(n) in O(c) draws
    chosen: set[int] = set()
    for j in range(n - c, n):
        t = int(g.integers(0, j + 1))
        if t in chosen:
            chosen.add(j)
        else:
            chosen.add(t)
    return np.fromiter(chosen, dtype=np.int64, count=c)


def lindeberg_check(
    fn: PrimeFunction,
    progression: Progression,
    n: int,
    epsilon: float,
    mode: str = "restricted",
) -> LindebergReport:
    """Tail-variance ratio behind the normal-limit condition.

    Returns (1/D) * sum of f(p)^2/p over primes with |f(p)| > eps*sqrt(D),
    where D = sum f(p)^2/p, plus the coarser diagnostic max|f|/sqrt(D).
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    primes = mode_primes(progression, n, mode)
    fv = fn.values_at(primes)
    active = fv != 0.0
    p = primes[active].astype(np.float64)
    f = fv[active]
    if p.size == 0:
        raise ValueError("degenerate: no primes contribute (variance is 0)")
    contrib = f * f / p
    variance = float(np.sum(contrib))
    if variance <= 0.0:
        raise ValueError("degenerate: variance is 0")
    threshold = epsilon * math.sqrt(variance)
    ratio = float(np.sum(contrib[np.abs(f) > threshold])) / variance
    max_over = float(np.max(np.abs(f))) / math.sqrt(variance)
    return LindebergReport(n, epsilon, variance, ratio, max_over)


def mean_predictions(
    fn: PrimeFunction, progression: Progression, n: int
) -> dict[str, float]:
    """First-moment prediction under both prime-set readings."""
    out = {}
    for mode in MODES:
        primes = mode_primes(progression, n, mode)
        fv = fn.values_at(primes)
        out[mode] = float(np.sum(fv / primes))
    return out


def compare_pair(
    pair: FunctionPair,
    progression: Progression,
    n: int,
    u_max: int = U_MAX_DEFAULT,
    block_members: int = MEMBER_BLOCK,
) -> PairComparison:
    """Empirical moments of both pair members over the progression.

    Both functions are evaluated in one factorization sweep.  For pairs
    whose compared member carries explicit prime-power overrides, the
    total override weight sum |delta f(p^a)| * density(p^a exactly
    divides a member) is reported; the density of an exact power p^a
    among members is (1/p^a)(1 - 1/p) for p not dividing the modulus.
    """
    fn_star, ext_star = pair.f_star
    fn, ext = pair.f
    count = progression.count(n)
    if count == 0:
        raise ValueError("no progression members <= n")
    acc_star = CoMoments(u_max)
    acc = CoMoments(u_max)
    for vals_star, vals in iter_progression_values(
        [(fn_star, ext_star), (fn, ext)], progression, n, block_members
    ):
        acc_star.add_batch(vals_star)
        acc.add_batch(vals)

    def summarize(a: CoMoments) -> MomentSummary:
        return MomentSummary(n, progression, a.n, a.mean, a.sigma, a.central_moments())

    s_star, s = summarize(acc_star), summarize(acc)
    mu_diff = {u: s.mu[u] - s_star.mu[u] for u in s.mu}

    override_total: float | None = None
    if pair.declared_class == "H" and (ext_star.overrides or ext.overrides):
        k = progression.modulus
        total = 0.0
        for fn_i, ext_i in (pair.f_star, pair.f):
            for (p, a), v in ext_i.overrides:
                if k % p == 0:
                    continue
                base = eval_at_prime(fn_i, p)
                if ext_i.mode == "complete":
                    base *= a
                density = (1.0 / p**a) * (1.0 - 1.0 / p)
                total += abs(v - base) * density
        override_total = total

    return PairComparison(
        summary_star=s_star,
        summary=s,
        mean_diff=s.mean - s_star.mean,
        mu_diff=mu_diff,
        predictions_star=mean_predictions(fn_star, progression, n),
        predictions=mean_predictions(fn, progression, n),
        override_contribution=override_total,
    )
