"""
Falling factorials, multinomial coefficients and colour-event probabilities.

Every moment formula of the random-colouring null model is a combination of
ratios of falling factorials a^r / c^r with a <= c. They are evaluated here as
products of per-factor quotients (a-k)/(c-k), each in [0, 1], so that degrees
in the tens of thousands neither overflow nor underflow. Exact integer versions
are kept for the enumeration oracle.
"""

import math
from typing import Sequence

import numpy as np
from scipy.special import gammaln


def falling_power(a: int, r: int) -> int:
    """Exact falling power a(a-1)...(a-r+1); 1 when r == 0 and 0 when r > a."""
    if a < 0 or r < 0:
        raise ValueError(f"falling_power needs nonnegative arguments, got a={a}, r={r}")
    if r > a:
        return 0
    return math.perm(a, r)


def falling_ratio(a: int, c: int, r: int) -> float:
    """
    Ratio of falling powers a^r / c^r for 0 <= a <= c.

    Args:
        a: Numerator base.
        c: Denominator base, at least ``a``.
        r: Number of factors.

    Returns:
        The product of (a - k) / (c - k) for k < r, or 0.0 when r > a.
    """
    if a < 0 or r < 0:
        raise ValueError(f"falling_ratio needs nonnegative a and r, got a={a}, r={r}")
    if a > c:
        raise ValueError(f"falling_ratio needs a <= c, got a={a}, c={c}")
    if r > a:
        return 0.0
    value = 1.0
    for k in range(r):
        value *= (a - k) / (c - k)
    return value


def falling_ratio_table(a: int, c: int, r_max: int) -> np.ndarray:
    """
    Vector of ``falling_ratio(a, c, r)`` for r = 0..r_max.

    Built as a cumulative product of the per-factor quotients, so entry r costs
    one multiplication. Entries with r > a are exactly zero.
    """
    if a < 0 or r_max < 0:
        raise ValueError(f"falling_ratio_table needs nonnegative a and r_max, got a={a}, r_max={r_max}")
    if a > c:
        raise ValueError(f"falling_ratio_table needs a <= c, got a={a}, c={c}")
    k = np.arange(r_max, dtype=np.float64)
    numerators = a - k
    denominators = c - k
    live = numerators > 0
    factors = np.zeros(r_max, dtype=np.float64)
    factors[live] = numerators[live] / denominators[live]
    table = np.empty(r_max + 1, dtype=np.float64)
    table[0] = 1.0
    table[1:] = np.cumprod(factors)
    return table


def hypergeom_pmf(n: int, c_i: int, t: int, h: int) -> float:
    """
    Probability that exactly h of t given nodes carry colour i.

    This is Hyp(n, c_i, t): C(t, h) * c_i^h * (n - c_i)^(t-h) / n^t, written as
    a product of two falling ratios so that it stays in [0, 1] throughout.
    """
    if not 0 <= h <= t <= n:
        raise ValueError(f"hypergeom_pmf needs 0 <= h <= t <= n, got h={h}, t={t}, n={n}")
    if not 0 <= c_i <= n:
        raise ValueError(f"hypergeom_pmf needs 0 <= c_i <= n, got c_i={c_i}, n={n}")
    if h > c_i or t - h > n - c_i:
        return 0.0
    return math.comb(t, h) * prob_all_color(n, c_i, h, t - h)


def multinomial(n: int, profile: Sequence[int]) -> int:
    """Exact number of colourings of n nodes with the given class sizes."""
    _check_profile_sum(n, profile)
    count = 1
    remaining = n
    for part in profile:
        count *= math.comb(remaining, part)
        remaining -= part
    return count


def log_multinomial(n: int, profile: Sequence[int]) -> float:
    """Natural log of n! / (c_1! ... c_s!) through the log-gamma function."""
    _check_profile_sum(n, profile)
    counts = np.asarray(profile, dtype=np.float64)
    return float(gammaln(n + 1) - np.sum(gammaln(counts + 1)))


def prob_all_color(n: int, c_i: int, a: int, b: int) -> float:
    """
    Probability that a fixed set of a nodes is all colour i while a disjoint
    set of b nodes has no colour-i node: c_i^a (n - c_i)^b / n^(a+b).
    """
    if a + b > n:
        return 0.0
    first = falling_ratio(c_i, n, a)
    if first == 0.0:
        return 0.0
    return first * falling_ratio(n - c_i, n - a, b)


def joint_color_prob(
    n: int, c_i: int, c_j: int, a: int, b: int, a2: int, b2: int, b3: int
) -> float:
    """
    Probability that two single-colour events for distinct colours i and j
    hold together.

    The first event asks a set A (|A| = a) to be colour i and a disjoint set B
    (|B| = b) to avoid i. The second asks A' (|A'| = a2) to be colour j and B'
    (|B'| = b2) to avoid j, where b3 = |B' ∩ A| of the B' nodes are already
    coloured i by the first event. A' and the remaining b2 - b3 nodes of B'
    lie inside B, so the second event is decided on the nodes not coloured i.

    Returns:
        {c_i^a (n-c_i)^b / n^(a+b)} * {c_j^a2 (n-c_i-c_j)^(b2-b3) / (n-c_i)^(a2+b2-b3)}
    """
    for name, value in (("a", a), ("b", b), ("a2", a2), ("b2", b2), ("b3", b3)):
        if value < 0:
            raise ValueError(f"joint_color_prob needs {name} >= 0, got {value}")
    if b3 > min(b2, a):
        raise ValueError(f"joint_color_prob needs b3 <= min(b2, a), got b3={b3}")
    if c_i + c_j > n:
        raise ValueError(f"joint_color_prob needs c_i + c_j <= n, got {c_i} + {c_j} > {n}")

    first = prob_all_color(n, c_i, a, b)
    if first == 0.0:
        return 0.0
    # The second event lives on the n - c_i nodes left after colour i is placed.
    rest = n - c_i
    free = b2 - b3
    if a2 + free > rest:
        return 0.0
    second = falling_ratio(c_j, rest, a2)
    if second == 0.0:
        return 0.0
    return first * second * falling_ratio(rest - c_j, rest - a2, free)


def _check_profile_sum(n: int, profile: Sequence[int]) -> None:
    if any(part < 0 for part in profile):
        raise ValueError(f"profile entries must be nonnegative, got {list(profile)}")
    if sum(profile) != n:
        raise ValueError(f"profile sums to {sum(profile)}, expected n={n}")
