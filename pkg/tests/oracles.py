"""Independent reference computations used to derive expected test values.

Nothing here imports the package: arithmetic is plain modular integers over
the 20-bit test group, so an agreement between oracle and implementation is
evidence rather than a tautology.
"""
from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from functools import lru_cache

P = 2097143
Q = 1048571
G = 4


def keygen(seed: int) -> tuple[int, int]:
    sk = random.Random(seed).randrange(1, Q)
    return sk, pow(G, sk, P)


def decrypt(sk: int, a: int, b: int) -> int:
    return b * pow(a, Q - sk % Q, P) % P


@lru_cache(maxsize=1)
def _full_dlog() -> dict[int, int]:
    table, x = {}, 1
    for n in range(Q):
        table[x] = n
        x = x * G % P
    return table


def dlog(y: int) -> int:
    """Brute-force discrete log over the whole subgroup."""
    return _full_dlog()[y]


def small_dlog(y: int, max_n: int) -> int | None:
    x = 1
    for n in range(max_n + 1):
        if x == y:
            return n
        x = x * G % P
    return None


def lagrange_secret(points: dict[int, int]) -> int:
    """Interpolate f(0) mod Q from {x: f(x)}."""
    total = 0
    for i, yi in points.items():
        num, den = 1, 1
        for j in points:
            if j != i:
                num = num * (-j) % Q
                den = den * (i - j) % Q
        total = (total + yi * num * pow(den, -1, Q)) % Q
    return total


def hypergeometric_detection(population: int, sample: int, flips: int) -> float:
    """Detection chance by explicit enumeration of every sample (no closed form)."""
    bad = set(range(flips))
    hits = total = 0
    for combo in itertools.combinations(range(population), sample):
        total += 1
        hits += not bad.isdisjoint(combo)
    return hits / total


def binomial_band(n: int, p: float, sigmas: float = 3.0) -> tuple[float, float]:
    mean = n * p
    sd = math.sqrt(n * p * (1 - p))
    return mean - sigmas * sd, mean + sigmas * sd


def same_tuples(rows_in: list[tuple], rows_out: list[tuple]) -> bool:
    """Output rows are a permutation of input rows as whole tuples."""
    return Counter(rows_in) == Counter(rows_out)


def damm(digits: str) -> int:
    # quasigroup of order 10 (weakly totally anti-symmetric), as tabulated by Damm
    table = [
        [0, 3, 1, 7, 5, 9, 8, 6, 4, 2], [7, 0, 9, 2, 1, 5, 4, 8, 6, 3],
        [4, 2, 0, 6, 8, 7, 1, 3, 5, 9], [1, 7, 5, 0, 9, 8, 3, 4, 2, 6],
        [6, 1, 2, 3, 0, 4, 5, 9, 7, 8], [3, 6, 7, 4, 2, 0, 9, 5, 8, 1],
        [5, 8, 6, 9, 7, 2, 0, 1, 3, 4], [8, 9, 4, 5, 3, 6, 2, 0, 1, 7],
        [9, 4, 3, 8, 6, 1, 7, 2, 0, 5], [2, 5, 8, 1, 4, 3, 6, 7, 9, 0],
    ]
    x = 0
    for d in digits:
        x = table[x][int(d)]
    return x
