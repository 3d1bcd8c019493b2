"""Discriminant-side machinery for the candidate search.

Class-number tables by reduced-form enumeration, signed primes, and the
assembly of the per-modulus discriminant pool with square roots composed
from precomputed signed-prime roots.
"""

import math
import os
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import CompositeDetected
from .numth import jacobi
from .parallel import ordered_map
from . import trialdiv

_CLASS_TABLE_MAGIC = b"FECPP-CNT"
_CLASS_TABLE_VERSION = 1


@dataclass(frozen=True, order=True)
class SignedPrime:
    """A prime discriminant factor: -4, 8, -8, or +/-q for odd prime q.

    qstar = q for q = 1 (mod 4) and -q for q = 3 (mod 4), so qstar is
    always 0 or 1 mod 4.
    """

    qstar: int

    @property
    def q(self) -> int:
        """The underlying prime (2 for the even cases)."""
        a = abs(self.qstar)
        return 2 if a in (4, 8) else a


@dataclass
class Disc:
    """One pool entry: a fundamental discriminant with class data.

    `parts` are the qstar values whose product is d; `root`, when set,
    satisfies root^2 = d (mod n) for the modulus the pool was built for.
    """

    d: int
    h: int
    hfac: tuple[int, ...]
    parts: tuple[int, ...]
    root: int | None = None


class ClassNumberTable:
    """Class numbers h(D) for all fundamental -dmax <= D < 0.

    Backed by an int32 array indexed by |D|; zero marks a non-fundamental
    index.
    """

    def __init__(self, dmax: int, h: np.ndarray):
        self.dmax = dmax
        self._h = h

    def class_number(self, d: int) -> int:
        """h(d) for fundamental d, else 0."""
        if d >= 0 or -d > self.dmax:
            raise ValueError(f"discriminant {d} outside table range")
        return int(self._h[-d])

    def is_fundamental(self, d: int) -> bool:
        return d < 0 and -d <= self.dmax and self._h[-d] > 0

    def items(self) -> Iterator[tuple[int, int]]:
        """Yield (D, h) for every fundamental D, by increasing |D|."""
        idx = np.nonzero(self._h)[0]
        for x in idx:
            yield -int(x), int(self._h[x])

    def __len__(self) -> int:
        return int(np.count_nonzero(self._h))


def _squarefree_mask(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[0] = False
    for d in range(2, math.isqrt(limit) + 1):
        mask[d * d :: d * d] = False
    return mask


def _fundamental_mask(dmax: int) -> np.ndarray:
    """mask[x] is True iff D = -x is a fundamental discriminant."""
    sf = _squarefree_mask(dmax)
    x = np.arange(dmax + 1)
    mask = np.zeros(dmax + 1, dtype=bool)
    # D = 1 (mod 4): x = 3 (mod 4) squarefree
    mask[(x % 4 == 3) & sf] = True
    # D = 4m with m squarefree, m = 1 or 2 (mod 4)
    m_idx = x[x % 4 == 0] // 4
    ok = (m_idx > 0) & ((m_idx % 4 == 1) | (m_idx % 4 == 2)) & sf[m_idx]
    mask[x[x % 4 == 0][ok]] = True
    return mask


def _count_forms_range(dmax: int, a_lo: int, a_hi: int) -> np.ndarray:
    """Count reduced forms (a, b, c) with a in [a_lo, a_hi) per |D|.

    Enumerates 0 <= b <= a <= c; b > 0 with b < a and a < c stands for the
    pair (a, +/-b, c), everything else for a single form.
    """
    counts = np.zeros(dmax + 1, dtype=np.int32)
    for a in range(a_lo, a_hi):
        fa = 4 * a
        for b in range(0, a + 1):
            start = fa * a - b * b  # c = a
            if start > dmax:
                continue
            if 0 < b < a:
                counts[start::fa] += 2
                counts[start] -= 1  # a = c admits only b >= 0
            else:
                counts[start::fa] += 1
    return counts


def class_number_table(dmax: int, workers: int = 1) -> ClassNumberTable:
    """Class numbers of all fundamental discriminants down to -dmax.

    Counts reduced primitive forms by direct enumeration (for fundamental
    D every form is automatically primitive).  The a-range is partitioned
    across workers; the result does not depend on the partition.
    """
    if dmax < 4:
        raise ValueError("dmax must be >= 4")
    amax = math.isqrt(dmax // 3)
    if workers <= 1 or amax < 64:
        counts = _count_forms_range(dmax, 1, amax + 1)
    else:
        bounds = np.linspace(1, amax + 1, workers + 1, dtype=int)
        parts = ordered_map(
            lambda ab: _count_forms_range(dmax, int(ab[0]), int(ab[1])),
            list(zip(bounds[:-1], bounds[1:])),
            workers,
        )
        counts = np.sum(parts, axis=0, dtype=np.int64).astype(np.int32)
    counts[~_fundamental_mask(dmax)] = 0
    return ClassNumberTable(dmax, counts)


def _write_varint(out: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("varint is unsigned")
    while True:
        b = value & 0x7F
        value >>= 7
        if value:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    shift = 0
    value = 0
    while True:
        if pos >= len(buf):
            raise ValueError("truncated varint")
        b = buf[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7


def save_class_table(table: ClassNumberTable, path: str) -> None:
    """Serialise a class-number table.

    Layout: magic, version byte, then varints dmax, entry count, and
    (|D| delta, h) pairs by increasing |D|.
    """
    out = bytearray()
    out += _CLASS_TABLE_MAGIC
    out.append(_CLASS_TABLE_VERSION)
    _write_varint(out, table.dmax)
    entries = list(table.items())
    _write_varint(out, len(entries))
    prev = 0
    for d, h in entries:
        _write_varint(out, -d - prev)
        _write_varint(out, h)
        prev = -d
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(bytes(out))
    os.replace(tmp, path)


def load_class_table(path: str) -> ClassNumberTable:
    with open(path, "rb") as f:
        buf = f.read()
    if buf[: len(_CLASS_TABLE_MAGIC)] != _CLASS_TABLE_MAGIC:
        raise ValueError("not a class-number table file")
    pos = len(_CLASS_TABLE_MAGIC)
    if buf[pos] != _CLASS_TABLE_VERSION:
        raise ValueError(f"unsupported class-number table version {buf[pos]}")
    pos += 1
    dmax, pos = _read_varint(buf, pos)
    count, pos = _read_varint(buf, pos)
    h = np.zeros(dmax + 1, dtype=np.int32)
    x = 0
    for _ in range(count):
        delta, pos = _read_varint(buf, pos)
        x += delta
        hv, pos = _read_varint(buf, pos)
        h[x] = hv
    return ClassNumberTable(dmax, h)


def cached_class_number_table(dmax: int, workers: int = 1, cache_dir: str | None = None) -> ClassNumberTable:
    """Build the table, reusing/creating an on-disk cache when possible."""
    if cache_dir is None:
        return class_number_table(dmax, workers)
    path = os.path.join(cache_dir, f"class_numbers_{dmax}.bin")
    if os.path.exists(path):
        try:
            table = load_class_table(path)
            if table.dmax == dmax:
                return table
        except (ValueError, OSError):
            pass
    table = class_number_table(dmax, workers)
    os.makedirs(cache_dir, exist_ok=True)
    save_class_table(table, path)
    return table


def signed_prime_stream(n: int) -> Iterator[SignedPrime]:
    """Signed primes q* with (q*|n) = +1, by increasing |q*|.

    Ties at |q*| = 8 are broken as -8 before 8.  A q* with (q*|n) = 0 and
    gcd giving a proper divisor of n raises CompositeDetected.
    """
    bound = 1 << 10
    emitted_specials = False
    while True:
        primes = trialdiv.primes_up_to(bound)
        for p in primes:
            p = int(p)
            if p == 2:
                continue
            qstars = [p if p % 4 == 1 else -p]
            if not emitted_specials and p > 8:
                qstars = [-4, -8, 8] + qstars
                emitted_specials = True
            for qs in qstars:
                j = jacobi(qs, n)
                if j == 1:
                    yield SignedPrime(qs)
                elif j == 0:
                    g = math.gcd(abs(qs), n)
                    if 1 < g < n:
                        raise CompositeDetected("small-prime-factor", factor=g, n=n)
        bound *= 4


def signed_primes(n: int, count: int) -> list[SignedPrime]:
    """The `count` smallest signed primes that split for n."""
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")
    if count < 0:
        raise ValueError("count must be >= 0")
    out = []
    for sp in signed_prime_stream(n):
        if len(out) >= count:
            break
        out.append(sp)
    return out


def _factor_small(m: int) -> tuple[int, ...]:
    """Prime factors of a small integer, with multiplicity."""
    fac = []
    d = 2
    while d * d <= m:
        while m % d == 0:
            fac.append(d)
            m //= d
        d += 1
    if m > 1:
        fac.append(m)
    return tuple(fac)


def is_fundamental(d: int) -> bool:
    """Standard fundamentality predicate for a negative discriminant."""
    if d >= 0:
        return False
    if d % 4 == 1:
        return _is_squarefree(-d)
    if d % 4 == 0:
        m = -d // 4
        return m % 4 in (1, 2) and _is_squarefree(m)
    return False


def _is_squarefree(x: int) -> bool:
    d = 2
    while d * d <= x:
        if x % (d * d) == 0:
            return False
        d += 1
    return x >= 1


def enumerate_pool_discs(
    qstars: list[int],
    table: ClassNumberTable,
    dmax: int,
    hmax: int,
    pmax: int,
    maxparts: int,
) -> list[Disc]:
    """All fundamental D buildable from the given signed primes.

    Products of up to `maxparts` distinct signed primes (at most one even
    one), restricted to |D| <= dmax, h(D) <= hmax and max prime of h(D)
    <= pmax.  Sorted by ascending class number, then |D|: small h makes
    the curve-construction phase cheap.
    """
    dmax = min(dmax, table.dmax)
    found: list[Disc] = []

    def consider(prod: int, parts: tuple[int, ...]) -> None:
        if prod >= 0:
            return
        h = table.class_number(prod)
        if h == 0 or h > hmax:
            return
        hfac = _factor_small(h)
        if hfac and max(hfac) > pmax:
            return
        found.append(Disc(prod, h, hfac, parts))

    m = len(qstars)

    def extend(start: int, prod: int, parts: tuple[int, ...], used_even: bool) -> None:
        if parts:
            consider(prod, parts)
        if len(parts) >= maxparts:
            return
        for i in range(start, m):
            qs = qstars[i]
            if qs % 2 == 0 and used_even:
                continue
            np_ = prod * qs
            if abs(np_) > dmax:
                continue
            extend(i + 1, np_, parts + (qs,), used_even or qs % 2 == 0)

    extend(0, 1, (), False)
    found.sort(key=lambda e: (e.h, -e.d))
    return found


def build_pool(
    n: int,
    roots: dict[int, int],
    table: ClassNumberTable,
    dmax: int,
    hmax: int,
    pmax: int,
    maxparts: int = 3,
) -> list[Disc]:
    """Discriminant pool for modulus n with square roots attached.

    `roots` maps qstar -> square root of qstar mod n.  Each emitted entry
    carries root = product of component roots, so root^2 = D (mod n) by
    construction.  Ordering is (h, |D|) ascending and deterministic.
    """
    qstars = sorted(roots, key=lambda q: (abs(q), q))
    pool = enumerate_pool_discs(qstars, table, dmax, hmax, pmax, maxparts)
    for entry in pool:
        r = 1
        for qs in entry.parts:
            r = r * roots[qs] % n
        entry.root = r
        if __debug__:
            assert r * r % n == entry.d % n
    return pool
