"""Batched smooth-part extraction via prime products and remainder trees.

A curve cardinality m is split as m = c * N' with c composed entirely of
primes up to the smoothness bound B and N' coprime to them.  The batch
path computes P mod m_i for all m_i with a product/remainder tree, then
extracts c by an iterated-gcd ladder run to stabilisation.
"""

import math
import os
from dataclasses import dataclass

import numpy as np

from .parallel import ordered_map

_PRODUCT_MAGIC = b"FECPP-PP"
_PRODUCT_VERSION = 1


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n (sieve of Eratosthenes)."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def primes_in_range(lo: int, hi: int) -> list[int]:
    """Primes p with lo < p <= hi, via a segmented sieve."""
    if hi <= lo:
        return []
    base = primes_up_to(math.isqrt(hi))
    seg = np.ones(hi - lo, dtype=bool)  # index i -> lo + 1 + i
    for p in base:
        p = int(p)
        start = max(p * p, ((lo + 1 + p - 1) // p) * p)
        if start > hi:
            continue
        seg[start - lo - 1 :: p] = False
    if lo < 1:
        seg[: 1 - lo] = False  # mask values < 2
    if lo < 2 <= hi:
        seg[2 - lo - 1] = True
    vals = np.nonzero(seg)[0] + lo + 1
    return [int(v) for v in vals if v >= 2]


def _balanced_product(values: list[int]) -> int:
    """Product by pairwise folding, keeping operand sizes balanced."""
    if not values:
        return 1
    layer = values
    while len(layer) > 1:
        nxt = [layer[i] * layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


@dataclass
class PrimeProduct:
    """Product of all primes in (b_lo, b_hi]."""

    b_lo: int
    b_hi: int
    value: int
    nbits: int
    empty: bool = False


def prime_product(b_lo: int, b_hi: int, cache_dir: str | None = None) -> PrimeProduct:
    """Exact product of the primes in (b_lo, b_hi].

    An empty range yields value 1 with the `empty` flag set.  With a cache
    directory the product is stored on disk for reuse across runs.
    """
    if not (1 <= b_lo < b_hi):
        raise ValueError("need 1 <= b_lo < b_hi")
    if cache_dir is not None:
        path = os.path.join(cache_dir, f"prime_product_{b_lo}_{b_hi}.bin")
        cached = _load_product(path, b_lo, b_hi)
        if cached is not None:
            return cached
    ps = primes_in_range(b_lo, b_hi)
    value = _balanced_product(ps)
    pp = PrimeProduct(b_lo, b_hi, value, value.bit_length(), empty=not ps)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        _save_product(pp, path)
    return pp


def _save_product(pp: PrimeProduct, path: str) -> None:
    raw = pp.value.to_bytes((pp.value.bit_length() + 7) // 8 or 1, "little")
    header = _PRODUCT_MAGIC + bytes([_PRODUCT_VERSION])
    meta = b"%d %d %d\n" % (pp.b_lo, pp.b_hi, len(raw))
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(header + meta + raw)
    os.replace(tmp, path)


def _load_product(path: str, b_lo: int, b_hi: int) -> PrimeProduct | None:
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError:
        return None
    hl = len(_PRODUCT_MAGIC)
    if blob[:hl] != _PRODUCT_MAGIC or blob[hl] != _PRODUCT_VERSION:
        return None
    try:
        nl = blob.index(b"\n", hl + 1)
        lo, hi, size = (int(x) for x in blob[hl + 1 : nl].split())
        raw = blob[nl + 1 :]
        if (lo, hi) != (b_lo, b_hi) or len(raw) != size:
            return None
        value = int.from_bytes(raw, "little")
    except ValueError:
        return None
    return PrimeProduct(lo, hi, value, value.bit_length(), empty=value == 1)


class MemoryMeter:
    """Tracks the live big-integer bits held by a remainder tree.

    The tree code reports every allocation and release of an internal
    value, so tests can assert the peak stays within the designed bound
    (about twice the product size plus the leaves).
    """

    def __init__(self) -> None:
        self.live = 0
        self.peak = 0

    def alloc(self, value: int) -> int:
        self.live += value.bit_length()
        if self.live > self.peak:
            self.peak = self.live
        return value

    def free(self, value: int) -> None:
        self.live -= value.bit_length()


class _NullMeter:
    def alloc(self, value: int) -> int:
        return value

    def free(self, value: int) -> None:
        pass


_NULL_METER = _NullMeter()


def _descend(x: int, ms: list[int], out: list[int], base: int, meter) -> None:
    """Replace x = P mod prod(ms) by the per-leaf remainders.

    Subtree products are recomputed at each level instead of being kept,
    which bounds live memory by ~2x the product size at the cost of a
    logarithmic factor in multiplications.
    """
    if len(ms) == 1:
        out[base] = x % ms[0]
        meter.free(x)
        return
    mid = len(ms) // 2
    left, right = ms[:mid], ms[mid:]
    ml = meter.alloc(_balanced_product(left))
    xl = meter.alloc(x % ml)
    meter.free(ml)
    mr = meter.alloc(_balanced_product(right))
    xr = meter.alloc(x % mr)
    meter.free(mr)
    meter.free(x)
    del x, ml, mr
    _descend(xl, left, out, base, meter)
    _descend(xr, right, out, base + mid, meter)


def remainder_tree(
    p: int,
    ms: list[int],
    workers: int = 1,
    meter: MemoryMeter | None = None,
) -> list[int]:
    """P mod m_i for every i, by batched product/remainder trees.

    The leaves are cut into batches whose product M stays at or below P
    (one leaf minimum), so each batch tree is no larger than P itself.
    Batch boundaries and worker count do not change the result.
    """
    if any(m < 2 for m in ms):
        raise ValueError("all moduli must be >= 2")
    if not ms:
        return []
    meter_ = meter if meter is not None else _NULL_METER
    p_bits = max(p.bit_length(), 1)
    batches: list[tuple[int, list[int]]] = []
    start, acc = 0, 0
    for i, m in enumerate(ms):
        b = m.bit_length()
        if i > start and acc + b > p_bits:
            batches.append((start, ms[start:i]))
            start, acc = i, b
        else:
            acc += b
    batches.append((start, ms[start:]))

    out = [0] * len(ms)

    def run(batch: tuple[int, list[int]]) -> None:
        base, leaves = batch
        m_batch = meter_.alloc(_balanced_product(leaves))
        x0 = meter_.alloc(p % m_batch)
        meter_.free(m_batch)
        _descend(x0, leaves, out, base, meter_)

    ordered_map(run, batches, workers)
    return out


@dataclass
class SmoothSplit:
    """m = c * nprime with c smooth and nprime coprime to the prime pool."""

    m: int
    c: int
    nprime: int


def _extract_ladder(m: int, rem: int) -> tuple[int, int]:
    """Iterated-gcd ladder: pull out every power of each shared prime.

    Starts from gcd(m, P mod m) and keeps dividing until the gcd
    stabilises at 1, so the split is exact even for high prime powers
    (the classic worst case m = 2^L just runs the ladder L times).
    """
    c = 1
    g = math.gcd(m, rem % m)
    while g > 1:
        c *= g
        m //= g
        g = math.gcd(m, g)
    return c, m


def smooth_split(m: int, p_mod_m: int, p: int) -> SmoothSplit:
    """Split m against a single prime product P, given P mod m."""
    if m < 2:
        raise ValueError("m must be >= 2")
    c, nprime = _extract_ladder(m, p_mod_m)
    return SmoothSplit(m, c, nprime)


def batch_factor(
    ms: list[int],
    products: list[PrimeProduct],
    batches: int = 16,
    workers: int = 1,
) -> list[SmoothSplit]:
    """Smooth-split every m against the union of the prime products.

    Work is partitioned two-dimensionally over (batch of ms) x (prime
    range); per-range smooth parts combine multiplicatively, matching a
    single split against the full product.  `batches` is reduced when
    there are fewer inputs than batches.
    """
    if not ms:
        return []
    lo = min(pp.b_lo for pp in products)
    if lo > 2:
        raise ValueError("prime ranges must start at 2 or below")
    spans = sorted((pp.b_lo, pp.b_hi) for pp in products)
    for (_, hi_prev), (lo_next, _) in zip(spans, spans[1:]):
        if lo_next != hi_prev:
            raise ValueError("prime ranges must be contiguous")
    nb = max(1, min(batches, len(ms)))
    size = (len(ms) + nb - 1) // nb
    cells = []
    for bi in range(0, len(ms), size):
        for pp in products:
            cells.append((bi, pp))

    def run(cell: tuple[int, PrimeProduct]) -> tuple[int, int, list[int]]:
        bi, pp = cell
        chunk = ms[bi : bi + size]
        return bi, pp.b_lo, remainder_tree(pp.value, chunk)

    results = ordered_map(run, cells, workers)
    rems: dict[tuple[int, int], list[int]] = {(bi, blo): r for bi, blo, r in results}

    out: list[SmoothSplit] = []
    for i, m in enumerate(ms):
        bi = (i // size) * size
        c_total, mm = 1, m
        for pp in products:
            if mm == 1:
                break
            r = rems[(bi, pp.b_lo)][i - bi]
            c, mm = _extract_ladder(mm, r % mm)
            c_total *= c
        out.append(SmoothSplit(m, c_total, mm))
    return out
