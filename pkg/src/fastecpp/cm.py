"""Hilbert class polynomials and their roots modulo N.

The class polynomial of a fundamental discriminant D is built from
complex approximations: j is evaluated at the CM point of every reduced
form via theta constants, conjugate pairs are combined into real
quadratic factors, and the expanded coefficients are rounded to integers
with an explicit residual check and precision-doubling retry.
"""

import math
import os
import random
import threading
from dataclasses import dataclass

import mpmath

from .errors import CompositeDetected, PrecisionError
from .numth import checked_inverse

_POLY_MAGIC = b"FECPP-HCP"
_POLY_VERSION = 1
_MAX_PRECISION_RETRIES = 4

_eval_lock = threading.Lock()  # mpmath precision state is global


@dataclass(frozen=True)
class ReducedForm:
    """Reduced primitive form (a, b, c) with b^2 - 4ac = D."""

    a: int
    b: int
    c: int


@dataclass
class ClassPolynomial:
    """Monic integer polynomial whose roots are the CM j-invariants.

    `coeffs` is ascending (coeffs[-1] == 1, degree == class number).
    `residual` records the worst rounding distance of the first
    evaluation attempt, as a precision-adequacy diagnostic.
    """

    d: int
    coeffs: list[int]
    residual: float = 0.0
    precision_bits: int = 0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def reduced_forms(d: int) -> list[ReducedForm]:
    """All reduced primitive forms of discriminant d < 0.

    Convention: |b| <= a <= c with b >= 0 whenever |b| = a or a = c.
    """
    if d >= 0 or d % 4 not in (0, 1):
        raise ValueError("d must be a negative discriminant")
    forms = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (b == -a or a == c):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) == 1:
                forms.append(ReducedForm(a, b, c))
        a += 1
    forms.sort(key=lambda f: (f.a, f.b))
    return forms


def _j_from_theta(q) -> "mpmath.mpc":
    """Klein j from the three theta constants at nome q = exp(pi*i*tau)."""
    t2 = mpmath.jtheta(2, 0, q)
    t3 = mpmath.jtheta(3, 0, q)
    t4 = mpmath.jtheta(4, 0, q)
    h2, h3, h4 = t2**8, t3**8, t4**8
    return 32 * (h2 + h3 + h4) ** 3 / (h2 * h3 * h4)


def precision_for(d: int, forms: list[ReducedForm]) -> int:
    """First-attempt bit precision for the coefficient reconstruction.

    pi * sqrt(|D|) * sum(1/a) / ln 2 bounds the coefficient sizes; the
    10h + 64 guard absorbs accumulation during the polynomial expansion.
    """
    inv_a = math.fsum(1.0 / f.a for f in forms)
    h = len(forms)
    return math.ceil(math.pi * math.sqrt(-d) * inv_a / math.log(2)) + 10 * h + 64


def _expand(d: int, forms: list[ReducedForm], wp: int) -> tuple[list[int], float]:
    """Evaluate all j values at precision wp and expand the product."""
    with mpmath.workprec(wp):
        sqrt_ad = mpmath.sqrt(-d)
        # real linear factors for self-conjugate forms, real quadratics
        # for +/-b pairs (the pair members have conjugate j values)
        poly = [mpmath.mpf(1)]
        for f in forms:
            if f.b < 0:
                continue
            mag = mpmath.exp(-mpmath.pi * sqrt_ad / (2 * f.a))
            ang = mpmath.pi * f.b / (2 * f.a)
            q = mag * mpmath.mpc(mpmath.cos(ang), -mpmath.sin(ang))
            j = _j_from_theta(q)
            if f.b == 0 or f.b == f.a or f.a == f.c:
                poly = _rmul(poly, [-j.real, mpmath.mpf(1)])
            else:
                poly = _rmul(poly, [abs(j) ** 2, -2 * j.real, mpmath.mpf(1)])
        coeffs = []
        residual = 0.0
        for cval in poly:
            r = mpmath.nint(cval)
            residual = max(residual, float(abs(cval - r)))
            coeffs.append(int(r))
    return coeffs, residual


def _rmul(u: list, v: list) -> list:
    out = [mpmath.mpf(0)] * (len(u) + len(v) - 1)
    for i, ui in enumerate(u):
        for k, vk in enumerate(v):
            out[i + k] += ui * vk
    return out


def hilbert_class_poly(d: int, cache_dir: str | None = None) -> ClassPolynomial:
    """Hilbert class polynomial of the fundamental discriminant d.

    Monic of degree h(d), integral coefficients.  Retries at doubled
    precision whenever any coefficient sits further than 1/4 from an
    integer; exceeding the retry cap raises PrecisionError.
    """
    if cache_dir is not None:
        cached = _load_poly(d, cache_dir)
        if cached is not None:
            return cached
    forms = reduced_forms(d)
    if not forms:
        raise ValueError(f"{d} is not a valid discriminant")
    prec = precision_for(d, forms)
    first_residual = None
    with _eval_lock:
        wp = prec + 32 + len(forms).bit_length()
        for _ in range(_MAX_PRECISION_RETRIES + 1):
            coeffs, residual = _expand(d, forms, wp)
            if first_residual is None:
                first_residual = residual
            if residual < 0.25:
                poly = ClassPolynomial(d, coeffs, first_residual, prec)
                if cache_dir is not None:
                    _save_poly(poly, cache_dir)
                return poly
            wp *= 2
    raise PrecisionError(f"class polynomial for D={d} did not stabilise")


def _poly_path(d: int, cache_dir: str) -> str:
    return os.path.join(cache_dir, f"class_poly_{-d}.bin")


def _save_poly(poly: ClassPolynomial, cache_dir: str) -> None:
    os.makedirs(cache_dir, exist_ok=True)
    out = bytearray()
    out += _POLY_MAGIC
    out.append(_POLY_VERSION)
    out += b"%d %d\n" % (poly.d, len(poly.coeffs))
    for c in poly.coeffs:
        raw = c.to_bytes((c.bit_length() + 8) // 8, "little", signed=True)
        out += len(raw).to_bytes(4, "little") + raw
    path = _poly_path(poly.d, cache_dir)
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(bytes(out))
    os.replace(tmp, path)


def _load_poly(d: int, cache_dir: str) -> ClassPolynomial | None:
    path = _poly_path(d, cache_dir)
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError:
        return None
    hl = len(_POLY_MAGIC)
    if blob[:hl] != _POLY_MAGIC or blob[hl] != _POLY_VERSION:
        return None
    try:
        nl = blob.index(b"\n", hl + 1)
        dd, count = (int(x) for x in blob[hl + 1 : nl].split())
        if dd != d:
            return None
        pos = nl + 1
        coeffs = []
        for _ in range(count):
            size = int.from_bytes(blob[pos : pos + 4], "little")
            pos += 4
            coeffs.append(int.from_bytes(blob[pos : pos + size], "little", signed=True))
            pos += size
    except (ValueError, IndexError):
        return None
    return ClassPolynomial(d, coeffs)


# ---------------------------------------------------------------------------
# polynomial arithmetic over Z/nZ (dense ascending coefficient lists)


def _ptrim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(u: list[int], v: list[int], n: int) -> list[int]:
    if not u or not v:
        return []
    out = [0] * (len(u) + len(v) - 1)
    for i, ui in enumerate(u):
        if ui:
            for k, vk in enumerate(v):
                out[i + k] = (out[i + k] + ui * vk) % n
    return _ptrim(out)


def _pmod(u: list[int], f: list[int], n: int) -> list[int]:
    """u mod f for monic f."""
    u = u[:]
    df = len(f) - 1
    while len(u) - 1 >= df and u:
        lead = u[-1]
        shift = len(u) - 1 - df
        if lead:
            for i in range(df + 1):
                u[shift + i] = (u[shift + i] - lead * f[i]) % n
        u.pop()
        _ptrim(u)
    return u


def _pmonic(p: list[int], n: int) -> list[int]:
    inv = checked_inverse(p[-1], n)
    return [c * inv % n for c in p]


def _pgcd(u: list[int], v: list[int], n: int) -> list[int]:
    u, v = _ptrim(u[:]), _ptrim(v[:])
    while v:
        v = _pmonic(v, n)
        u, v = v, _pmod(u, v, n)
    return _pmonic(u, n) if u else u


def _pdiv_exact(u: list[int], f: list[int], n: int) -> list[int]:
    """u / f for monic f dividing u exactly."""
    u = u[:]
    df = len(f) - 1
    q = [0] * (len(u) - df)
    for shift in range(len(u) - 1 - df, -1, -1):
        lead = u[shift + df]
        q[shift] = lead
        if lead:
            for i in range(df + 1):
                u[shift + i] = (u[shift + i] - lead * f[i]) % n
    return _ptrim(q)


def _ppowmod(base: list[int], e: int, f: list[int], n: int) -> list[int]:
    result = [1]
    acc = _pmod(base, f, n)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, acc, n), f, n)
        e >>= 1
        if e:
            acc = _pmod(_pmul(acc, acc, n), f, n)
    return result


def poly_eval_mod(coeffs: list[int], x: int, n: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % n
    return acc


def root_mod(poly: ClassPolynomial, n: int, rng: random.Random | None = None) -> int:
    """One root of the class polynomial modulo the probable prime n.

    Splits off the product of linear factors with x^n - x, then isolates
    a single root by randomised equal-degree splitting.  Any impossible
    arithmetic along the way (a gcd exposing a factor of n, or no root at
    all) raises CompositeDetected: for prime n a root must exist whenever
    the discriminant passed the splitting test.
    """
    if n % 2 == 0 or n < 3:
        raise ValueError("root_mod: modulus must be odd and >= 3")
    rng = rng if rng is not None else random.Random()
    f = _ptrim([c % n for c in poly.coeffs])
    if len(f) < 2:
        raise CompositeDetected("degenerate-class-poly", n=n)
    f = _pmonic(f, n)
    if len(f) == 2:
        return -f[0] % n
    xn = _ppowmod([0, 1], n, f, n)
    g = _pgcd([(a - b) % n for a, b in _zip_sub(xn, [0, 1])], f, n)
    if len(g) < 2:
        raise CompositeDetected("class-poly-has-no-root", n=n)
    for _ in range(64):
        if len(g) == 2:
            root = -g[0] % n
            if poly_eval_mod(f, root, n) != 0:
                raise CompositeDetected("root-check-failed", n=n)
            return root
        delta = rng.randrange(n)
        t = _ppowmod([delta, 1], (n - 1) // 2, g, n)
        t = _ptrim([(c - (1 if i == 0 else 0)) % n for i, c in enumerate(_pad(t, 1))])
        d = _pgcd(t, g, n)
        if 1 < len(d) < len(g):
            g = d if len(d) * 2 <= len(g) + 1 else _pdiv_exact(g, d, n)
    raise CompositeDetected("equal-degree-split-stalled", n=n)


def _pad(p: list[int], min_len: int) -> list[int]:
    return p + [0] * (min_len - len(p)) if len(p) < min_len else p


def _zip_sub(u: list[int], v: list[int]):
    ln = max(len(u), len(v))
    u = _pad(u[:], ln)
    v = _pad(v[:], ln)
    return zip(u, v)
