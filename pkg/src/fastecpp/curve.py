"""Elliptic curves over Z/NZ tolerant of composite moduli.

Two arithmetic flavours coexist.  `scalar_mul` works on Jacobian
projective points with no per-step inversion, the fast path for the
prover's trial multiplications.  `scalar_mul_checked` works on affine
points with every inversion validated, so a divergence between the prime
factors of a composite modulus cannot pass silently; the certificate
verifier uses only this path.
"""

import math
import random
from dataclasses import dataclass

from .errors import CompositeDetected
from .numth import checked_inverse, jacobi, sqrt_mod


@dataclass(frozen=True)
class Curve:
    """y^2 = x^3 + a x + b over Z/nZ."""

    n: int
    a: int
    b: int

    def discriminant_gcd(self) -> int:
        return math.gcd((4 * self.a**3 + 27 * self.b**2) % self.n, self.n)


def validate_curve(e: Curve) -> None:
    """Reject singular curves; a proper gcd is composite evidence."""
    g = e.discriminant_gcd()
    if g == 1:
        return
    if 1 < g < e.n:
        raise CompositeDetected("gcd-factor", factor=g, n=e.n)
    raise ValueError("singular curve")


@dataclass(frozen=True)
class Point:
    """Jacobian projective point (X : Y : Z); Z = 0 is the identity."""

    x: int
    y: int
    z: int

    @staticmethod
    def identity() -> "Point":
        return Point(1, 1, 0)

    @staticmethod
    def from_affine(x: int, y: int) -> "Point":
        return Point(x, y, 1)

    def is_identity(self) -> bool:
        return self.z == 0

    def to_affine(self, n: int) -> tuple[int, int] | None:
        """Normalise; None for the identity, checked inversion otherwise."""
        if self.z == 0:
            return None
        zinv = checked_inverse(self.z, n)
        z2 = zinv * zinv % n
        return self.x * z2 % n, self.y * z2 % n * zinv % n


def _double(p: Point, e: Curve) -> Point:
    n = e.n
    if p.z == 0 or p.y % n == 0:
        return Point.identity()
    ysq = p.y * p.y % n
    s = 4 * p.x * ysq % n
    z2 = p.z * p.z % n
    m = (3 * p.x * p.x + e.a * z2 * z2) % n
    x3 = (m * m - 2 * s) % n
    y3 = (m * (s - x3) - 8 * ysq * ysq) % n
    z3 = 2 * p.y * p.z % n
    return Point(x3, y3, z3)


def _add(p: Point, q: Point, e: Curve) -> Point:
    n = e.n
    if p.z == 0:
        return q
    if q.z == 0:
        return p
    z1s, z2s = p.z * p.z % n, q.z * q.z % n
    u1, u2 = p.x * z2s % n, q.x * z1s % n
    s1 = p.y * z2s % n * q.z % n
    s2 = q.y * z1s % n * p.z % n
    h = (u2 - u1) % n
    r = (s2 - s1) % n
    if h == 0:
        if r == 0:
            return _double(p, e)
        return Point.identity()
    h2 = h * h % n
    h3 = h2 * h % n
    u1h2 = u1 * h2 % n
    x3 = (r * r - h3 - 2 * u1h2) % n
    y3 = (r * (u1h2 - x3) - s1 * h3) % n
    z3 = p.z * q.z % n * h % n
    return Point(x3, y3, z3)


def scalar_mul(p: Point, k: int, e: Curve) -> Point:
    """[k]P on Jacobian coordinates (left-to-right binary ladder)."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    if k == 0 or p.z == 0:
        return Point.identity()
    acc = p
    for bit in bin(k)[3:]:
        acc = _double(acc, e)
        if bit == "1":
            acc = _add(acc, p, e)
    return acc


# ---------------------------------------------------------------------------
# checked affine arithmetic (verification grade)

Affine = tuple[int, int] | None  # None is the identity


def _add_affine_checked(p: Affine, q: Affine, e: Curve) -> Affine:
    """Chord-tangent addition with every inversion validated.

    For composite n, a pair of points that collide modulo one prime
    factor but not another surfaces here as a proper gcd and raises
    CompositeDetected rather than producing garbage.
    """
    n = e.n
    if p is None:
        return q
    if q is None:
        return p
    x1, y1 = p
    x2, y2 = q
    if (x1 - x2) % n == 0:
        if (y1 + y2) % n == 0:
            return None
        if (y1 - y2) % n == 0:
            lam = (3 * x1 * x1 + e.a) * checked_inverse(2 * y1, n) % n
        else:
            # same x yet y2 not +/- y1: impossible modulo a prime
            g = math.gcd((y1 - y2) % n, n)
            raise CompositeDetected("gcd-factor", factor=g if 1 < g < n else None, n=n)
    else:
        lam = (y2 - y1) * checked_inverse((x2 - x1) % n, n) % n
    x3 = (lam * lam - x1 - x2) % n
    y3 = (lam * (x1 - x3) - y1) % n
    return (x3, y3)


def scalar_mul_checked(p: Affine, k: int, e: Curve) -> Affine:
    """[k]P in affine coordinates, sound for composite moduli."""
    if k < 0:
        raise ValueError("scalar must be non-negative")
    acc: Affine = None
    if p is None:
        return None
    for bit in bin(k)[2:] if k else "":
        acc = _add_affine_checked(acc, acc, e)
        if bit == "1":
            acc = _add_affine_checked(acc, p, e)
    return acc


def is_on_curve(p: Affine, e: Curve) -> bool:
    if p is None:
        return True
    x, y = p
    return (y * y - (x * x * x + e.a * x + e.b)) % e.n == 0


# ---------------------------------------------------------------------------
# CM curve families

def _smallest_nonresidue(n: int) -> int:
    for c in range(2, 10_000):
        j = jacobi(c, n)
        if j == -1:
            return c
        if j == 0:
            g = math.gcd(c, n)
            raise CompositeDetected("gcd-factor", factor=g if 1 < g < n else None, n=n)
    raise CompositeDetected("no-nonresidue-found", n=n)


def _smallest_sextic_generator(n: int) -> int:
    """Smallest element that is both a non-square and a non-cube.

    For prime n = 1 (mod 3) its class generates the order-6 group of
    sextic twist cosets, so its powers 0..5 cover every coset.
    """
    e = (n - 1) // 3
    for c in range(2, 10_000):
        if jacobi(c, n) == -1 and pow(c, e, n) != 1:
            return c
    raise CompositeDetected("no-sextic-generator-found", n=n)


def curves_from_j(j0: int, n: int) -> list[Curve]:
    """The CM curves with j-invariant j0 over Z/nZ, twists included.

    Generic j0 gives the curve (3k, 2k) with k = j0/(1728 - j0) and its
    quadratic twist.  j0 = 0 yields six sextic twists y^2 = x^3 + b and
    j0 = 1728 four quartic twists y^2 = x^3 + a x, with twisting
    constants chosen deterministically from the smallest non-residue
    (and smallest non-cube for the sextic family).
    """
    j0 %= n
    if j0 == 0:
        if n % 3 == 1:
            g = _smallest_sextic_generator(n)
        else:
            g = _smallest_nonresidue(n)  # only two real twist classes here
        bs = [pow(g, i, n) for i in range(6)]
        return [Curve(n, 0, b) for b in bs]
    if j0 == 1728 % n:
        g = _smallest_nonresidue(n)
        return [Curve(n, pow(g, i, n), 0) for i in range(4)]
    k = j0 * checked_inverse((1728 - j0) % n, n) % n
    g = _smallest_nonresidue(n)
    a, b = 3 * k % n, 2 * k % n
    g2, g3 = g * g % n, g * g % n * g % n
    return [Curve(n, a, b), Curve(n, a * g2 % n, b * g3 % n)]


def j_invariant(e: Curve) -> int:
    """1728 * 4a^3 / (4a^3 + 27b^2) mod n."""
    num = 4 * e.a**3 % e.n
    den = (num + 27 * e.b**2) % e.n
    return 1728 * num % e.n * checked_inverse(den, e.n) % e.n


def find_order_point(
    curves: list[Curve],
    m: int,
    c: int,
    nprime: int,
    rng: random.Random,
    tries: int = 8,
) -> tuple[Curve, tuple[int, int], tuple[int, int]] | None:
    """Search the twist list for a point of order nprime.

    Random x-coordinates are completed to points by a modular square
    root; Q = [c]P is accepted when Q is not the identity and [nprime]Q
    is.  Up to `tries` points are spent per curve; a non-identity
    [nprime]Q moves on to the next twist (wrong cardinality).  Returns
    (curve, P, Q) with both points affine, or None when every twist
    failed.  Composite evidence from the arithmetic propagates.
    """
    if m != c * nprime:
        raise ValueError("m must equal c * nprime")
    for e in curves:
        if e.discriminant_gcd() != 1:
            continue
        attempts = 0
        budget = tries * 16
        while attempts < tries and budget > 0:
            budget -= 1
            x = rng.randrange(e.n)
            ysq = (x * x % e.n * x + e.a * x + e.b) % e.n
            if ysq == 0 or jacobi(ysq, e.n) != 1:
                continue
            y = sqrt_mod(ysq, e.n)
            if y is None:
                raise CompositeDetected("sqrt-failed-for-residue", n=e.n)
            attempts += 1
            p = (x, y)
            q = scalar_mul_checked(p, c, e)
            if q is None:
                continue
            r = scalar_mul_checked(q, nprime, e)
            if r is None:
                return e, p, q
            break  # wrong twist: [m]P != identity
    return None
