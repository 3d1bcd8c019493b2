"""Downrun orchestration: parameter policy, the four-substep candidate
search, curve construction, and the recursive chain down to the
deterministic base case.

One logical coordinator owns the pipeline state; workers only ever
execute homogeneous batches of pure tasks (square roots, Cornacchia
calls, trial-division cells, Miller-Rabin tests), so tasks are idempotent
and could be re-dispatched after a worker loss.
"""

import math
import random
import sys
import time
from dataclasses import dataclass, field

from . import cert as cert_mod
from . import cm, curve, disc, trialdiv
from .errors import CompositeDetected, GiveUp
from .numth import cornacchia, is_probable_prime, sqrt_mod
from .parallel import chunked, derive_seed, ordered_map
from .stats import EULER_GAMMA


@dataclass
class ProveConfig:
    """Knobs for a proving run; defaults target desk scale."""

    workers: int = 1
    seed: int = 0
    b_bits: int = 20                 # smoothness bound 2**b_bits
    range_width_bits: int = 24       # primes per product range
    dmax_cap: int = 1 << 20          # cap on the discriminant bound
    hmax: int = 64                   # largest class number considered
    pmax: int | None = None          # None: max(29, bits // 1024)
    maxparts: int = 3                # signed primes per discriminant
    mr_rounds: int = 64
    point_tries: int = 8             # random points per twist
    round_cap: int = 8
    base_threshold: int = 1 << 64
    batches: int = 16                # trial-division batches
    cache_dir: str | None = None
    verbose: bool = False
    self_verify: bool = True

    def validate(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not (10 <= self.b_bits <= 40):
            raise ValueError("b_bits out of range (10..40)")
        if self.dmax_cap < 16:
            raise ValueError("dmax_cap too small")
        if self.hmax < 1 or self.maxparts < 1 or self.round_cap < 1:
            raise ValueError("hmax, maxparts and round_cap must be >= 1")
        if self.base_threshold < 1 << 16:
            raise ValueError("base_threshold must be at least 2**16")


@dataclass
class StepParams:
    """Resolved parameters for one downrun step."""

    bits: int
    dmax: int
    hmax: int
    pmax: int
    w: int
    b: int
    maxparts: int
    k: int = 0


@dataclass
class Candidate:
    """A fully split curve cardinality: m = c * nprime."""

    entry: disc.Disc
    t: int
    v: int
    m: int
    c: int
    nprime: int


@dataclass
class StepStats:
    index: int
    n_bits: int
    rounds: int = 0
    pool_size: int = 0
    pell_hits: int = 0
    candidates: int = 0
    mr_tested: int = 0
    d: int = 0
    h: int = 0
    nprime_bits: int = 0
    expected: float = 0.0


@dataclass
class RunReport:
    """Aggregated counters and per-substep timing shares for one proof."""

    n: int = 0
    bits: int = 0
    workers: int = 1
    seed: int = 0
    b_bits: int = 20
    wall_seconds: float = 0.0
    substep_seconds: dict = field(default_factory=dict)
    steps: list = field(default_factory=list)

    def add_time(self, name: str, seconds: float) -> None:
        self.substep_seconds[name] = self.substep_seconds.get(name, 0.0) + seconds

    def bit_gains(self) -> list[int]:
        return [s.n_bits - s.nprime_bits for s in self.steps]

    def to_text(self) -> str:
        lines = [
            "fastecpp run report v1",
            f"n {self.n}",
            f"bits {self.bits}",
            f"digits {len(str(self.n))}",
            f"workers {self.workers}",
            f"seed {self.seed}",
            f"b_bits {self.b_bits}",
            f"steps {len(self.steps)}",
            f"wall_seconds {self.wall_seconds:.3f}",
        ]
        gains = self.bit_gains()
        if gains:
            mean = sum(gains) / len(gains)
            lines.append(f"mean_bit_gain_per_step {mean:.2f}")
            lines.append(f"mean_bit_gain_over_log2B {mean / self.b_bits:.3f}")
        total = sum(self.substep_seconds.values()) or 1.0
        for name in sorted(self.substep_seconds):
            sec = self.substep_seconds[name]
            lines.append(f"substep {name} seconds={sec:.3f} percent={100 * sec / total:.1f}")
        for s in self.steps:
            lines.append(
                f"step index={s.index} bits={s.n_bits} rounds={s.rounds} "
                f"pool={s.pool_size} pell_hits={s.pell_hits} candidates={s.candidates} "
                f"mr_tested={s.mr_tested} D={s.d} h={s.h} nprime_bits={s.nprime_bits}"
            )
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="ascii") as f:
            f.write(self.to_text())


def dmax_formula(bits: int) -> int:
    """Smallest power of two at or above min(2^35, max(2^20, L^2 / 2))."""
    v = min(1 << 35, max(1 << 20, bits * bits // 2))
    return 1 << (v - 1).bit_length()


def select_params(n: int, w: int, config: ProveConfig | None = None) -> StepParams:
    """Deterministic step parameters for modulus n and w workers."""
    config = config or ProveConfig()
    if w < 1:
        raise ValueError("w must be >= 1")
    bits = n.bit_length()
    dmax = min(dmax_formula(bits), config.dmax_cap)
    pmax = config.pmax if config.pmax is not None else max(29, bits >> 10)
    return StepParams(
        bits=bits,
        dmax=dmax,
        hmax=config.hmax,
        pmax=pmax,
        w=w,
        b=1 << config.b_bits,
        maxparts=config.maxparts,
    )


def expected_candidates(entries: list[disc.Disc], bits: int, b: int) -> float:
    """Plug-in estimate of surviving probable primes from these discriminants.

    Per discriminant: Pell solvability of the order of 1 / sqrt(|D|),
    two cardinalities each, and a prime-after-smooth-part chance of
    e^gamma * log2(B) / L.
    """
    if not entries:
        return 0.0
    prime_rate = math.exp(EULER_GAMMA) * math.log2(b) / bits
    return sum(2.0 * prime_rate / math.sqrt(-e.d) for e in entries)


def choose_k(
    n: int,
    pool: list[tuple[int, disc.Disc]],
    rnd: int,
    w: int,
    b: int,
) -> tuple[int, bool]:
    """Minimal roots-per-worker k reaching the expected-survivor target.

    `pool` pairs each candidate discriminant with its rank: the highest
    position among its signed primes in the split-prime ordering.  The
    target is 3 expected survivors in round 1 (so there is some choice)
    and 1 in later rounds.  Returns (k, exhausted); when even the whole
    pool falls short, k covers all of it and exhausted is True.
    """
    bits = n.bit_length()
    threshold = 3.0 if rnd <= 1 else 1.0
    prime_rate = math.exp(EULER_GAMMA) * math.log2(b) / bits
    by_rank = sorted(pool, key=lambda re: re[0])
    acc = 0.0
    for rank, entry in by_rank:
        acc += 2.0 * prime_rate / math.sqrt(-entry.d)
        if acc >= threshold:
            return rank // w + 1, False
    max_rank = by_rank[-1][0] if by_rank else 0
    return max_rank // w + 1, True


def exceeds_quartic_floor(nprime: int, n: int) -> bool:
    """nprime > (n^(1/4) + 1)^2, evaluated in exact integer arithmetic."""
    u = math.isqrt(nprime)
    return u >= 2 and (u - 1) ** 4 > n


class Environment:
    """Shared read-only tables: class numbers, prime products, poly memo."""

    def __init__(self, config: ProveConfig):
        self.config = config
        self.table: disc.ClassNumberTable | None = None
        self.products: list[trialdiv.PrimeProduct] = []
        self.poly_memo: dict[int, cm.ClassPolynomial] = {}

    def ensure_table(self, dmax: int, workers: int) -> disc.ClassNumberTable:
        if self.table is None or self.table.dmax < dmax:
            self.table = disc.cached_class_number_table(
                dmax, workers, self.config.cache_dir
            )
        return self.table

    def ensure_products(self, b: int) -> list[trialdiv.PrimeProduct]:
        if not self.products or self.products[-1].b_hi != b:
            width = 1 << self.config.range_width_bits
            spans = []
            lo = 1
            while lo < b:
                hi = min(lo + width, b)
                spans.append((lo, hi))
                lo = hi
            self.products = [
                trialdiv.prime_product(lo, hi, self.config.cache_dir)
                for lo, hi in spans
            ]
        return self.products

    def class_poly(self, d: int) -> cm.ClassPolynomial:
        poly = self.poly_memo.get(d)
        if poly is None:
            poly = cm.hilbert_class_poly(d, self.config.cache_dir)
            self.poly_memo[d] = poly
        return poly


class _Progress:
    def __init__(self, enabled: bool, stream=None):
        self.enabled = enabled
        self.stream = stream or sys.stderr

    def line(self, text: str) -> None:
        if self.enabled:
            print(text, file=self.stream, flush=True)


def _timed(report: RunReport, name: str):
    class _Timer:
        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.seconds = time.perf_counter() - self.t0
            report.add_time(name, self.seconds)

    return _Timer()


_UNIVERSE_CAP = 4096


def run_step(
    n: int,
    params: StepParams,
    step_seed: int,
    config: ProveConfig,
    env: Environment,
    report: RunReport,
    progress: _Progress,
    step_index: int = 0,
) -> cert_mod.CertStep:
    """One downrun step: find (D, t, m = c * N'), then the curve and point.

    Substeps: split-prime square roots, Cornacchia over every reachable
    pool discriminant, batched trial division with the quartic-root floor,
    Miller-Rabin by ascending N' keeping the smallest survivor, then the
    class polynomial, a root mod N, and a point of order N'.  Rounds widen
    the signed-prime budget until the cap, then GiveUp.
    """
    table = env.ensure_table(params.dmax, config.workers)
    products = env.ensure_products(params.b)
    stats = StepStats(index=step_index, n_bits=params.bits)
    report.steps.append(stats)

    stream = disc.signed_prime_stream(n)
    universe: list[disc.SignedPrime] = []
    roots: dict[int, int] = {}
    tried: set[int] = set()
    budget_prev = 0

    def ensure_universe(count: int) -> None:
        while len(universe) < min(count, _UNIVERSE_CAP):
            universe.append(next(stream))

    for rnd in range(1, config.round_cap + 1):
        stats.rounds = rnd
        # --- substep 1: choose k, compute square roots ------------------
        with _timed(report, "roots") as tm:
            ensure_universe(max(params.w, 16))
            while True:
                rank_of = {sp.qstar: i for i, sp in enumerate(universe)}
                entries = disc.enumerate_pool_discs(
                    [sp.qstar for sp in universe],
                    table,
                    params.dmax,
                    params.hmax,
                    params.pmax,
                    params.maxparts,
                )
                ranked = [(max(rank_of[q] for q in e.parts), e) for e in entries]
                k, exhausted = choose_k(n, ranked, rnd, params.w, params.b)
                if not exhausted or len(universe) >= _UNIVERSE_CAP:
                    break
                ensure_universe(len(universe) * 2)
            params.k = k
            budget = max(k * params.w, 2 * budget_prev if rnd > 1 else 0)
            budget = min(budget, len(universe))
            budget_prev = budget
            new_qs = [sp for sp in universe[:budget] if sp.qstar not in roots]

            def root_of(sp: disc.SignedPrime) -> tuple[int, int]:
                r = sqrt_mod(sp.qstar, n)
                if r is None:
                    raise CompositeDetected("sqrt-failed-for-residue", n=n)
                return sp.qstar, r

            for qs, r in ordered_map(root_of, new_qs, config.workers):
                roots[qs] = r
            reachable = [e for rank, e in ranked if rank < budget]
            stats.expected = expected_candidates(reachable, params.bits, params.b)
        progress.line(
            f"step {step_index} round {rnd} roots: k={k} budget={budget} "
            f"expected_nprime={stats.expected:.2f} time={tm.seconds:.3f}s"
        )

        # --- substep 2: Cornacchia over all new reachable discriminants --
        with _timed(report, "cornacchia") as tm:
            root_sub = {sp.qstar: roots[sp.qstar] for sp in universe[:budget]}
            pool = disc.build_pool(
                n, root_sub, table, params.dmax, params.hmax, params.pmax,
                params.maxparts,
            )
            stats.pool_size = len(pool)
            fresh = [e for e in pool if e.d not in tried]
            tried.update(e.d for e in fresh)

            sols = ordered_map(
                lambda e: (e, cornacchia(n, e.d, e.root)), fresh, config.workers
            )
            hits = [(e, tv) for e, tv in sols if tv is not None]
            stats.pell_hits += len(hits)
        progress.line(
            f"step {step_index} round {rnd} cornacchia: discs={len(fresh)} "
            f"hits={len(hits)} time={tm.seconds:.3f}s"
        )

        # --- substep 3: batched trial division ---------------------------
        with _timed(report, "trialdiv") as tm:
            skeletons = []
            for e, (t, v) in hits:
                for m in {n + 1 - t, n + 1 + t}:
                    skeletons.append((e, t, v, m))
            splits = trialdiv.batch_factor(
                [m for (_, _, _, m) in skeletons],
                products,
                batches=config.batches,
                workers=config.workers,
            )
            candidates = []
            for (e, t, v, m), sp in zip(skeletons, splits):
                if sp.c >= 2 and exceeds_quartic_floor(sp.nprime, n):
                    candidates.append(Candidate(e, t, v, m, sp.c, sp.nprime))
            candidates.sort(key=lambda cand: cand.nprime)
            stats.candidates += len(candidates)
        progress.line(
            f"step {step_index} round {rnd} trialdiv: ms={len(skeletons)} "
            f"candidates={len(candidates)} time={tm.seconds:.3f}s"
        )

        # --- substep 4 + phase 2: Miller-Rabin, then curves ---------------
        mr_time = 0.0
        for batch_no, batch in enumerate(chunked(candidates, params.w)):
            t0 = time.perf_counter()

            def mr(item: tuple[int, Candidate]) -> bool:
                idx, cand = item
                rng = random.Random(derive_seed(step_seed, "mr", rnd, idx))
                return is_probable_prime(cand.nprime, config.mr_rounds, rng)

            base = batch_no * params.w
            flags = ordered_map(mr, list(enumerate(batch, base)), config.workers)
            stats.mr_tested += len(batch)
            mr_time += time.perf_counter() - t0
            for idx, (cand, ok) in enumerate(zip(batch, flags), base):
                if not ok:
                    continue
                step = _phase2(n, cand, step_seed, (rnd, idx), config, env, report, progress, step_index)
                if step is not None:
                    report.add_time("mr", mr_time)
                    stats.d = cand.entry.d
                    stats.h = cand.entry.h
                    stats.nprime_bits = cand.nprime.bit_length()
                    progress.line(
                        f"step {step_index} round {rnd} mr: tested={stats.mr_tested} "
                        f"retained={cand.nprime} time={mr_time:.3f}s"
                    )
                    return step
        report.add_time("mr", mr_time)
        progress.line(
            f"step {step_index} round {rnd} mr: tested={stats.mr_tested} "
            f"retained=none time={mr_time:.3f}s"
        )

    raise GiveUp(f"round cap {config.round_cap} reached for N with {params.bits} bits")


def _phase2(
    n: int,
    cand: Candidate,
    step_seed: int,
    tag: tuple,
    config: ProveConfig,
    env: Environment,
    report: RunReport,
    progress: _Progress,
    step_index: int,
) -> cert_mod.CertStep | None:
    """Class polynomial, root extraction and order-N' point for one candidate."""
    d = cand.entry.d
    with _timed(report, "classpoly"):
        poly = env.class_poly(d)
    with _timed(report, "rootmod") as tm_root:
        rng = random.Random(derive_seed(step_seed, "rootmod", *tag))
        j0 = cm.root_mod(poly, n, rng)
    with _timed(report, "point") as tm_point:
        twists = curve.curves_from_j(j0, n)
        rng = random.Random(derive_seed(step_seed, "point", *tag))
        found = curve.find_order_point(
            twists, cand.m, cand.c, cand.nprime, rng, tries=config.point_tries
        )
    if found is None:
        progress.line(
            f"step {step_index} phase2: D={d} h={cand.entry.h} outcome=failure"
        )
        return None
    e, p, _q = found
    progress.line(
        f"step {step_index} phase2: D={d} h={cand.entry.h} root={tm_root.seconds:.3f}s "
        f"point={tm_point.seconds:.3f}s outcome=ok"
    )
    return cert_mod.CertStep(
        n=n, d=d, t=cand.t, m=cand.m, c=cand.c, nprime=cand.nprime,
        a=e.a, b=e.b, px=p[0], py=p[1],
    )


def prove_with_report(
    n: int,
    config: ProveConfig | None = None,
    env: Environment | None = None,
) -> tuple[cert_mod.Certificate, RunReport]:
    """Prove n prime; returns the certificate and the run report.

    Raises CompositeDetected when any stage proves n composite and GiveUp
    when resource limits are hit first.
    """
    config = config or ProveConfig()
    config.validate()
    if not isinstance(n, int) or n < 2:
        raise ValueError("n must be an integer >= 2")
    env = env or Environment(config)
    report = RunReport(
        n=n, bits=n.bit_length(), workers=config.workers, seed=config.seed,
        b_bits=config.b_bits,
    )
    progress = _Progress(config.verbose)
    t_start = time.perf_counter()

    if n % 2 == 0 and n != 2:
        raise CompositeDetected("even", factor=2, n=n)
    if n < config.base_threshold:
        if not is_probable_prime(n):
            raise CompositeDetected("mr-witness", n=n)
        certificate = cert_mod.Certificate([], n)
        report.wall_seconds = time.perf_counter() - t_start
        return certificate, report

    rng = random.Random(derive_seed(config.seed, "subject", n))
    if not is_probable_prime(n, config.mr_rounds, rng):
        raise CompositeDetected("mr-witness", n=n)

    steps: list[cert_mod.CertStep] = []
    current = n
    level = 0
    while current >= config.base_threshold:
        params = select_params(current, config.workers, config)
        step_seed = derive_seed(config.seed, "step", level)
        step = run_step(
            current, params, step_seed, config, env, report, progress, level
        )
        steps.append(step)
        current = step.nprime
        level += 1
    if not is_probable_prime(current):  # deterministic below the threshold
        raise CompositeDetected("mr-witness", n=current)
    certificate = cert_mod.Certificate(steps, current)
    report.wall_seconds = time.perf_counter() - t_start

    if config.self_verify:
        res = cert_mod.verify(certificate, config.workers)
        if not res:
            raise RuntimeError(
                f"internal error: generated certificate failed verification "
                f"({res.reason} at step {res.step_index})"
            )
    return certificate, report


def prove(n: int, config: ProveConfig | None = None, env: Environment | None = None) -> cert_mod.Certificate:
    """Prove n prime and return the certificate chain."""
    certificate, _ = prove_with_report(n, config, env)
    return certificate


def first_probable_prime_after(x: int, rounds: int = 64, rng: random.Random | None = None) -> int:
    """Smallest probable prime strictly greater than x."""
    cand = x + 1
    if cand <= 2:
        return 2
    if cand % 2 == 0:
        cand += 1
    while not is_probable_prime(cand, rounds, rng):
        cand += 2
    return cand
