"""Smooth-part extraction with product and remainder trees, step by step.

Run: python3 demo/batch_trial_division.py
"""

import random

from fastecpp import trialdiv

# the product of all primes up to B replaces B individual trial divisions
B = 1 << 14
pp = trialdiv.prime_product(1, B)
print(f"P = product of primes <= 2^14: {pp.nbits} bits")

# one remainder tree delivers P mod m for a whole batch of m at once
rng = random.Random(0)
ms = [rng.getrandbits(96) | (1 << 95) | 1 for _ in range(8)]
rems = trialdiv.remainder_tree(pp.value, ms)
for m, r in zip(ms, rems):
    assert r == pp.value % m

# the iterated-gcd ladder then peels off the full smooth part:
# gcd(m, P mod m) catches each shared prime once, the following gcds
# catch higher powers until nothing is left
m = 2**7 * 3**4 * 10_000_019  # 10000019 is prime and above B
split = trialdiv.smooth_split(m, pp.value % m, pp.value)
print(f"\nm = 2^7 * 3^4 * 10000019 = {m}")
print(f"smooth part c = {split.c} (= 2^7 * 3^4 = {2**7 * 3**4})")
print(f"rough part N' = {split.nprime}")

# batch mode: many m against several contiguous prime ranges, split across
# workers in two dimensions, same result as one big product
products = [trialdiv.prime_product(1, 1 << 13), trialdiv.prime_product(1 << 13, B)]
splits = trialdiv.batch_factor(ms, products, batches=4, workers=4)
single = trialdiv.batch_factor(ms, [pp])
assert [(s.c, s.nprime) for s in splits] == [(s.c, s.nprime) for s in single]
print(f"\nbatch_factor over 2 ranges x 4 batches matches the single-product run")
for m, s in zip(ms, splits):
    print(f"  m ({m.bit_length()} bits): c = {s.c}, N' has {s.nprime.bit_length()} bits")

# the tree code releases memory as it descends: peak stays near 2 |P|
meter = trialdiv.MemoryMeter()
many = [rng.getrandbits(128) | (1 << 127) | 1 for _ in range(400)]
trialdiv.remainder_tree(pp.value, many, meter=meter)
print(f"\npeak live tree bits: {meter.peak} "
      f"(2 * |P| + leaves = {2 * pp.nbits + sum(m.bit_length() for m in many)})")
