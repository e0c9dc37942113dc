"""Bitstream contract of the deterministic random generator."""

import numpy as np

from ghostmg.rng import XorShift64Star

MASK = (1 << 64) - 1

# frozen first outputs; any drift in seeding or stepping breaks reproducibility
SEED42_U64 = (3580622183945639842, 10378725325292465923, 8967075514996744559)
SEED0_U64 = (8916199331640804048, 16032783972208265725)
SEED42_SYM = (
    -0.6117881649316348,
    0.12526365453124133,
    -0.027787724579895645,
    -0.457788878794563,
)


def reference_stream(seed, n):
    """Straight-line xorshift64* with splitmix64 seeding, python ints only."""

    def splitmix(x):
        x = (x + 0x9E3779B97F4A7C15) & MASK
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return x, z ^ (z >> 31)

    carry, state = splitmix(seed & MASK)
    if state == 0:
        _, state = splitmix(carry)
    out = []
    for _ in range(n):
        state ^= state >> 12
        state = (state ^ (state << 25)) & MASK
        state ^= state >> 27
        out.append((state * 2685821657736338717) & MASK)
    return out


def test_frozen_u64_outputs():
    rng = XorShift64Star(42)
    assert tuple(rng.next_u64() for _ in range(3)) == SEED42_U64
    rng = XorShift64Star(0)
    assert tuple(rng.next_u64() for _ in range(2)) == SEED0_U64


def test_matches_independent_reimplementation():
    for seed in (0, 1, 42, 2**63 + 17):
        rng = XorShift64Star(seed)
        got = [rng.next_u64() for _ in range(50)]
        assert got == reference_stream(seed, 50)


def test_uniform_symmetric_values_and_order():
    rng = XorShift64Star(42)
    values = rng.uniform_symmetric(4)
    assert values.dtype == np.float64
    np.testing.assert_allclose(values, SEED42_SYM, rtol=0, atol=0)
    # one draw per entry, in stream order
    rng2 = XorShift64Star(42)
    singles = [2.0 * rng2.uniform() - 1.0 for _ in range(4)]
    np.testing.assert_allclose(values, singles, rtol=0, atol=0)


def test_uniform_ranges():
    rng = XorShift64Star(7)
    u = np.array([rng.uniform() for _ in range(2000)])
    assert np.all((0.0 <= u) & (u < 1.0))
    s = XorShift64Star(7).uniform_symmetric(2000)
    assert np.all((-1.0 < s) & (s < 1.0))
    # both halves get visited
    assert (s < 0).any() and (s > 0).any()


def test_same_seed_same_stream():
    a = XorShift64Star(123).uniform_symmetric(64)
    b = XorShift64Star(123).uniform_symmetric(64)
    np.testing.assert_array_equal(a, b)
    c = XorShift64Star(124).uniform_symmetric(64)
    assert not np.array_equal(a, c)
