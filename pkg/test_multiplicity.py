"""
🧪 QTT - Multiplicity Tests
Semiring laws, admissibility and usage vectors
"""

import sys
import unittest
from itertools import product
from pathlib import Path

from hypothesis import given
from hypothesis import strategies as st

# Add src to path for testing
sys.path.insert(0, str(Path(__file__).parent / "src"))

from qtt.core.multiplicity import (  # noqa: E402
    OMEGA, ONE, ZERO, Multiplicity, UsageVector, add, admissible, mul, remaining, total,
)

ALL = list(Multiplicity)
mults = st.sampled_from(ALL)


class TestSemiring(unittest.TestCase):
    """Exhaustive checks over all three quantities"""

    def test_addition_table(self):
        """Test addition table"""
        self.assertIs(add(ZERO, ONE), ONE)
        self.assertIs(add(ONE, ONE), OMEGA)
        self.assertIs(add(ONE, OMEGA), OMEGA)
        self.assertIs(add(ZERO, ZERO), ZERO)

    def test_multiplication_table(self):
        """Test multiplication table"""
        self.assertIs(mul(ZERO, OMEGA), ZERO)
        self.assertIs(mul(ONE, ONE), ONE)
        self.assertIs(mul(OMEGA, OMEGA), OMEGA)
        self.assertIs(mul(ONE, OMEGA), OMEGA)

    def test_monoid_laws(self):
        """Test monoid laws"""
        for a, b, c in product(ALL, repeat=3):
            self.assertIs(add(a, b), add(b, a))
            self.assertIs(mul(a, b), mul(b, a))
            self.assertIs(add(add(a, b), c), add(a, add(b, c)))
            self.assertIs(mul(mul(a, b), c), mul(a, mul(b, c)))
        for a in ALL:
            self.assertIs(add(ZERO, a), a)
            self.assertIs(mul(ONE, a), a)
            self.assertIs(mul(ZERO, a), ZERO)

    def test_distributivity(self):
        """Test distributivity"""
        for a, b, c in product(ALL, repeat=3):
            self.assertIs(mul(a, add(b, c)), add(mul(a, b), mul(a, c)))

    def test_two_definite_uses_exceed_one(self):
        """Test two definite uses exceed one"""
        for a, b in product([ONE, OMEGA], repeat=2):
            self.assertIsNot(add(a, b), ONE)


class TestAdmissible(unittest.TestCase):

    def test_table(self):
        """Test admissibility table"""
        self.assertTrue(admissible(ONE, ONE))
        self.assertFalse(admissible(ONE, OMEGA))
        self.assertFalse(admissible(ONE, ZERO))
        self.assertTrue(admissible(OMEGA, ZERO))
        self.assertTrue(admissible(ZERO, ZERO))
        self.assertFalse(admissible(ZERO, ONE))

    def test_linear_admits_exactly_one_usage(self):
        """Test linear admits exactly one usage"""
        self.assertEqual([u for u in ALL if admissible(ONE, u)], [ONE])

    @given(mults, mults)
    def test_adding_nothing_keeps_admissibility(self, declared, used):
        """Test adding nothing keeps admissibility"""
        if admissible(declared, used):
            self.assertTrue(admissible(declared, add(used, ZERO)))

    def test_remaining(self):
        """Test remaining multiplicity after a use"""
        self.assertIs(remaining(ONE, ZERO), ONE)
        self.assertIs(remaining(ONE, ONE), ZERO)
        self.assertIs(remaining(ZERO, ZERO), ZERO)
        self.assertIs(remaining(OMEGA, OMEGA), OMEGA)

    def test_display(self):
        """Test multiplicity display and literals"""
        self.assertEqual([m.display for m in ALL], ["0", "1", ""])
        self.assertEqual(str(OMEGA), "ω")
        self.assertIs(Multiplicity.from_literal("1"), ONE)
        with self.assertRaises(ValueError):
            Multiplicity.from_literal("2")


class TestUsageVector(unittest.TestCase):

    def test_absent_means_zero(self):
        """Test absent means zero"""
        u = UsageVector({0: ZERO, 1: ONE})
        self.assertIs(u.get(0), ZERO)
        self.assertIs(u.get(7), ZERO)
        self.assertEqual(list(u.items()), [(1, ONE)])

    def test_sum_saturates(self):
        """Test sum saturates"""
        u = UsageVector.single(0, ONE) + UsageVector.single(0, ONE)
        self.assertIs(u.get(0), OMEGA)

    def test_scale_by_zero_empties(self):
        """Test scale by zero empties"""
        u = UsageVector({0: ONE, 2: OMEGA}).scale(ZERO)
        self.assertFalse(u)

    def test_below_and_without(self):
        """Test below and without"""
        u = UsageVector({0: ONE, 1: ONE, 2: OMEGA})
        self.assertEqual(u.below(2), UsageVector({0: ONE, 1: ONE}))
        self.assertEqual(u.without(1), UsageVector({0: ONE, 2: OMEGA}))

    def test_holes_flag_propagates(self):
        """Test holes flag propagates"""
        u = UsageVector.single(0, ONE).with_holes() + UsageVector.empty()
        self.assertTrue(u.has_holes)
        self.assertTrue(total([UsageVector.empty(), u]).has_holes)

    @given(st.lists(st.tuples(st.integers(0, 4), mults), max_size=12))
    def test_total_is_pointwise_add(self, entries):
        """Test total is pointwise add"""
        vectors = [UsageVector.single(level, m) for level, m in entries]
        summed = total(vectors)
        for level in range(5):
            expected = ZERO
            for lv, m in entries:
                if lv == level:
                    expected = add(expected, m)
            self.assertIs(summed.get(level), expected)


if __name__ == "__main__":
    unittest.main()
