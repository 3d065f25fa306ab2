#include "fidsus/basis.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fidsus;

TEST(Basis, SectorDimensions) {
  EXPECT_EQ(FockBasis(10, 5, 5).dim(), 63504u);  // C(10,5)^2
  EXPECT_EQ(FockBasis(4, 2, 2).dim(), 36u);
  EXPECT_EQ(FockBasis(2, 1, 1).dim(), 4u);
  EXPECT_EQ(FockBasis(1, 0, 0).dim(), 1u);
  EXPECT_EQ(FockBasis(6, 0, 6).dim(), 1u);
}

TEST(Basis, ArgumentValidation) {
  EXPECT_THROW(FockBasis(0, 0, 0), ArgumentError);
  EXPECT_THROW(FockBasis(33, 1, 1), ArgumentError);
  EXPECT_THROW(FockBasis(4, 5, 0), ArgumentError);
  EXPECT_THROW(FockBasis(4, -1, 0), ArgumentError);
  EXPECT_THROW(FockBasis(32, 16, 16), SizingError);  // ~3.6e17 states
}

TEST(Basis, OrderingAndIndexRoundTrip) {
  const FockBasis basis(6, 3, 3);
  ASSERT_EQ(basis.dim(), 400u);
  std::uint64_t prev_key = 0;
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const Config c = basis.state(i);
    EXPECT_EQ(std::popcount(c.up), 3);
    EXPECT_EQ(std::popcount(c.dn), 3);
    const std::uint64_t key = (std::uint64_t{c.up} << 6) | c.dn;
    if (i > 0) EXPECT_LT(prev_key, key);
    prev_key = key;
    EXPECT_EQ(basis.index_of(c), i);
  }
  EXPECT_THROW(basis.index_of(Config{0b111000, 0b110000}), ArgumentError);
}

TEST(Hop, MovesAndSigns) {
  // Adjacent move, nothing in between.
  auto r = hop(Config{0b01, 0}, 2, 1, 0, Spin::up);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->first.up, 0b10u);
  EXPECT_EQ(r->second, 1);

  // Occupation below the moved pair does not enter the sign.
  r = hop(Config{0b101, 0}, 3, 1, 2, Spin::up);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->first.up, 0b011u);
  EXPECT_EQ(r->second, 1);

  // One electron strictly between sites 1 and 4 -> sign flips.
  r = hop(Config{0b01011, 0}, 5, 4, 1, Spin::up);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->first.up, 0b11001u);
  EXPECT_EQ(r->second, -1);

  // Down-spin moves ignore the up word entirely.
  r = hop(Config{0b11111, 0b00001}, 5, 3, 0, Spin::dn);
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->first.dn, 0b01000u);
  EXPECT_EQ(r->first.up, 0b11111u);
  EXPECT_EQ(r->second, 1);
}

TEST(Hop, BlockedAndInvalid) {
  EXPECT_FALSE(hop(Config{0b00, 0}, 2, 1, 0, Spin::up).has_value());  // source empty
  EXPECT_FALSE(hop(Config{0b11, 0}, 2, 1, 0, Spin::up).has_value());  // target occupied
  EXPECT_THROW(hop(Config{0b01, 0}, 2, 2, 0, Spin::up), ArgumentError);
  EXPECT_THROW(hop(Config{0b01, 0}, 2, -1, 0, Spin::up), ArgumentError);
  EXPECT_THROW(hop(Config{0b01, 0}, 2, 1, 1, Spin::up), ArgumentError);
}

// c^dag_i c_j and c^dag_j c_i are adjoint: the reverse move exists and
// carries the same sign.
TEST(Hop, HermiticityProperty) {
  const FockBasis basis(6, 3, 3);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick_state(0, basis.dim() - 1);
  std::uniform_int_distribution<int> pick_site(0, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    const Config c = basis.state(pick_state(rng));
    const int i = pick_site(rng), j = pick_site(rng);
    if (i == j) continue;
    for (Spin s : {Spin::up, Spin::dn}) {
      if (auto fwd = hop(c, 6, i, j, s)) {
        const auto back = hop(fwd->first, 6, j, i, s);
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(back->first, c);
        EXPECT_EQ(back->second, fwd->second);
      }
    }
  }
}
