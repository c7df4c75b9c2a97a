#include <gtest/gtest.h>

#include <sstream>

#include "rlin/gadgets.hpp"

using namespace rlin;

namespace {

// Inner product computed from the bits directly, x as the first half.
bool ip_direct(std::uint32_t in, int t) {
  std::uint32_t x = in >> t, y = in & ((1u << t) - 1);
  return std::popcount(x & y) & 1;
}

}  // namespace

TEST(MakeIp, Examples) {
  Gadget g = make_ip(4);
  EXPECT_TRUE(g(0b1010));
  EXPECT_EQ(g.preimages(false).size(), 10u);
  EXPECT_EQ(make_ip(8).preimages(false).size(), 136u);
  EXPECT_THROW(make_ip(5), std::invalid_argument);
  EXPECT_THROW(make_ip(0), std::invalid_argument);
}

TEST(MakeIp, ZeroCountFormula) {
  for (int t = 1; t <= 6; ++t) {
    Gadget g = make_ip(2 * t);
    std::size_t zeros = 0;
    for (std::uint32_t in = 0; in < (1u << (2 * t)); ++in) {
      EXPECT_EQ(g(in), ip_direct(in, t));
      zeros += ip_direct(in, t) ? 0 : 1;
    }
    EXPECT_EQ(g.preimages(false).size(), zeros);
    EXPECT_EQ(zeros, (std::size_t{1} << (2 * t - 1)) + (std::size_t{1} << (t - 1)));
  }
}

TEST(GadgetByName, ParsesKnownFamilies) {
  EXPECT_EQ(gadget_by_name("ip4").table_string(), make_ip(4).table_string());
  EXPECT_EQ(gadget_by_name("xor2").table_string(), "0110");
  EXPECT_EQ(gadget_by_name("and2").table_string(), "0001");
  EXPECT_THROW(gadget_by_name("maj3"), std::invalid_argument);
  EXPECT_THROW(gadget_by_name("ip"), std::invalid_argument);
}

TEST(GadgetFile, RoundTripAndErrors) {
  std::stringstream ss;
  write_gadget(ss, make_ip(4));
  EXPECT_EQ(ss.str(), "arity=4\n0000010100110110\n");
  EXPECT_EQ(read_gadget(ss).table_string(), make_ip(4).table_string());
  std::stringstream bad("arity=3\n0101\n");
  EXPECT_THROW(read_gadget(bad), std::runtime_error);
  std::stringstream no_header("0110\n");
  EXPECT_THROW(read_gadget(no_header), std::runtime_error);
  EXPECT_THROW(Gadget::from_table_string(2, "01x0"), std::invalid_argument);
  EXPECT_THROW(Gadget(25, {}), std::invalid_argument);
}

TEST(LiftEval, Examples) {
  Gadget g = make_ip(4);
  BlockStructure s{3, 4};
  BlockAssignment none{s, {std::nullopt, std::nullopt, std::nullopt}};
  EXPECT_EQ(lift_eval(g, none), (std::vector<int>{-1, -1, -1}));
  BlockAssignment one{s, {0b1010u, std::nullopt, std::nullopt}};
  EXPECT_EQ(lift_eval(g, one), (std::vector<int>{1, -1, -1}));
  BitVec x = BitVec::from_string("101011110001");
  EXPECT_EQ(lift_eval(g, x, s), (std::vector<int>{g(0b1010), g(0b1111), g(0b0001)}));
  EXPECT_THROW(lift_eval(make_ip(8), one), std::invalid_argument);
}

TEST(IsStifled, SmallGadgets) {
  EXPECT_TRUE(is_stifled(make_ip(4)));
  EXPECT_TRUE(is_stifled(make_ip(8)));
  EXPECT_FALSE(is_stifled(make_and(2)));
  EXPECT_FALSE(is_stifled(make_xor(2)));
  EXPECT_FALSE(is_stifled(make_ip(2)));
}

TEST(IsStifled, StiflingAssignmentsForceTheOutput) {
  Gadget g = make_ip(6);
  for (int i = 1; i <= 6; ++i)
    for (int a = 0; a < 2; ++a) {
      auto d = stifling_assignment(g, i, a);
      ASSERT_TRUE(d);
      EXPECT_EQ(g(*d), static_cast<bool>(a));
      EXPECT_EQ(g(*d ^ g.bit_mask(i)), static_cast<bool>(a));
    }
}

TEST(BalancedStifled, InnerProductOnEightBits) {
  // With x_i flipped the output is unchanged iff the partner bit is 0, so the
  // count is taken over the preimages with a zero partner.
  Gadget g = make_ip(8);
  std::array<std::uint64_t, 2> good{}, total{};
  for (std::uint32_t in = 0; in < 256; ++in) {
    bool a = ip_direct(in, 4);
    ++total[a];
    if (!((in >> 3) & 1u)) ++good[a];  // partner of x_1 is y_1
  }
  auto eps = balanced_stifled_epsilon(g);
  EXPECT_EQ(eps.table[0][0], (Ratio{good[0], total[0]}));
  EXPECT_EQ(eps.table[0][1], (Ratio{good[1], total[1]}));
  EXPECT_EQ(eps.table[0][0], (Ratio{9, 17}));
  EXPECT_EQ(eps.minimum, (Ratio{7, 15}));
  EXPECT_TRUE((Ratio{7, 18}) <= eps.minimum);
  for (const auto& row : eps.table) {
    EXPECT_EQ(row[0], (Ratio{9, 17}));
    EXPECT_EQ(row[1], (Ratio{7, 15}));
  }
}

TEST(BalancedStifled, SmallTables) {
  auto ip4 = balanced_stifled_epsilon(make_ip(4));
  for (const auto& row : ip4.table) {
    EXPECT_EQ(row[0], (Ratio{3, 5}));
    EXPECT_EQ(row[1], (Ratio{1, 3}));
  }
  auto and2 = balanced_stifled_epsilon(make_and(2));
  EXPECT_EQ(and2.table[0][1], (Ratio{0, 1}));
  EXPECT_THROW(balanced_stifled_epsilon(Gadget::from_table_string(1, "00")), std::invalid_argument);
}

TEST(BalancedStifled, PositiveExactlyWhenStifled) {
  Rng rng(21);
  for (int it = 0; it < 300; ++it) {
    int b = 1 + static_cast<int>(rng.below(4));
    std::string t(std::size_t{1} << b, '0');
    for (auto& c : t) c = rng.bit() ? '1' : '0';
    Gadget g = Gadget::from_table_string(b, t);
    if (g.is_constant()) continue;
    EXPECT_EQ(is_stifled(g), (Ratio{0, 1}) < balanced_stifled_epsilon(g).minimum) << t;
  }
}

TEST(SampleLiftedPreimage, UniquePreimage) {
  Gadget g = make_and(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(sample_lifted_preimage(g, {true}, seed).to_string(), "11");
}

TEST(SampleLiftedPreimage, DeterministicAndConsistent) {
  Gadget g = make_ip(4);
  BlockStructure s{5, 4};
  Rng rng(22);
  for (int it = 0; it < 200; ++it) {
    std::vector<bool> z(5);
    for (std::size_t j = 0; j < 5; ++j) z[j] = rng.bit();
    auto a = sample_lifted_preimage(g, z, 1000 + it);
    EXPECT_EQ(a, sample_lifted_preimage(g, z, 1000 + it));
    auto out = lift_eval(g, a, s);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(out[j], static_cast<int>(z[j]));
  }
}

TEST(SampleLiftedPreimage, BlockMarginalsAreUniform) {
  Gadget g = make_ip(4);
  BlockStructure s{2, 4};
  const auto& pre = g.preimages(false);
  std::array<std::array<double, 16>, 2> counts{};
  const int samples = 100000;
  Rng rng(23);
  for (int i = 0; i < samples; ++i) {
    auto x = sample_lifted_preimage(g, {false, false}, rng);
    for (std::size_t j = 0; j < 2; ++j) counts[j][block_value(x, s, j)] += 1;
  }
  // Chi-square with 9 degrees of freedom; 27.88 is the 0.999 quantile.
  for (std::size_t j = 0; j < 2; ++j) {
    double expect = static_cast<double>(samples) / static_cast<double>(pre.size());
    double chi2 = 0, inside = 0;
    for (auto v : pre) {
      chi2 += (counts[j][v] - expect) * (counts[j][v] - expect) / expect;
      inside += counts[j][v];
    }
    EXPECT_EQ(inside, samples);
    EXPECT_LT(chi2, 27.88) << "block " << j;
  }
}
