#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlin/bits.hpp"
#include "rlin/rng.hpp"

namespace rlin {

/// Exact non-negative ratio num/den with den > 0.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator<(const Ratio& a, const Ratio& b) {
    return static_cast<unsigned __int128>(a.num) * b.den < static_cast<unsigned __int128>(b.num) * a.den;
  }
  friend bool operator<=(const Ratio& a, const Ratio& b) { return !(b < a); }
  friend bool operator==(const Ratio& a, const Ratio& b) {
    return static_cast<unsigned __int128>(a.num) * b.den == static_cast<unsigned __int128>(b.num) * a.den;
  }
};

/// Boolean function on b bits stored as a truth table. Input index x encodes
/// (x_1, ..., x_b) with x_1 as the most significant bit.
class Gadget {
 public:
  static constexpr int kMaxArity = 24;

  Gadget(int arity, std::vector<std::uint8_t> table, std::string name = "")
      : arity_(arity), table_(std::move(table)), name_(std::move(name)) {
    if (arity < 1 || arity > kMaxArity) throw std::invalid_argument("gadget arity must be in 1..24");
    if (table_.size() != (std::size_t{1} << arity)) throw std::invalid_argument("truth table size must be 2^arity");
    for (std::uint32_t x = 0; x < table_.size(); ++x) pre_[table_[x] ? 1 : 0].push_back(x);
  }

  static Gadget from_table_string(int arity, const std::string& bits, std::string name = "") {
    std::vector<std::uint8_t> t(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1') throw std::invalid_argument("truth table may contain only 0 and 1");
      t[i] = bits[i] == '1';
    }
    return Gadget(arity, std::move(t), std::move(name));
  }

  int arity() const { return arity_; }
  const std::string& name() const { return name_; }
  bool operator()(std::uint32_t x) const { return table_[x]; }
  const std::vector<std::uint32_t>& preimages(bool a) const { return pre_[a ? 1 : 0]; }
  bool is_constant() const { return pre_[0].empty() || pre_[1].empty(); }

  /// Mask of input bit k (1-based, bit 1 most significant).
  std::uint32_t bit_mask(int k) const { return std::uint32_t{1} << (arity_ - k); }

  std::string table_string() const {
    std::string s(table_.size(), '0');
    for (std::size_t i = 0; i < table_.size(); ++i)
      if (table_[i]) s[i] = '1';
    return s;
  }

 private:
  int arity_;
  std::vector<std::uint8_t> table_;
  std::string name_;
  std::array<std::vector<std::uint32_t>, 2> pre_;
};

inline Gadget make_ip(int total_bits) {
  if (total_bits < 2 || total_bits % 2 != 0) throw std::invalid_argument("inner product needs an even arity >= 2");
  int t = total_bits / 2;
  std::vector<std::uint8_t> tab(std::size_t{1} << total_bits);
  for (std::uint32_t in = 0; in < tab.size(); ++in) {
    std::uint32_t x = in >> t, y = in & ((1u << t) - 1);
    tab[in] = std::popcount(x & y) & 1;
  }
  return Gadget(total_bits, std::move(tab), "ip" + std::to_string(total_bits));
}

inline Gadget make_xor(int b) {
  std::vector<std::uint8_t> tab(std::size_t{1} << b);
  for (std::uint32_t x = 0; x < tab.size(); ++x) tab[x] = std::popcount(x) & 1;
  return Gadget(b, std::move(tab), "xor" + std::to_string(b));
}

inline Gadget make_and(int b) {
  std::vector<std::uint8_t> tab(std::size_t{1} << b, 0);
  tab.back() = 1;
  return Gadget(b, std::move(tab), "and" + std::to_string(b));
}

/// Parses names such as "ip4", "xor2", "and2".
inline Gadget gadget_by_name(const std::string& name) {
  auto num = [&](std::size_t pos) {
    if (pos >= name.size()) throw std::invalid_argument("unknown gadget: " + name);
    return std::stoi(name.substr(pos));
  };
  if (name.rfind("ip", 0) == 0) return make_ip(num(2));
  if (name.rfind("xor", 0) == 0) return make_xor(num(3));
  if (name.rfind("and", 0) == 0) return make_and(num(3));
  throw std::invalid_argument("unknown gadget: " + name);
}

inline void write_gadget(std::ostream& os, const Gadget& g) {
  os << "arity=" << g.arity() << "\n" << g.table_string() << "\n";
}

inline Gadget read_gadget(std::istream& is) {
  std::string l1, l2;
  if (!std::getline(is, l1) || l1.rfind("arity=", 0) != 0)
    throw std::runtime_error("line 1: expected arity=<b>");
  int b = std::stoi(l1.substr(6));
  if (!std::getline(is, l2)) throw std::runtime_error("line 2: missing truth table");
  if (l2.size() != (std::size_t{1} << b)) throw std::runtime_error("line 2: truth table length is not 2^arity");
  return Gadget::from_table_string(b, l2);
}

/// Per-block value of a block-respecting partial assignment; nullopt marks an
/// unassigned block. Values use the gadget's input encoding.
struct BlockAssignment {
  BlockStructure blocks;
  std::vector<std::optional<std::uint32_t>> values;
};

inline std::uint32_t block_value(const BitVec& x, const BlockStructure& s, std::size_t j) {
  std::uint32_t v = 0;
  for (std::size_t k = 0; k < s.b; ++k) v = (v << 1) | (x.get(j * s.b + k) ? 1u : 0u);
  return v;
}

inline void set_block_value(BitVec& x, const BlockStructure& s, std::size_t j, std::uint32_t v) {
  for (std::size_t k = 0; k < s.b; ++k) x.set(j * s.b + k, (v >> (s.b - 1 - k)) & 1u);
}

inline BlockAssignment to_block_assignment(const BitVec& x, const BlockStructure& s) {
  BlockAssignment a{s, {}};
  for (std::size_t j = 0; j < s.m; ++j) a.values.push_back(block_value(x, s, j));
  return a;
}

/// Gadget applied to every assigned block; -1 marks an unassigned block.
inline std::vector<int> lift_eval(const Gadget& g, const BlockAssignment& beta) {
  if (beta.blocks.b != static_cast<std::size_t>(g.arity())) throw std::invalid_argument("block size differs from gadget arity");
  if (beta.values.size() != beta.blocks.m) throw std::invalid_argument("block assignment has wrong length");
  std::vector<int> out;
  for (const auto& v : beta.values) out.push_back(v ? static_cast<int>(g(*v)) : -1);
  return out;
}

inline std::vector<int> lift_eval(const Gadget& g, const BitVec& x, const BlockStructure& s) {
  return lift_eval(g, to_block_assignment(x, s));
}

/// Some delta with g(delta) = g(delta with bit i flipped) = a, if any.
inline std::optional<std::uint32_t> stifling_assignment(const Gadget& g, int i, bool a) {
  std::uint32_t m = g.bit_mask(i);
  for (auto x : g.preimages(a))
    if (g(x ^ m) == a) return x;
  return std::nullopt;
}

inline bool is_stifled(const Gadget& g) {
  for (int i = 1; i <= g.arity(); ++i)
    for (int a = 0; a < 2; ++a)
      if (!stifling_assignment(g, i, a)) return false;
  return true;
}

struct BalancedEpsilon {
  /// table[i-1][a]: fraction of g^{-1}(a) whose projection off bit i forces a.
  std::vector<std::array<Ratio, 2>> table;
  Ratio minimum;
};

inline BalancedEpsilon balanced_stifled_epsilon(const Gadget& g) {
  if (g.is_constant()) throw std::invalid_argument("gadget is constant");
  BalancedEpsilon out;
  bool first = true;
  for (int i = 1; i <= g.arity(); ++i) {
    std::array<Ratio, 2> row;
    for (int a = 0; a < 2; ++a) {
      const auto& pre = g.preimages(a);
      std::uint64_t good = 0;
      for (auto x : pre)
        if (g(x ^ g.bit_mask(i)) == static_cast<bool>(a)) ++good;
      row[a] = Ratio{good, pre.size()};
      if (first || row[a] < out.minimum) out.minimum = row[a];
      first = false;
    }
    out.table.push_back(row);
  }
  return out;
}

/// Each block j drawn uniformly from g^{-1}(z_j), blocks in increasing order.
inline BitVec sample_lifted_preimage(const Gadget& g, const std::vector<bool>& z, Rng& rng) {
  if (g.is_constant()) throw std::invalid_argument("gadget is constant");
  BlockStructure s{z.size(), static_cast<std::size_t>(g.arity())};
  BitVec x(s.length());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const auto& pre = g.preimages(z[j]);
    set_block_value(x, s, j, pre[rng.below(pre.size())]);
  }
  return x;
}

inline BitVec sample_lifted_preimage(const Gadget& g, const std::vector<bool>& z, std::uint64_t seed) {
  Rng rng(seed);
  return sample_lifted_preimage(g, z, rng);
}

}  // namespace rlin
