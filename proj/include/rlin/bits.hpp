#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rlin {

/// Dense vector over GF(2), packed into 64-bit words. Index 0 is the first
/// coordinate.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  static BitVec from_string(std::string_view s) {
    BitVec v(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        v.set(i);
      else if (s[i] != '0')
        throw std::invalid_argument("bit string may contain only 0 and 1");
    }
    return v;
  }

  static BitVec unit(std::size_t n, std::size_t i) {
    BitVec v(n);
    v.set(i);
    return v;
  }

  std::size_t size() const { return n_; }
  const std::vector<std::uint64_t>& words() const { return w_; }

  bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool value = true) {
    std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (value)
      w_[i >> 6] |= m;
    else
      w_[i >> 6] &= ~m;
  }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  BitVec& operator^=(const BitVec& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] ^= o.w_[k];
    return *this;
  }
  BitVec& operator&=(const BitVec& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] &= o.w_[k];
    return *this;
  }
  BitVec& operator|=(const BitVec& o) {
    for (std::size_t k = 0; k < w_.size(); ++k) w_[k] |= o.w_[k];
    return *this;
  }
  friend BitVec operator^(BitVec a, const BitVec& b) { return a ^= b; }
  friend BitVec operator&(BitVec a, const BitVec& b) { return a &= b; }

  bool dot(const BitVec& o) const {
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) acc ^= w_[k] & o.w_[k];
    return std::popcount(acc) & 1;
  }

  bool is_zero() const {
    return std::all_of(w_.begin(), w_.end(), [](std::uint64_t x) { return x == 0; });
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto x : w_) c += static_cast<std::size_t>(std::popcount(x));
    return c;
  }

  /// Lowest set coordinate, or size() when zero.
  std::size_t lowest() const {
    for (std::size_t k = 0; k < w_.size(); ++k)
      if (w_[k]) return k * 64 + static_cast<std::size_t>(std::countr_zero(w_[k]));
    return n_;
  }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < w_.size(); ++k) {
      std::uint64_t x = w_[k];
      while (x) {
        out.push_back(k * 64 + static_cast<std::size_t>(std::countr_zero(x)));
        x &= x - 1;
      }
    }
    return out;
  }

  std::string to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }

  bool operator==(const BitVec&) const = default;
  /// Lexicographic order on the coordinate sequence.
  bool lex_less(const BitVec& o) const {
    for (std::size_t i = 0; i < std::min(n_, o.n_); ++i)
      if (get(i) != o.get(i)) return !get(i);
    return n_ < o.n_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

/// m blocks of b consecutive coordinates each; block j covers [j*b, (j+1)*b).
struct BlockStructure {
  std::size_t m = 0;
  std::size_t b = 1;

  std::size_t length() const { return m * b; }
  std::size_t block_of(std::size_t coord) const { return coord / b; }
  std::size_t offset_in_block(std::size_t coord) const { return coord % b; }
  bool operator==(const BlockStructure&) const = default;

  BitVec mask(const std::vector<std::size_t>& blocks) const {
    BitVec v(length());
    for (auto j : blocks) {
      if (j >= m) throw std::out_of_range("block index out of range");
      for (std::size_t k = 0; k < b; ++k) v.set(j * b + k);
    }
    return v;
  }

  std::vector<std::size_t> touched_blocks(const BitVec& v) const {
    std::vector<std::size_t> out;
    for (auto c : v.support()) {
      std::size_t j = block_of(c);
      if (out.empty() || out.back() != j) out.push_back(j);
    }
    return out;
  }
};

/// Echelon basis of a subspace, kept sorted by pivot (each row's lowest set
/// coordinate). Rows carry an optional companion vector that follows every
/// row operation, which is how preimages and combinations are tracked.
class RowSpace {
 public:
  RowSpace() = default;
  explicit RowSpace(std::size_t ncols) : ncols_(ncols) {}

  std::size_t ncols() const { return ncols_; }
  std::size_t dim() const { return rows_.size(); }
  const std::vector<BitVec>& rows() const { return rows_; }
  const std::vector<BitVec>& tags() const { return tags_; }
  const std::vector<std::size_t>& pivots() const { return piv_; }

  /// Reduces v (and tag) against the basis; v ends with no bit at any pivot.
  void reduce(BitVec& v, BitVec* tag = nullptr) const {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (v.get(piv_[r])) {
        v ^= rows_[r];
        if (tag && !tags_.empty()) *tag ^= tags_[r];
      }
    }
  }

  bool contains(BitVec v) const {
    reduce(v);
    return v.is_zero();
  }

  /// Returns true when v was independent and got added.
  bool insert(BitVec v, BitVec tag = BitVec()) {
    bool tagged = tag.size() > 0;
    reduce(v, tagged ? &tag : nullptr);
    if (v.is_zero()) return false;
    std::size_t p = v.lowest();
    auto it = std::lower_bound(piv_.begin(), piv_.end(), p);
    std::size_t at = static_cast<std::size_t>(it - piv_.begin());
    piv_.insert(it, p);
    rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), std::move(v));
    if (tagged || !tags_.empty()) tags_.insert(tags_.begin() + static_cast<std::ptrdiff_t>(at), std::move(tag));
    return true;
  }

  void insert_all(const RowSpace& o) {
    for (const auto& r : o.rows_) insert(r);
  }

 private:
  std::size_t ncols_ = 0;
  std::vector<BitVec> rows_;
  std::vector<BitVec> tags_;
  std::vector<std::size_t> piv_;
};

inline std::size_t rank(const std::vector<BitVec>& rows) {
  if (rows.empty()) return 0;
  RowSpace rs(rows.front().size());
  for (const auto& r : rows) rs.insert(r);
  return rs.dim();
}

/// Solution set {x : <row_i, x> = rhs_i} with independent rows. An
/// inconsistent system yields the empty space.
class AffineSpace {
 public:
  AffineSpace() = default;
  explicit AffineSpace(std::size_t ncols) : basis_(ncols), blocks_{ncols, 1} {}
  AffineSpace(std::size_t ncols, BlockStructure s) : basis_(ncols), blocks_(s) {
    if (s.length() != ncols) throw std::invalid_argument("block structure does not match length");
  }

  std::size_t ncols() const { return basis_.ncols(); }
  const BlockStructure& blocks() const { return blocks_; }
  bool empty() const { return empty_; }
  std::size_t codim() const { return basis_.dim(); }
  const RowSpace& row_space() const { return basis_; }

  /// Adds the equation <v, x> = c. Returns false if it was already implied
  /// or contradicted; a contradiction leaves the space empty.
  bool add(BitVec v, bool c) {
    if (empty_) return false;
    BitVec tag(1);
    if (c) tag.set(0);
    BitVec red = v, t = tag;
    basis_.reduce(red, &t);
    if (red.is_zero()) {
      if (t.get(0)) empty_ = true;
      return false;
    }
    basis_.insert(std::move(v), std::move(tag));
    return true;
  }

  bool rhs(std::size_t row) const { return basis_.tags()[row].get(0); }

  bool contains(const BitVec& x) const {
    if (empty_) return false;
    for (std::size_t r = 0; r < basis_.dim(); ++r)
      if (basis_.rows()[r].dot(x) != rhs(r)) return false;
    return true;
  }

  /// Value of <v, x> if it is constant on the space.
  std::optional<bool> implied_value(BitVec v) const {
    BitVec t(1);
    basis_.reduce(v, &t);
    if (!v.is_zero()) return std::nullopt;
    return t.get(0);
  }

  bool subset_of(const AffineSpace& other) const {
    if (empty_) return true;
    if (other.empty_) return false;
    for (std::size_t r = 0; r < other.codim(); ++r) {
      auto val = implied_value(other.basis_.rows()[r]);
      if (!val || *val != other.rhs(r)) return false;
    }
    return true;
  }

  AffineSpace intersect(const AffineSpace& other) const {
    AffineSpace out = *this;
    if (other.empty_) out.empty_ = true;
    for (std::size_t r = 0; r < other.codim(); ++r) out.add(other.basis_.rows()[r], other.rhs(r));
    return out;
  }

  /// Some point of the space (free coordinates set to zero).
  std::optional<BitVec> point() const {
    if (empty_) return std::nullopt;
    BitVec x(ncols());
    for (std::size_t r = basis_.dim(); r-- > 0;) {
      const BitVec& row = basis_.rows()[r];
      bool val = rhs(r) ^ row.dot(x);
      if (val) x.flip(basis_.pivots()[r]);
    }
    return x;
  }

  std::vector<BitVec> matrix() const { return basis_.rows(); }

 private:
  RowSpace basis_;
  BlockStructure blocks_;
  bool empty_ = false;
};

}  // namespace rlin
