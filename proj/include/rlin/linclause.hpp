#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rlin/bits.hpp"
#include "rlin/formulas.hpp"

namespace rlin {

using Form = std::vector<std::uint32_t>;

/// Sorts variables and cancels repeated pairs (x + x = 0).
inline Form normalize_form(Form f) {
  std::sort(f.begin(), f.end());
  Form out;
  for (std::size_t i = 0; i < f.size();) {
    std::size_t j = i;
    while (j < f.size() && f[j] == f[i]) ++j;
    if ((j - i) % 2) out.push_back(f[i]);
    i = j;
  }
  return out;
}

/// One equation <form, x> = bit, viewing storage inside a LinearClause.
struct EqView {
  std::span<const std::uint32_t> form;
  bool bit;

  friend bool operator<(const EqView& a, const EqView& b) {
    if (std::lexicographical_compare(a.form.begin(), a.form.end(), b.form.begin(), b.form.end())) return true;
    if (std::lexicographical_compare(b.form.begin(), b.form.end(), a.form.begin(), a.form.end())) return false;
    return a.bit < b.bit;
  }
  friend bool operator==(const EqView& a, const EqView& b) {
    return a.bit == b.bit && std::equal(a.form.begin(), a.form.end(), b.form.begin(), b.form.end());
  }
};

/// Disjunction of affine equations over GF(2), kept in canonical form:
/// forms ascending and pair-free, equations sorted by (form, bit), no
/// duplicates, no "0=1" equations. A "0=0" equation marks a tautology.
/// Stored flat as [header = (len << 1) | bit, vars...] per equation.
class LinearClause {
 public:
  LinearClause() = default;

  /// Literal x becomes (x = 1), literal -x becomes (x = 0).
  static LinearClause from_literals(const Clause& c) {
    std::vector<std::pair<Form, bool>> eqs;
    for (auto l : c) eqs.push_back({{static_cast<std::uint32_t>(std::abs(l))}, l > 0});
    return from_equations(std::move(eqs));
  }

  static LinearClause from_equations(std::vector<std::pair<Form, bool>> eqs) {
    for (auto& [f, b] : eqs) f = normalize_form(std::move(f));
    LinearClause tmp;
    for (const auto& [f, b] : eqs) {
      if (f.empty() && b) continue;
      tmp.append(f, b);
    }
    return tmp.canonical();
  }

  bool empty() const { return d_.empty(); }
  const std::vector<std::uint32_t>& data() const { return d_; }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t p = 0; p < d_.size();) {
      std::size_t len = d_[p] >> 1;
      f(EqView{std::span<const std::uint32_t>(d_.data() + p + 1, len), static_cast<bool>(d_[p] & 1u)});
      p += 1 + len;
    }
  }

  std::vector<EqView> views() const {
    std::vector<EqView> v;
    for_each([&](EqView e) { v.push_back(e); });
    return v;
  }

  std::size_t width() const {
    std::size_t n = 0;
    for_each([&](EqView) { ++n; });
    return n;
  }

  bool contains(std::span<const std::uint32_t> form, bool bit) const {
    bool found = false;
    for_each([&](EqView e) {
      if (!found && e.bit == bit && std::equal(e.form.begin(), e.form.end(), form.begin(), form.end())) found = true;
    });
    return found;
  }

  bool is_ordinary() const {
    bool ok = true;
    for_each([&](EqView e) { ok = ok && e.form.size() == 1; });
    return ok;
  }

  /// The clause as DIMACS literals, if every form is a single variable.
  std::optional<Clause> to_literals() const {
    if (!is_ordinary()) return std::nullopt;
    Clause c;
    for_each([&](EqView e) {
      auto x = static_cast<std::int32_t>(e.form[0]);
      c.push_back(e.bit ? x : -x);
    });
    return c;
  }

  std::size_t max_variable() const {
    std::uint32_t m = 0;
    for_each([&](EqView e) {
      for (auto x : e.form) m = std::max(m, x);
    });
    return m;
  }

  /// True iff the assignment (a[x-1] is variable x) falsifies every equation.
  bool falsified_by(const std::vector<bool>& a) const {
    bool fals = true;
    for_each([&](EqView e) {
      bool s = false;
      for (auto x : e.form) s ^= a[x - 1];
      if (s == e.bit) fals = false;
    });
    return fals;
  }

  std::string to_string() const {
    if (d_.empty()) return "-";
    std::string s;
    bool first = true;
    for_each([&](EqView e) {
      if (!first) s += ';';
      first = false;
      s += form_string(e.form);
      s += e.bit ? "=1" : "=0";
    });
    return s;
  }

  static std::string form_string(std::span<const std::uint32_t> f) {
    if (f.empty()) return "0";
    std::string s;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) s += '+';
      s += std::to_string(f[i]);
    }
    return s;
  }

  /// Parses a form such as "1+4+7" (or "0" for the zero form).
  static Form parse_form(const std::string& s) {
    if (s == "0") return {};
    Form f;
    std::size_t p = 0;
    while (p <= s.size()) {
      std::size_t q = s.find('+', p);
      if (q == std::string::npos) q = s.size();
      std::string tok = s.substr(p, q - p);
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("bad linear form '" + s + "'");
      unsigned long long v = std::stoull(tok);
      if (v == 0 || v > UINT32_MAX) throw std::invalid_argument("variable out of range in form '" + s + "'");
      f.push_back(static_cast<std::uint32_t>(v));
      p = q + 1;
    }
    return f;
  }

  /// Parses "-" (empty clause) or ";"-joined "form=bit" equations.
  static LinearClause parse(const std::string& s) {
    if (s == "-") return {};
    std::vector<std::pair<Form, bool>> eqs;
    std::size_t p = 0;
    while (p <= s.size()) {
      std::size_t q = s.find(';', p);
      if (q == std::string::npos) q = s.size();
      std::string tok = s.substr(p, q - p);
      auto eq = tok.find('=');
      if (eq == std::string::npos || eq + 2 != tok.size() || (tok[eq + 1] != '0' && tok[eq + 1] != '1'))
        throw std::invalid_argument("bad equation '" + tok + "'");
      eqs.push_back({parse_form(tok.substr(0, eq)), tok[eq + 1] == '1'});
      p = q + 1;
    }
    return from_equations(std::move(eqs));
  }

  bool operator==(const LinearClause&) const = default;

  /// Builds a canonical clause from already-canonical equations.
  static LinearClause from_views(std::vector<EqView> eqs) {
    std::sort(eqs.begin(), eqs.end());
    eqs.erase(std::unique(eqs.begin(), eqs.end()), eqs.end());
    LinearClause out;
    for (const auto& e : eqs) out.append(e.form, e.bit);
    return out;
  }

 private:
  std::vector<std::uint32_t> d_;

  void append(std::span<const std::uint32_t> f, bool bit) {
    d_.push_back(static_cast<std::uint32_t>((f.size() << 1) | (bit ? 1u : 0u)));
    d_.insert(d_.end(), f.begin(), f.end());
  }

  LinearClause canonical() const { return from_views(views()); }
};

/// Resolvent of p1 containing (form = 0) and p2 containing (form = 1), or
/// nullopt when either premise lacks its equation.
inline std::optional<LinearClause> resolve(const LinearClause& p1, const LinearClause& p2, std::span<const std::uint32_t> form) {
  if (!p1.contains(form, false) || !p2.contains(form, true)) return std::nullopt;
  std::vector<EqView> eqs;
  EqView drop0{form, false}, drop1{form, true};
  p1.for_each([&](EqView e) {
    if (!(e == drop0)) eqs.push_back(e);
  });
  p2.for_each([&](EqView e) {
    if (!(e == drop1)) eqs.push_back(e);
  });
  return LinearClause::from_views(std::move(eqs));
}

/// Compact coordinates for the variables of a few clauses.
class VarIndex {
 public:
  void add(const LinearClause& c) {
    c.for_each([&](EqView e) {
      for (auto x : e.form)
        if (map_.emplace(x, vars_.size()).second) vars_.push_back(x);
    });
  }
  std::size_t size() const { return vars_.size(); }
  const std::vector<std::uint32_t>& vars() const { return vars_; }
  BitVec vec(std::span<const std::uint32_t> form) const {
    BitVec v(vars_.size());
    for (auto x : form) v.flip(map_.at(x));
    return v;
  }

 private:
  std::unordered_map<std::uint32_t, std::size_t> map_;
  std::vector<std::uint32_t> vars_;
};

/// Falsifying set of c: every equation negated, as an affine space.
inline AffineSpace falsifying_space(const LinearClause& c, const VarIndex& idx) {
  AffineSpace a(idx.size());
  c.for_each([&](EqView e) { a.add(idx.vec(e.form), !e.bit); });
  return a;
}

inline bool is_tautology(const LinearClause& c) {
  VarIndex idx;
  idx.add(c);
  return falsifying_space(c, idx).empty();
}

/// A |= B, i.e. every assignment falsifying B falsifies A.
inline bool entails(const LinearClause& a, const LinearClause& b) {
  VarIndex idx;
  idx.add(a);
  idx.add(b);
  AffineSpace fb = falsifying_space(b, idx);
  if (fb.empty()) return true;
  bool ok = true;
  a.for_each([&](EqView e) {
    if (!ok) return;
    auto v = fb.implied_value(idx.vec(e.form));
    ok = v && *v == !e.bit;
  });
  return ok;
}

}  // namespace rlin
