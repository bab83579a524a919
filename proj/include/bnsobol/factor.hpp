/**
 * @file factor.hpp
 * @brief Dense real-valued factors over ordered variable axes.
 *
 * A factor stores one value per joint assignment of its axes, row-major with
 * axes kept in ascending variable-id order (the last axis varies fastest).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bnsobol/error.hpp"
#include "bnsobol/model.hpp"

namespace bnsobol {

/// Largest factor the library will allocate (cells).
inline constexpr std::size_t kMaxFactorCells = std::size_t{1} << 28;

/// |numerator| above which x/0 is reported as DivisionByZero.
inline constexpr double kDivisionZeroTolerance = 1e-12;

class Factor {
 public:
  /// The scalar factor 1.
  Factor() : values_{1.0} {}

  static Factor scalar(double value) {
    Factor f;
    f.values_[0] = value;
    return f;
  }

  /// Builds a factor from axes in any order; values are row-major over the
  /// given axis order and get permuted into canonical ascending order.
  Factor(std::vector<VarId> axes, std::vector<std::size_t> cards, std::vector<double> values) {
    if (axes.size() != cards.size())
      throw Error(ErrorKind::ShapeMismatch, "axes and cardinalities differ in length");
    const std::size_t cells = checked_cells(cards);
    if (values.size() != cells)
      throw Error(ErrorKind::ShapeMismatch, "factor has " + std::to_string(values.size()) +
                                                " values, expected " + std::to_string(cells));
    if (std::set<VarId>(axes.begin(), axes.end()).size() != axes.size())
      throw Error(ErrorKind::ShapeMismatch, "repeated axis");

    std::vector<std::size_t> perm(axes.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return axes[a] < axes[b]; });
    if (std::is_sorted(axes.begin(), axes.end())) {
      axes_ = std::move(axes);
      cards_ = std::move(cards);
      values_ = std::move(values);
      return;
    }
    const auto source_strides = strides_of(cards);
    for (std::size_t k : perm) {
      axes_.push_back(axes[k]);
      cards_.push_back(cards[k]);
    }
    std::vector<std::size_t> mapped(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) mapped[k] = source_strides[perm[k]];
    values_.resize(cells);
    std::vector<std::size_t> counter(axes_.size(), 0);
    std::size_t src = 0;
    for (std::size_t dst = 0; dst < cells; ++dst) {
      values_[dst] = values[src];
      advance(counter, cards_, src, mapped);
    }
  }

  const std::vector<VarId>& axes() const noexcept { return axes_; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool is_scalar() const noexcept { return axes_.empty(); }

  bool has_axis(VarId v) const { return std::binary_search(axes_.begin(), axes_.end(), v); }

  std::size_t card_of(VarId v) const {
    auto it = std::lower_bound(axes_.begin(), axes_.end(), v);
    if (it == axes_.end() || *it != v)
      throw Error(ErrorKind::UnknownAxis, "axis " + std::to_string(v));
    return cards_[static_cast<std::size_t>(it - axes_.begin())];
  }

  /// Value at an assignment that covers every axis (extra entries ignored).
  double at(const std::map<VarId, std::size_t>& assignment) const {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < axes_.size(); ++k) {
      auto it = assignment.find(axes_[k]);
      if (it == assignment.end() || it->second >= cards_[k])
        throw Error(ErrorKind::InvalidAssignment, "axis " + std::to_string(axes_[k]));
      offset = offset * cards_[k] + it->second;
    }
    return values_[offset];
  }

  /// Fixes axis `v` at `state` and drops it.
  Factor slice(VarId v, std::size_t state) const {
    auto it = std::lower_bound(axes_.begin(), axes_.end(), v);
    if (it == axes_.end() || *it != v) throw Error(ErrorKind::UnknownAxis, "axis " + std::to_string(v));
    const auto k = static_cast<std::size_t>(it - axes_.begin());
    if (state >= cards_[k])
      throw Error(ErrorKind::InvalidAssignment,
                  "state " + std::to_string(state) + " of axis " + std::to_string(v));
    std::size_t inner = 1;
    for (std::size_t j = k + 1; j < cards_.size(); ++j) inner *= cards_[j];
    const std::size_t outer = values_.size() / (inner * cards_[k]);
    Factor out;
    out.axes_ = axes_;
    out.cards_ = cards_;
    out.axes_.erase(out.axes_.begin() + static_cast<std::ptrdiff_t>(k));
    out.cards_.erase(out.cards_.begin() + static_cast<std::ptrdiff_t>(k));
    out.values_.resize(outer * inner);
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>((o * cards_[k] + state) * inner),
                  inner, out.values_.begin() + static_cast<std::ptrdiff_t>(o * inner));
    return out;
  }

  /// Renames axes through `rename` (missing ids unchanged) and re-canonicalizes.
  Factor relabel(const std::map<VarId, VarId>& rename) const {
    std::vector<VarId> axes = axes_;
    for (auto& a : axes)
      if (auto it = rename.find(a); it != rename.end()) a = it->second;
    return Factor(std::move(axes), cards_, values_);
  }

  /// Elementwise map.
  template <class Fn>
  Factor map(Fn&& fn) const {
    Factor out = *this;
    for (auto& x : out.values_) x = fn(x);
    return out;
  }

  bool operator==(const Factor&) const = default;

  static std::size_t checked_cells(const std::vector<std::size_t>& cards) {
    std::size_t cells = 1;
    for (std::size_t c : cards) {
      if (c == 0) throw Error(ErrorKind::ShapeMismatch, "zero cardinality axis");
      if (cells > kMaxFactorCells / c)
        throw Error(ErrorKind::StateSpaceTooLarge,
                    "factor exceeds " + std::to_string(kMaxFactorCells) + " cells");
      cells *= c;
    }
    return cells;
  }

  static std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
    std::vector<std::size_t> s(cards.size(), 1);
    for (std::size_t k = cards.size(); k-- > 1;) s[k - 1] = s[k] * cards[k];
    return s;
  }

  /// Odometer step over `cards`; keeps `offset` in sync using `strides`.
  static void advance(std::vector<std::size_t>& counter, const std::vector<std::size_t>& cards,
                      std::size_t& offset, const std::vector<std::size_t>& strides) {
    for (std::size_t k = counter.size(); k-- > 0;) {
      offset += strides[k];
      if (++counter[k] < cards[k]) return;
      offset -= strides[k] * cards[k];
      counter[k] = 0;
    }
  }

 private:
  template <class Op>
  friend Factor combine(const Factor& a, const Factor& b, Op&& op);
  friend Factor factor_sum_out(const Factor& a, const std::set<VarId>& vars);

  std::vector<VarId> axes_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

/// Pointwise binary operation over the union of axes.
template <class Op>
Factor combine(const Factor& a, const Factor& b, Op&& op) {
  Factor out;
  out.values_.clear();
  std::size_t i = 0, j = 0;
  while (i < a.axes_.size() || j < b.axes_.size()) {
    if (j == b.axes_.size() || (i < a.axes_.size() && a.axes_[i] < b.axes_[j])) {
      out.axes_.push_back(a.axes_[i]);
      out.cards_.push_back(a.cards_[i++]);
    } else if (i == a.axes_.size() || b.axes_[j] < a.axes_[i]) {
      out.axes_.push_back(b.axes_[j]);
      out.cards_.push_back(b.cards_[j++]);
    } else {
      if (a.cards_[i] != b.cards_[j])
        throw Error(ErrorKind::AxisCardinalityMismatch,
                    "axis " + std::to_string(a.axes_[i]) + " has cardinality " +
                        std::to_string(a.cards_[i]) + " vs " + std::to_string(b.cards_[j]));
      out.axes_.push_back(a.axes_[i]);
      out.cards_.push_back(a.cards_[i]);
      ++i;
      ++j;
    }
  }
  const std::size_t cells = Factor::checked_cells(out.cards_);
  auto strides_in = [&](const Factor& f) {
    const auto own = Factor::strides_of(f.cards_);
    std::vector<std::size_t> s(out.axes_.size(), 0);
    for (std::size_t k = 0, m = 0; k < out.axes_.size() && m < f.axes_.size(); ++k)
      if (out.axes_[k] == f.axes_[m]) s[k] = own[m++];
    return s;
  };
  const auto sa = strides_in(a);
  const auto sb = strides_in(b);
  out.values_.resize(cells);
  std::vector<std::size_t> counter(out.axes_.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k < cells; ++k) {
    out.values_[k] = op(a.values_[ia], b.values_[ib]);
    for (std::size_t d = counter.size(); d-- > 0;) {
      ia += sa[d];
      ib += sb[d];
      if (++counter[d] < out.cards_[d]) break;
      ia -= sa[d] * out.cards_[d];
      ib -= sb[d] * out.cards_[d];
      counter[d] = 0;
    }
  }
  return out;
}

inline Factor factor_product(const Factor& a, const Factor& b) {
  return combine(a, b, [](double x, double y) { return x * y; });
}

/// Sums the listed axes out; every listed variable must be an axis.
inline Factor factor_sum_out(const Factor& a, const std::set<VarId>& vars) {
  for (VarId v : vars)
    if (!a.has_axis(v)) throw Error(ErrorKind::UnknownAxis, "axis " + std::to_string(v));
  if (vars.empty()) return a;
  Factor out;
  std::vector<std::size_t> kept_strides(a.axes_.size(), 0);
  for (std::size_t k = 0; k < a.axes_.size(); ++k)
    if (!vars.count(a.axes_[k])) {
      out.axes_.push_back(a.axes_[k]);
      out.cards_.push_back(a.cards_[k]);
    }
  const auto own = Factor::strides_of(out.cards_);
  for (std::size_t k = 0, m = 0; k < a.axes_.size(); ++k)
    if (!vars.count(a.axes_[k])) kept_strides[k] = own[m++];
  out.values_.assign(Factor::checked_cells(out.cards_), 0.0);
  std::vector<std::size_t> counter(a.axes_.size(), 0);
  std::size_t dst = 0;
  for (double x : a.values_) {
    out.values_[dst] += x;
    Factor::advance(counter, a.cards_, dst, kept_strides);
  }
  return out;
}

/// Pointwise a / b with 0/0 = 0; a nonzero numerator over zero throws.
inline Factor factor_div(const Factor& a, const Factor& b) {
  return combine(a, b, [](double x, double y) {
    if (y == 0.0) {
      if (std::abs(x) > kDivisionZeroTolerance)
        throw Error(ErrorKind::DivisionByZero, "nonzero value " + std::to_string(x) + " over zero");
      return 0.0;
    }
    return x / y;
  });
}

inline Factor factor_square(const Factor& a) {
  return a.map([](double x) { return x * x; });
}

inline Factor factor_affine(const Factor& a, double scale, double shift) {
  return a.map([=](double x) { return scale * x + shift; });
}

}  // namespace bnsobol
