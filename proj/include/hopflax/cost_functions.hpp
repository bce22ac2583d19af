#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "hopflax/error.hpp"
#include "hopflax/numeric.hpp"

namespace hopflax {

/// Exponents and doubling constant of a cost. For non-power costs the
/// values come from a sampled grid and `estimated` is set.
struct CostProfile {
  double r_alpha = 0.0;
  double p_alpha = 0.0;
  double delta2_constant = 0.0;
  bool estimated = false;
  double grid_min = 0.0;
  double grid_max = 0.0;
  std::size_t grid_points = 0;
};

/// Convex C¹ cost generator α with α(0) = 0, optionally multiplied by a
/// positive scale s (the cost s·α).
class CostFunction {
 public:
  enum class Kind { power, linear_capped, custom };

  static CostFunction power(double p) {
    if (!(p >= 1.0) || !std::isfinite(p))
      fail(ErrorKind::ValidationError, "power cost needs a finite exponent p >= 1");
    CostFunction c;
    c.kind_ = Kind::power;
    c.p_ = p;
    return c;
  }

  /// h²/2 up to `cap`, then affine with slope `cap`.
  static CostFunction linear_capped(double cap) {
    if (!(cap > 0.0) || !std::isfinite(cap))
      fail(ErrorKind::ValidationError, "linear_capped cost needs a positive finite cap");
    CostFunction c;
    c.kind_ = Kind::linear_capped;
    c.cap_ = cap;
    return c;
  }

  /// Convex C¹ interpolant of samples (h, α(h)); (0, 0) is prepended when
  /// absent. Beyond the last sample the cost continues affinely.
  static CostFunction custom(std::vector<std::pair<double, double>> samples) {
    if (samples.empty() || samples.front().first != 0.0)
      samples.insert(samples.begin(), {0.0, 0.0});
    if (samples.front().second != 0.0)
      fail(ErrorKind::ValidationError, "custom cost must satisfy alpha(0) = 0");
    if (samples.size() < 2)
      fail(ErrorKind::ValidationError, "custom cost needs at least one sample with h > 0");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto [h, a] = samples[i];
      if (!std::isfinite(h) || !std::isfinite(a))
        fail(ErrorKind::ValidationError, "custom cost sample " + std::to_string(i) + " is not finite",
             {i});
      if (i > 0 && !(h > samples[i - 1].first))
        fail(ErrorKind::ValidationError,
             "custom cost sample abscissae must be strictly increasing (sample " +
                 std::to_string(i) + ")",
             {i});
    }
    CostFunction c;
    c.kind_ = Kind::custom;
    c.build_interpolant(samples);
    return c;
  }

  /// The cost s·α.
  CostFunction scaled(double s) const {
    if (!(s > 0.0) || !std::isfinite(s))
      fail(ErrorKind::ValidationError, "cost scale must be positive and finite");
    CostFunction c = *this;
    c.scale_ *= s;
    return c;
  }

  Kind kind() const { return kind_; }
  double exponent() const { return p_; }
  double cap() const { return cap_; }
  double scale() const { return scale_; }
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }
  bool is_power() const { return kind_ == Kind::power; }
  /// True when ell is only the slope of the tabulated tail.
  bool ell_truncated() const { return kind_ == Kind::custom; }

  double alpha(double h) const { return scale_ * base_alpha(h); }
  double alpha_prime(double h) const { return scale_ * base_alpha_prime(h); }

  /// lim α(h)/h, possibly +inf.
  double ell() const {
    switch (kind_) {
      case Kind::power: return p_ > 1.0 ? kInf : scale_;
      case Kind::linear_capped: return scale_ * cap_;
      case Kind::custom: return scale_ * slopes_.back();
    }
    return kInf;
  }

  /// β(h) = hα'(h) − α(h).
  double beta(double h) const {
    if (h <= 0.0) return 0.0;
    if (kind_ == Kind::power) return scale_ * (1.0 - 1.0 / p_) * std::pow(h, p_);
    return std::max(0.0, h * alpha_prime(h) - alpha(h));
  }

  /// α*(u) = sup_{h ≥ 0} {hu − α(h)}.
  double legendre_dual(double u) const {
    if (!(u >= 0.0)) fail(ErrorKind::ValidationError, "Legendre dual needs u >= 0");
    if (u == 0.0) return 0.0;
    const double l = ell();
    if (u > l)
      fail(ErrorKind::DualDiverges,
           "u = " + std::to_string(u) + " exceeds the asymptotic slope " + std::to_string(l));
    const double v = u / scale_;
    switch (kind_) {
      case Kind::power: {
        if (p_ == 1.0) return 0.0;
        const double q = p_ / (p_ - 1.0);
        return scale_ * std::pow(v, q) / q;
      }
      case Kind::linear_capped: return scale_ * 0.5 * v * v;
      case Kind::custom: return scale_ * custom_dual(v);
    }
    return 0.0;
  }

  /// Smallest h ≥ 0 with α(h) ≥ v.
  double inverse(double v) const {
    if (v <= 0.0) return 0.0;
    if (kind_ == Kind::power) return std::pow(p_ * v / scale_, 1.0 / p_);
    double hi = 1.0;
    while (alpha(hi) < v) {
      hi *= 2.0;
      if (!std::isfinite(hi)) return kInf;
    }
    return bisect_root([&](double h) { return alpha(h) - v; }, 0.0, hi, 1e-12);
  }

  CostProfile exponents() const {
    if (kind_ == Kind::power) {
      if (!(p_ > 1.0))
        fail(ErrorKind::ParameterOutOfRange,
             "exponent p_alpha must exceed 1; power(1) has p_alpha = 1");
      return {p_, p_, std::pow(2.0, p_), false, 0.0, 0.0, 0};
    }
    CostProfile prof;
    prof.estimated = true;
    prof.grid_min = 1e-6;
    prof.grid_max = 1e6;
    prof.grid_points = 10000;
    double hi = 0.0, d2 = 0.0;
    const double log_lo = std::log(prof.grid_min);
    const double log_hi = std::log(prof.grid_max);
    for (std::size_t i = 0; i < prof.grid_points; ++i) {
      const double x = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                             static_cast<double>(prof.grid_points - 1));
      const double a = base_alpha(x);
      if (!(a > 0.0)) {
        fail(ErrorKind::NotDelta2, "alpha vanishes at h = " + std::to_string(x));
      }
      const double ratio = x * base_alpha_prime(x) / a;
      hi = std::max(hi, ratio);
      d2 = std::max(d2, base_alpha(2.0 * x) / a);
    }
    if (d2 > 1e12)
      fail(ErrorKind::NotDelta2, "sampled alpha(2x)/alpha(x) reaches " + std::to_string(d2));
    // Both non-power kinds end in an affine tail, where the ratio tends to 1.
    prof.r_alpha = 1.0;
    prof.p_alpha = hi;
    prof.delta2_constant = kind_ == Kind::linear_capped ? 4.0 : d2;
    if (kind_ == Kind::linear_capped) prof.p_alpha = 2.0;
    if (!(prof.p_alpha > 1.0))
      fail(ErrorKind::ParameterOutOfRange, "estimated p_alpha does not exceed 1");
    return prof;
  }

  std::string describe() const {
    std::string s;
    switch (kind_) {
      case Kind::power: s = "power(p=" + format_number(p_) + ")"; break;
      case Kind::linear_capped: s = "linear_capped(cap=" + format_number(cap_) + ")"; break;
      case Kind::custom: s = "custom(" + std::to_string(samples_.size()) + " samples)"; break;
    }
    if (scale_ != 1.0) s = format_number(scale_) + "*" + s;
    return s;
  }

 private:
  static std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  double base_alpha(double h) const {
    if (h <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::power: return std::pow(h, p_) / p_;
      case Kind::linear_capped:
        return h <= cap_ ? 0.5 * h * h : cap_ * h - 0.5 * cap_ * cap_;
      case Kind::custom: return custom_alpha(h);
    }
    return 0.0;
  }

  double base_alpha_prime(double h) const {
    if (h <= 0.0) {
      if (kind_ == Kind::custom) return slopes_.front();
      if (kind_ == Kind::power && p_ == 1.0) return 1.0;
      return 0.0;
    }
    switch (kind_) {
      case Kind::power: return p_ == 2.0 ? h : std::pow(h, p_ - 1.0);
      case Kind::linear_capped: return std::min(h, cap_);
      case Kind::custom: return custom_alpha_prime(h);
    }
    return 0.0;
  }

  // Per interval [h_i, h_{i+1}] the derivative is piecewise linear:
  // s_i -> knot_slope over [h_i, knot], knot_slope -> s_{i+1} after it.
  struct Piece {
    double h0, len, a0, s0, s1, w, sbar;
  };

  void build_interpolant(const std::vector<std::pair<double, double>>& samples) {
    samples_ = samples;
    const std::size_t m = samples.size() - 1;
    std::vector<double> secant(m);
    for (std::size_t i = 0; i < m; ++i) {
      secant[i] = (samples[i + 1].second - samples[i].second) /
                  (samples[i + 1].first - samples[i].first);
      if (secant[i] < -1e-10)
        fail(ErrorKind::ValidationError, "custom cost is decreasing on sample interval " +
                                             std::to_string(i), {i});
      if (i > 0 && secant[i] < secant[i - 1] - 1e-10)
        fail(ErrorKind::ValidationError,
             "custom cost is not convex at sample " + std::to_string(i), {i});
      secant[i] = std::max(secant[i], 0.0);
      if (i > 0) secant[i] = std::max(secant[i], secant[i - 1]);
    }
    slopes_.assign(m + 1, 0.0);
    if (m == 1) {
      slopes_[0] = slopes_[1] = secant[0];
    } else {
      for (std::size_t i = 1; i < m; ++i) slopes_[i] = 0.5 * (secant[i - 1] + secant[i]);
      slopes_[0] = std::max(0.0, 2.0 * secant[0] - slopes_[1]);
      slopes_[m] = 2.0 * secant[m - 1] - slopes_[m - 1];
    }
    pieces_.clear();
    for (std::size_t i = 0; i < m; ++i) {
      Piece pc{samples[i].first, samples[i + 1].first - samples[i].first, samples[i].second,
               slopes_[i], slopes_[i + 1], 1.0, slopes_[i + 1]};
      const double d = secant[i];
      const double spread = pc.s1 - pc.s0;
      if (spread <= 1e-15 * std::max(1.0, std::abs(pc.s1))) {
        pc.s0 = pc.s1 = pc.sbar = d;
        pc.w = 1.0;
      } else if (d >= 0.5 * (pc.s0 + pc.s1)) {
        pc.sbar = pc.s1;
        pc.w = std::clamp(2.0 * (pc.s1 - d) / spread, 0.0, 1.0);
      } else {
        pc.sbar = pc.s0;
        pc.w = std::clamp(1.0 - 2.0 * (d - pc.s0) / spread, 0.0, 1.0);
      }
      pieces_.push_back(pc);
    }
  }

  const Piece* locate(double h) const {
    if (h >= samples_.back().first) return nullptr;
    auto it = std::upper_bound(samples_.begin(), samples_.end(), h,
                               [](double v, const auto& s) { return v < s.first; });
    const std::size_t idx = static_cast<std::size_t>(it - samples_.begin()) - 1;
    return &pieces_[idx];
  }

  double custom_alpha(double h) const {
    const Piece* pc = locate(h);
    if (!pc) return samples_.back().second + slopes_.back() * (h - samples_.back().first);
    const double tau = h - pc->h0;
    const double knot = pc->w * pc->len;
    if (tau <= knot) {
      const double curv = knot > 0.0 ? (pc->sbar - pc->s0) / knot : 0.0;
      return pc->a0 + pc->s0 * tau + 0.5 * curv * tau * tau;
    }
    const double rest = pc->len - knot;
    const double curv = rest > 0.0 ? (pc->s1 - pc->sbar) / rest : 0.0;
    const double e = tau - knot;
    return pc->a0 + 0.5 * knot * (pc->s0 + pc->sbar) + pc->sbar * e + 0.5 * curv * e * e;
  }

  double custom_alpha_prime(double h) const {
    const Piece* pc = locate(h);
    if (!pc) return slopes_.back();
    const double tau = h - pc->h0;
    const double knot = pc->w * pc->len;
    if (tau <= knot) return knot > 0.0 ? pc->s0 + (pc->sbar - pc->s0) * tau / knot : pc->sbar;
    const double rest = pc->len - knot;
    return rest > 0.0 ? pc->sbar + (pc->s1 - pc->sbar) * (tau - knot) / rest : pc->s1;
  }

  // Ternary search of the concave map h -> hv − α(h) on a bracket grown
  // until α'(H) >= v.
  double custom_dual(double v) const {
    double hi = std::max(1.0, samples_.back().first);
    while (custom_alpha_prime(hi) < v) hi *= 2.0;
    double lo = 0.0;
    auto obj = [&](double h) { return h * v - custom_alpha(h); };
    for (int it = 0; it < 300 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (obj(m1) < obj(m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    return std::max(0.0, obj(0.5 * (lo + hi)));
  }

  Kind kind_ = Kind::power;
  double p_ = 2.0;
  double cap_ = 0.0;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> samples_;
  std::vector<double> slopes_;
  std::vector<Piece> pieces_;
};

inline double legendre_dual(const CostFunction& cost, double u) { return cost.legendre_dual(u); }
inline double beta(const CostFunction& cost, double h) { return cost.beta(h); }
inline CostProfile exponents(const CostFunction& cost) { return cost.exponents(); }

}  // namespace hopflax
