#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "errors.hpp"

namespace whlab {

enum class WeightFamily { constant, power, exponential, capped_exponential, dyadic_zigzag, custom };

inline std::string to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::constant: return "constant";
    case WeightFamily::power: return "power";
    case WeightFamily::exponential: return "exponential";
    case WeightFamily::capped_exponential: return "capped_exponential";
    case WeightFamily::dyadic_zigzag: return "dyadic_zigzag";
    case WeightFamily::custom: return "custom";
  }
  return "?";
}

// Zigzag profile: slope +1 on [0,1), then slope (-1)^(k+1) on [2^k, 2^(k+1)).
inline double zigzag_profile(double x) {
  if (x < 1.0) return x;
  int k = static_cast<int>(std::floor(std::log2(x)));
  double start = std::ldexp(1.0, k);
  // guard against log2 rounding at block boundaries
  if (start > x) start = std::ldexp(1.0, --k);
  else if (2.0 * start <= x) start = std::ldexp(1.0, ++k);
  double s0 = (std::ldexp(k % 2 == 0 ? 1.0 : -1.0, k) + 2.0) / 3.0;  // ((-2)^k + 2)/3
  double slope = (k % 2 == 0) ? -1.0 : 1.0;
  return s0 + slope * (x - start);
}

// Positive weight on R+ evaluated through log omega, so that large
// exponents never materialize.
class Weight {
 public:
  using LogFn = std::function<double(double)>;

  static Weight constant(double c = 1.0) {
    if (!(c > 0.0)) throw WeightError("constant weight must be positive");
    Weight w(WeightFamily::constant, c, 0.0);
    return w;
  }
  static Weight power(double alpha) { return Weight(WeightFamily::power, alpha, 0.0); }
  static Weight exponential(double beta) { return Weight(WeightFamily::exponential, beta, 0.0); }
  static Weight capped_exponential(double beta, double cap) {
    if (!(cap > 0.0)) throw WeightError("capped_exponential needs a positive cap");
    return Weight(WeightFamily::capped_exponential, beta, cap);
  }
  static Weight dyadic_zigzag(double beta) { return Weight(WeightFamily::dyadic_zigzag, beta, 0.0); }
  static Weight custom(std::string name, LogFn log_omega) {
    Weight w(WeightFamily::custom, 0.0, 0.0);
    w.name_ = std::move(name);
    w.custom_ = std::make_shared<LogFn>(std::move(log_omega));
    return w;
  }

  WeightFamily family() const { return family_; }
  double param1() const { return p1_; }
  double param2() const { return p2_; }
  const std::string& name() const { return name_; }

  std::string describe() const {
    std::ostringstream os;
    switch (family_) {
      case WeightFamily::constant: os << "constant(" << p1_ << ")"; break;
      case WeightFamily::power: os << "power(alpha=" << p1_ << ")"; break;
      case WeightFamily::exponential: os << "exponential(beta=" << p1_ << ")"; break;
      case WeightFamily::capped_exponential: os << "capped_exponential(beta=" << p1_ << ", cap=" << p2_ << ")"; break;
      case WeightFamily::dyadic_zigzag: os << "dyadic_zigzag(beta=" << p1_ << ")"; break;
      case WeightFamily::custom: os << "custom(" << name_ << ")"; break;
    }
    return os.str();
  }

  double log_value(double x) const {
    switch (family_) {
      case WeightFamily::constant: return std::log(p1_);
      case WeightFamily::power: return p1_ * std::log1p(std::max(x, 0.0));
      case WeightFamily::exponential: return p1_ * x;
      case WeightFamily::capped_exponential: return p1_ * std::min(x, p2_);
      case WeightFamily::dyadic_zigzag: return p1_ * zigzag_profile(std::max(x, 0.0));
      case WeightFamily::custom: {
        double v = (*custom_)(x);
        if (std::isnan(v) || v == INFINITY)
          throw WeightError("weight " + name_ + " is not finite and positive at x = " + std::to_string(x));
        if (v == -INFINITY)
          throw WeightError("weight " + name_ + " vanishes at x = " + std::to_string(x));
        return v;
      }
    }
    return 0.0;
  }

  double value(double x) const { return std::exp(log_value(x)); }

  bool is_constant() const { return family_ == WeightFamily::constant; }

  // log sup_{x >= 0} omega(x+n)/omega(x) (n may be negative: then
  // sup omega(x)/omega(x+|n|)). Only families with a closed form answer.
  std::optional<double> exact_log_ratio(double n) const {
    const double m = std::abs(n);
    const bool up = n >= 0.0;
    switch (family_) {
      case WeightFamily::constant: return 0.0;
      case WeightFamily::exponential: return p1_ * n;
      case WeightFamily::power: {
        // (1+x+m)^a/(1+x)^a: maximal at x = 0 when the exponent sign matches the direction
        double s = up ? p1_ : -p1_;
        return s > 0.0 ? s * std::log1p(m) : 0.0;
      }
      case WeightFamily::capped_exponential: {
        double s = up ? p1_ : -p1_;
        return s > 0.0 ? s * std::min(m, p2_) : 0.0;
      }
      default: return std::nullopt;
    }
  }

 private:
  Weight(WeightFamily f, double a, double b) : family_(f), p1_(a), p2_(b) {}

  WeightFamily family_ = WeightFamily::constant;
  double p1_ = 1.0;
  double p2_ = 0.0;
  std::string name_;
  std::shared_ptr<LogFn> custom_;
};

}  // namespace whlab
