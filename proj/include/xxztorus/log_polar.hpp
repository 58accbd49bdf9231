#pragma once

// Complex numbers as (log|z|, arg z) pairs, and sin/cos/cot that stay finite for
// large imaginary arguments.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace xxz {

struct LogPolar {
  double log_abs = -std::numeric_limits<double>::infinity();  // -inf encodes zero
  double phase = 0.0;

  static LogPolar one() { return {0.0, 0.0}; }

  static LogPolar from(std::complex<double> z) {
    if (z == std::complex<double>(0.0, 0.0)) return {};
    return {std::log(std::abs(z)), std::arg(z)};
  }

  bool is_zero() const { return log_abs == -std::numeric_limits<double>::infinity(); }

  /// exp(log_abs - shift) * exp(i phase).
  std::complex<double> scaled(double shift) const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(log_abs - shift), phase);
  }

  std::complex<double> value() const { return scaled(0.0); }
};

inline LogPolar operator*(LogPolar a, LogPolar b) {
  return {a.log_abs + b.log_abs, a.phase + b.phase};
}

inline LogPolar operator/(LogPolar a, LogPolar b) {
  return {a.log_abs - b.log_abs, a.phase - b.phase};
}

inline LogPolar pow(LogPolar a, int n) { return {n * a.log_abs, n * a.phase}; }

namespace detail {
inline constexpr double kLn2 = std::numbers::ln2;
inline constexpr double kSwitchImag = 1.0;
}  // namespace detail

/// log-polar form of sin z.
inline LogPolar log_sin(std::complex<double> z) {
  const double x = z.real();
  const double y = z.imag();
  if (y > detail::kSwitchImag) {
    // sin z = (i/2) e^{-iz} (1 - e^{2iz})
    const auto q = std::exp(std::complex<double>(0.0, 2.0) * z);
    const auto tail = LogPolar::from(1.0 - q);
    return {y - detail::kLn2 + tail.log_abs, std::numbers::pi / 2 - x + tail.phase};
  }
  if (y < -detail::kSwitchImag) {
    // sin z = (-i/2) e^{iz} (1 - e^{-2iz})
    const auto p = std::exp(std::complex<double>(0.0, -2.0) * z);
    const auto tail = LogPolar::from(1.0 - p);
    return {-y - detail::kLn2 + tail.log_abs, x - std::numbers::pi / 2 + tail.phase};
  }
  return LogPolar::from(std::sin(z));
}

/// log-polar form of cos z.
inline LogPolar log_cos(std::complex<double> z) {
  const double x = z.real();
  const double y = z.imag();
  if (y > detail::kSwitchImag) {
    const auto q = std::exp(std::complex<double>(0.0, 2.0) * z);
    const auto tail = LogPolar::from(1.0 + q);
    return {y - detail::kLn2 + tail.log_abs, -x + tail.phase};
  }
  if (y < -detail::kSwitchImag) {
    const auto p = std::exp(std::complex<double>(0.0, -2.0) * z);
    const auto tail = LogPolar::from(1.0 + p);
    return {-y - detail::kLn2 + tail.log_abs, x + tail.phase};
  }
  return LogPolar::from(std::cos(z));
}

/// cot z without overflow for large |Im z|.
inline std::complex<double> stable_cot(std::complex<double> z) {
  const std::complex<double> i(0.0, 1.0);
  if (z.imag() > 0.0) {
    const auto q = std::exp(2.0 * i * z);
    return i * (q + 1.0) / (q - 1.0);
  }
  const auto p = std::exp(-2.0 * i * z);
  return i * (1.0 + p) / (1.0 - p);
}

/// cot(a + d) - cot(a) = -sin d / (sin a sin(a + d)), accurate for tiny d.
inline std::complex<double> cot_increment(std::complex<double> a, std::complex<double> d) {
  if (d == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
  const LogPolar num = log_sin(d);
  const LogPolar den = log_sin(a) * log_sin(a + d);
  return -(num / den).value();
}

}  // namespace xxz
