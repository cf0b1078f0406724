// population.hpp
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nrd {

// Rasche-family Lorenz curve parameters; the model fixes alpha = 1/2, beta = 1,
// which reduces the family to y = 1 - (1 - x)^(1/2).
inline constexpr double kLorenzAlpha = 0.5;
inline constexpr double kLorenzBeta = 1.0;

// Cumulative wealth share held by the poorest fraction x of the population.
// Throws std::domain_error outside [0, 1].
double lorenz(double x);

// Fixed resident endowments w_1 < w_2 < ... < w_n, each in (0, 1), summing to
// less than one. Resident j (0-based here) is the (j+1)-th poorest.
class EndowmentProfile {
 public:
  EndowmentProfile() = default;
  explicit EndowmentProfile(std::vector<double> w);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t j) const { return w_[j]; }
  std::span<const double> values() const { return w_; }
  double min() const { return w_.front(); }
  double max() const { return w_.back(); }
  double sum() const;

 private:
  std::vector<double> w_;
};

// Sample points x_i = i / (n + 2), i = 1..n+1, evaluated on the Lorenz curve;
// endowments are the n consecutive differences. Throws for n = 0.
EndowmentProfile generate_endowments(std::size_t n);

}  // namespace nrd
