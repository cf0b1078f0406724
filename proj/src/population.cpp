#include "nrd/population.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace nrd {

double lorenz(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("lorenz: x must lie in [0, 1], got " + std::to_string(x));
  }
  // General Rasche form: y = (1 - (1 - x)^alpha)^(1 / beta).
  static_assert(kLorenzBeta == 1.0);
  return 1.0 - std::sqrt(1.0 - x);
}

EndowmentProfile::EndowmentProfile(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("endowment profile is empty");
  for (std::size_t j = 0; j < w_.size(); ++j) {
    if (!(w_[j] > 0.0 && w_[j] < 1.0)) {
      throw std::invalid_argument("endowment outside (0, 1)");
    }
    if (j > 0 && !(w_[j] > w_[j - 1])) {
      throw std::invalid_argument("endowments must be strictly increasing");
    }
  }
}

double EndowmentProfile::sum() const { return std::accumulate(w_.begin(), w_.end(), 0.0); }

EndowmentProfile generate_endowments(std::size_t n) {
  if (n == 0) throw std::invalid_argument("generate_endowments: need at least one resident");
  const double denom = static_cast<double>(n + 2);
  std::vector<double> w(n);
  double prev = lorenz(1.0 / denom);
  for (std::size_t j = 0; j < n; ++j) {
    const double next = lorenz(static_cast<double>(j + 2) / denom);
    w[j] = next - prev;
    prev = next;
  }
  return EndowmentProfile(std::move(w));
}

}  // namespace nrd
