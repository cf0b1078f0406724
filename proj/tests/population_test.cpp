#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "nrd/population.hpp"

using nrd::generate_endowments;
using nrd::lorenz;

TEST_CASE("lorenz endpoints and exact values") {
  CHECK(lorenz(0.0) == 0.0);
  CHECK(lorenz(1.0) == 1.0);
  CHECK(lorenz(0.75) == 0.5);
  CHECK_THROWS_AS(lorenz(-0.01), std::domain_error);
  CHECK_THROWS_AS(lorenz(1.01), std::domain_error);
  CHECK_THROWS_AS(lorenz(std::nan("")), std::domain_error);
}

TEST_CASE("generate_endowments worked examples") {
  SUBCASE("n = 1") {
    const auto w = generate_endowments(1);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == doctest::Approx(std::sqrt(2.0 / 3.0) - std::sqrt(1.0 / 3.0)).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(0.23915).epsilon(1e-4));
  }
  SUBCASE("n = 2") {
    // x = 1/4, 1/2, 3/4 -> y = 1 - sqrt(3/4), 1 - sqrt(1/2), 1/2
    const auto w = generate_endowments(2);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(std::sqrt(0.75) - std::sqrt(0.5)).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(std::sqrt(0.5) - 0.5).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(0.15892).epsilon(1e-4));
    CHECK(w[1] == doctest::Approx(0.20711).epsilon(1e-4));
  }
  SUBCASE("n = 289 telescopes") {
    const auto w = generate_endowments(289);
    CHECK(w.sum() == doctest::Approx(lorenz(290.0 / 291.0) - lorenz(1.0 / 291.0)).epsilon(1e-12));
    CHECK(w.sum() < 1.0);
  }
  CHECK_THROWS_AS(generate_endowments(0), std::invalid_argument);
}

TEST_CASE("endowment invariants up to n = 1000") {
  for (std::size_t n = 1; n <= 1000; ++n) {
    const auto w = generate_endowments(n);
    REQUIRE(w.size() == n);
    bool ok = w[0] > 0.0 && w[n - 1] < 1.0;
    for (std::size_t j = 1; j < n; ++j) ok = ok && w[j] > w[j - 1];
    CHECK(ok);
    const double denom = static_cast<double>(n + 2);
    CHECK(std::abs(w.sum() - (lorenz((n + 1) / denom) - lorenz(1.0 / denom))) <= 1e-12);
    CHECK(w.sum() < 1.0);
  }
}

TEST_CASE("generate_endowments is bitwise deterministic") {
  const auto a = generate_endowments(500);
  const auto b = generate_endowments(500);
  CHECK(std::memcmp(a.values().data(), b.values().data(), 500 * sizeof(double)) == 0);
}

TEST_CASE("EndowmentProfile rejects invalid vectors") {
  CHECK_THROWS_AS(nrd::EndowmentProfile({0.2, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(nrd::EndowmentProfile({0.0, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(nrd::EndowmentProfile({0.3, 0.2}), std::invalid_argument);
  CHECK_NOTHROW(nrd::EndowmentProfile({0.2, 0.6}));
}
