#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "epcde/stats.hpp"

using namespace epcde::stats;

TEST_CASE("normal pdf/cdf reference values") {
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(normal_pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_cdf(-8.0) < 1e-14);
}

TEST_CASE("normal_quantile inverts the cdf") {
  for (double p : {1e-8, 1e-3, 0.1, 0.25, 0.5, 0.8, 0.999, 1.0 - 1e-9}) {
    const double z = normal_quantile(p);
    CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-10));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1).epsilon(1e-14));
}

TEST_CASE("mean and sample sd") {
  std::vector<double> v{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(mean(v) == doctest::Approx(5.0));
  // sample variance (n-1 denominator) = 32/7
  CHECK(sample_sd(v) == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-14));
}

TEST_CASE("type-7 quantile with linear interpolation") {
  std::vector<double> v{3.0, 1.0, 4.0, 2.0};  // unsorted on purpose
  CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("median of an even count is the midpoint of the two middle values") {
  std::vector<double> v{1.0, 9.0, 3.0, 7.0};
  CHECK(median(v) == doctest::Approx(5.0));
  std::vector<double> odd{5.0, 1.0, 3.0};
  CHECK(median(odd) == doctest::Approx(3.0));
}

TEST_CASE("interquartile range of a symmetric sample") {
  std::vector<double> v;
  for (int i = 1; i <= 101; ++i) v.push_back(static_cast<double>(i));
  CHECK(interquartile_range(v) == doctest::Approx(50.0));
}

TEST_CASE("hash64 separates nearby inputs") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {1ULL, 2ULL, 42ULL}) {
    for (std::uint64_t n : {100ULL, 150ULL}) {
      for (std::uint64_t rep = 0; rep < 50; ++rep) {
        seen.insert(hash64(seed, n, rep));
      }
    }
  }
  CHECK(seen.size() == 3 * 2 * 50);
  CHECK(hash64(1, 2, 3) != hash64(3, 2, 1));
}

TEST_CASE("Rng is deterministic and in range") {
  Rng a(12345), b(12345), c(54321);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    all_equal = all_equal && (u == b.uniform());
    any_diff = any_diff || (u != c.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("Rng uniforms have the right first moments") {
  Rng r(7);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    s += u;
    s2 += u * u;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}
