#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "vrsg/errors.hpp"
#include "vrsg/sampling.hpp"

using namespace vrsg;
using namespace vrsg::testing;

namespace {

LipschitzInfo info_of(std::vector<double> l) {
  LipschitzInfo info;
  info.per_component = l;
  for (double v : l) info.degenerate.push_back(v == 0.0);
  info.l_avg = std::accumulate(l.begin(), l.end(), 0.0) / static_cast<double>(l.size());
  info.l_max = *std::max_element(l.begin(), l.end());
  return info;
}

double chi_square(const std::vector<double>& p, std::uint64_t seed, std::size_t draws) {
  SamplingDistribution dist(p, seed);
  std::vector<double> counts(p.size(), 0.0);
  for (std::size_t k = 0; k < draws; ++k) counts[dist.draw()] += 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double e = p[i] * static_cast<double>(draws);
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  return stat;
}

}  // namespace

TEST_CASE("splitmix64 reference outputs") {
  // Published reference sequence for seed 1234567.
  SplitMix64 g(1234567);
  CHECK(g() == 6457827717110365317ULL);
  CHECK(g() == 3203168211198807973ULL);
  CHECK(g() == 9817491932198370423ULL);
  CHECK(g() == 4593380528125082431ULL);
  CHECK(g() == 16408922859458223821ULL);
}

TEST_CASE("uniform doubles lie in [0, 1)") {
  SplitMix64 g(99);
  for (int k = 0; k < 10000; ++k) {
    const double u = g.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("split streams differ from the parent") {
  SplitMix64 a(5);
  SplitMix64 child = a.split();
  SplitMix64 b(5);
  b();
  CHECK(child() != b());
}

TEST_CASE("build_distribution examples") {
  const auto prop = build_distribution(SamplingMode::LipschitzProportional, info_of({1, 3}), 1);
  CHECK(prop.p(0) == 0.25);
  CHECK(prop.p(1) == 0.75);
  const auto uni = build_distribution(SamplingMode::Uniform, info_of({1, 2, 3, 4}), 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(uni.p(i) == 0.25);

  // Floor a zero-Lipschitz component at 1e-12 / n, then renormalize.
  const auto floored = build_distribution(SamplingMode::LipschitzProportional, info_of({1, 0, 3}), 1);
  const double floor = 1e-12 / 3.0;
  CHECK(floored.p(1) == doctest::Approx(floor / (1.0 + floor)).epsilon(1e-12));
  CHECK(floored.p(0) == doctest::Approx(0.25).epsilon(1e-11));
  CHECK(floored.p(2) == doctest::Approx(0.75).epsilon(1e-11));
  CHECK(floored.p(1) > 0.0);

  CHECK_THROWS_AS(build_distribution(SamplingMode::LipschitzProportional, info_of({0, 0}), 1),
                  InvalidArgument);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(SamplingDistribution({0.5, 0.6}, 1), InvalidArgument);
  CHECK_THROWS_AS(SamplingDistribution({1.0, 0.0}, 1), InvalidArgument);
  CHECK_THROWS_AS(SamplingDistribution({-0.5, 1.5}, 1), InvalidArgument);
  CHECK_THROWS_AS(SamplingDistribution({}, 1), InvalidArgument);
  const SamplingDistribution d({0.2, 0.3, 0.5}, 1);
  const auto& c = d.cumulative();
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK(std::abs(c.back() - 1.0) <= 1e-12);
}

TEST_CASE("single-point distribution always returns 0") {
  SamplingDistribution d({1.0}, 42);
  for (int k = 0; k < 100; ++k) CHECK(d.draw() == 0);
  CHECK(d.draw_count() == 100);
}

TEST_CASE("binomial frequency within three sigma") {
  SamplingDistribution d({0.25, 0.75}, 2024);
  const std::size_t draws = 100000;
  std::size_t ones = 0;
  for (std::size_t k = 0; k < draws; ++k) ones += d.draw() == 1;
  const double freq = static_cast<double>(ones) / static_cast<double>(draws);
  const double sigma = std::sqrt(0.75 * 0.25 / static_cast<double>(draws));
  CHECK(std::abs(freq - 0.75) <= 3 * sigma);
}

TEST_CASE("identical seeds give identical index streams") {
  SamplingDistribution a({0.1, 0.2, 0.3, 0.4}, 77);
  SamplingDistribution b({0.1, 0.2, 0.3, 0.4}, 77);
  for (int k = 0; k < 1000; ++k) CHECK(a.draw() == b.draw());
}

TEST_CASE("chi-square goodness of fit at significance 1e-4") {
  const std::vector<double> p = {0.05, 0.1, 0.15, 0.2, 0.25, 0.125, 0.125};
  const boost::math::chi_squared chi(static_cast<double>(p.size() - 1));
  const double critical = boost::math::quantile(boost::math::complement(chi, 1e-4));
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    CHECK(chi_square(p, seed, 100000) < critical);
  }
}

TEST_CASE("inverse-CDF search brackets u") {
  const SamplingDistribution d({0.1, 0.2, 0.3, 0.4}, 0);
  const auto& c = d.cumulative();
  SplitMix64 g(8);
  for (int k = 0; k < 5000; ++k) {
    const double u = g.uniform();
    const std::size_t i = d.index_for(u);
    const double lo = i == 0 ? 0.0 : c[i - 1];
    CHECK(lo <= u);
    CHECK(u < c[i]);
  }
  CHECK(d.index_for(0.1) == 1);
  CHECK(d.index_for(0.0) == 0);
}
