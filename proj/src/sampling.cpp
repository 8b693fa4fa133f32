#include "vrsg/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrsg/errors.hpp"
#include "vrsg/problem.hpp"

namespace vrsg {

namespace {

double sum_tolerance(std::size_t n) {
  return 1e-12 + 4.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
}

}  // namespace

SamplingDistribution::SamplingDistribution(std::vector<double> p, std::uint64_t seed)
    : p_(std::move(p)), seed_(seed), rng_(seed) {
  if (p_.empty()) throw InvalidDistribution("distribution over zero components");
  cumulative_.resize(p_.size());
  double running = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!(p_[i] > 0.0) || !(p_[i] <= 1.0)) {
      throw InvalidDistribution("p_" + std::to_string(i) + " = " + std::to_string(p_[i]) +
                                " is outside (0, 1]");
    }
    running += p_[i];
    cumulative_[i] = running;
  }
  if (std::abs(running - 1.0) > sum_tolerance(p_.size())) {
    throw InvalidDistribution("probabilities sum to " + std::to_string(running) + ", not 1");
  }
}

std::size_t SamplingDistribution::index_for(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto i = static_cast<std::size_t>(it - cumulative_.begin());
  // u can land in [cumulative.back(), 1) when rounding leaves the total just under 1.
  return std::min(i, p_.size() - 1);
}

std::size_t SamplingDistribution::draw() {
  ++draws_;
  if (p_.size() == 1) {
    rng_();
    return 0;
  }
  return index_for(rng_.uniform());
}

SamplingDistribution build_distribution(SamplingMode mode, const LipschitzInfo& info,
                                        std::uint64_t seed) {
  const std::size_t n = info.size();
  if (n == 0) throw InvalidArgument("cannot build a distribution over zero components");
  std::vector<double> p(n);
  if (mode == SamplingMode::Uniform) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
    return SamplingDistribution(std::move(p), seed);
  }

  double total = 0.0;
  for (double l : info.per_component) total += l;
  if (!(total > 0.0)) {
    throw InvalidArgument("Lipschitz-proportional sampling needs at least one nonzero L_i");
  }
  const double floor = kDegenerateFloor / static_cast<double>(n);
  bool floored = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (info.per_component[i] > 0.0) {
      p[i] = info.per_component[i] / total;
    } else {
      p[i] = floor;
      floored = true;
    }
  }
  if (floored) {
    double s = 0.0;
    for (double v : p) s += v;
    for (double& v : p) v /= s;
  }
  return SamplingDistribution(std::move(p), seed);
}

}  // namespace vrsg
