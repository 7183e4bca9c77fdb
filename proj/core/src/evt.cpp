#include "fraudscore/evt.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fraudscore/error.hpp"

namespace fraudscore::evt {

GumbelParams gumbel_params(std::size_t m) {
  if (m <= 1) {
    throw Error(ErrorKind::DegenerateCount,
                "Gumbel parameters are undefined for m = " + std::to_string(m));
  }
  const double two_ln_m = 2.0 * std::log(static_cast<double>(m));
  const double root = std::sqrt(two_ln_m);
  const double ln_ln_m = std::log(std::log(static_cast<double>(m)));
  const double ln_2pi = std::log(2.0 * std::numbers::pi);
  return {root - (ln_ln_m + ln_2pi) / (2.0 * root), 1.0 / root, m};
}

double evp_given_runlength(double z, const GumbelParams& params) noexcept {
  return std::exp(-std::exp(-(z - params.mu) / params.sigma));
}

double one_sided_gaussian_cdf(double z) noexcept {
  if (z <= 0.0) return 0.0;
  return std::erf(z / std::numbers::sqrt2);
}

double evp_for_count(double z, std::size_t m) {
  if (m == 0) throw Error(ErrorKind::DegenerateCount, "run length must be >= 1");
  if (m == 1) return one_sided_gaussian_cdf(z);
  return evp_given_runlength(z, gumbel_params(m));
}

double RunLengthState::step(double z) {
  double p_ev = 0.0;
  for (std::size_t m = 1; m <= mass_.size(); ++m) {
    const double w = mass_[m - 1];
    if (w != 0.0) p_ev += evp_for_count(z, m) * w;
  }

  // P(l = 1) = P_EV(t); P(l = m) = (1 - P_EV(t)) P_prev(l = m - 1)
  std::vector<double> next(mass_.size() + 1);
  next[0] = p_ev;
  for (std::size_t m = 1; m < next.size(); ++m) next[m] = (1.0 - p_ev) * mass_[m - 1];

  double pruned = 0.0;
  while (next.size() > 1 && next.back() < kPruneBelow) {
    pruned += next.back();
    next.pop_back();
  }
  if (pruned > 0.0) {
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
  }
  mass_ = std::move(next);
  history_.push_back(p_ev);
  return p_ev;
}

std::pair<double, RunLengthState> evp_step(RunLengthState state, double z) {
  const double p = state.step(z);
  return {p, std::move(state)};
}

bool is_outlier(double p_ev, double theta_ev) noexcept { return p_ev > theta_ev; }

double standardize(double y, double mean, double variance, EvpSide side) {
  if (!(variance > 0.0)) {
    throw Error(ErrorKind::ZeroVariance, "standardization needs a positive variance");
  }
  const double z = (y - mean) / std::sqrt(variance);
  if (side == EvpSide::Upper) return z > 0.0 ? z : 0.0;
  return std::abs(z);
}

}  // namespace fraudscore::evt
