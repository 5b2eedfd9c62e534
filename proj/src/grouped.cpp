#include "gedecomp/grouped.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "gedecomp/errors.hpp"
#include "gedecomp/kernels.hpp"
#include "optimize.hpp"

namespace gedecomp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDefaultStep = 0.1;
constexpr std::size_t kAdaptBatch = 50;

// Positive parameters are sampled on the log scale; the lognormal xi is not.
bool log_scaled(Family family, std::size_t index) {
  return !(family == Family::lognormal && index == 0);
}

std::vector<double> to_unconstrained(Family family, std::span<const double> native) {
  std::vector<double> eta(native.begin(), native.end());
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (log_scaled(family, i)) eta[i] = std::log(eta[i]);
  }
  return eta;
}

std::vector<double> to_native(Family family, std::span<const double> eta) {
  std::vector<double> x(eta.begin(), eta.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (log_scaled(family, i)) x[i] = std::exp(x[i]);
  }
  return x;
}

// Log posterior density of the unconstrained coordinates, including the
// Jacobian of the log transform.
class LogTarget {
 public:
  LogTarget(Family family, const GroupedSample& data) : family_(family), data_(data) {}

  double operator()(std::span<const double> eta) const {
    const auto x = to_native(family_, eta);
    double jacobian = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i])) return kNegInf;
      if (log_scaled(family_, i)) {
        if (!(x[i] > 0.0)) return kNegInf;
        jacobian += eta[i];
      }
    }
    const auto params = from_vector(family_, x);
    const double prior = log_prior(params);
    if (!std::isfinite(prior)) return kNegInf;
    const double ll = log_likelihood(params, data_);
    if (std::isnan(ll)) return kNegInf;
    return ll + prior + jacobian;
  }

 private:
  Family family_;
  const GroupedSample& data_;
};

// Empirical quantile from the bracket cdf by linear interpolation inside a
// bounded bracket. Empty when the quantile lies in the open top bracket.
std::optional<double> bracket_quantile(const GroupedSample& data, double u) {
  const auto c = data.boundaries();
  const auto y = data.counts();
  double cum = 0.0;
  for (std::size_t g = 0; g < y.size(); ++g) {
    const double next = cum + y[g] / data.total();
    if (next >= u && y[g] > 0.0) {
      if (g + 1 == y.size()) return std::nullopt;
      const double frac = (u - cum) / (next - cum);
      return c[g] + frac * (c[g + 1] - c[g]);
    }
    cum = next;
  }
  return std::nullopt;
}

FamilyParams unit_params(Family family) {
  switch (family) {
    case Family::gb2:
      return Gb2{1.0, 1.0, 1.0, 1.0};
    case Family::singh_maddala:
      return SinghMaddala{1.0, 1.0, 1.0};
    case Family::lognormal:
      return LogNormal{0.0, 1.0};
  }
  return LogNormal{0.0, 1.0};
}

// Mean and sd of a per-draw quantity. Draws for which the quantity throws
// MomentError are counted as excluded; if every draw is excluded the first
// error is rethrown.
template <class Quantity>
PosteriorSummary summarize(const PosteriorDraws& draws, Quantity quantity) {
  PosteriorSummary s;
  std::vector<double> values;
  values.reserve(draws.size());
  std::optional<MomentError> first_error;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto params = draws.params(i);
    try {
      if (auto v = quantity(params, moment_window(params))) values.push_back(*v);
    } catch (const MomentError& e) {
      ++s.excluded;
      if (!first_error) first_error.emplace(e);
    }
  }
  if (values.empty()) {
    if (first_error) throw *first_error;
    throw ValidationError("posterior summary over an empty set of draws");
  }
  s.used = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.used);
  if (s.used > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.used - 1));
  }
  return s;
}

}  // namespace

GroupedSample::GroupedSample(std::vector<double> boundaries, std::vector<double> counts,
                             std::string id)
    : boundaries_(std::move(boundaries)), counts_(std::move(counts)), id_(std::move(id)) {
  const std::string where = id_.empty() ? std::string("grouped sample") : "grouped sample '" + id_ + "'";
  if (counts_.size() < 2) throw ValidationError(where + ": at least two brackets are required");
  if (boundaries_.size() != counts_.size() + 1) {
    throw ValidationError(where + ": expected " + std::to_string(counts_.size() + 1) +
                          " boundaries, got " + std::to_string(boundaries_.size()));
  }
  if (boundaries_.front() != 0.0) throw ValidationError(where + ": first boundary must be 0");
  if (!std::isinf(boundaries_.back()) || boundaries_.back() < 0.0) {
    throw ValidationError(where + ": last boundary must be +inf");
  }
  for (std::size_t g = 1; g < boundaries_.size(); ++g) {
    if (!(boundaries_[g] > boundaries_[g - 1])) {
      throw ValidationError(where + ": boundaries must be strictly increasing");
    }
    if (g + 1 < boundaries_.size() && !std::isfinite(boundaries_[g])) {
      throw ValidationError(where + ": interior boundaries must be finite");
    }
  }
  for (double y : counts_) {
    if (!(y >= 0.0) || !std::isfinite(y)) throw ValidationError(where + ": counts must be nonnegative");
    total_ += y;
  }
  if (!(total_ > 0.0)) throw ValidationError(where + ": total count must be positive");
}

GroupedSample GroupedSample::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ValidationError("count scale factor must be positive");
  auto c = counts_;
  for (auto& v : c) v *= factor;
  return GroupedSample(boundaries_, std::move(c), id_);
}

GroupedSample bracket(std::span<const double> incomes, std::vector<double> boundaries, std::string id) {
  if (boundaries.size() < 3) throw ValidationError("bracket: at least two brackets are required");
  std::vector<double> counts(boundaries.size() - 1, 0.0);
  const std::span<const double> interior(boundaries.data() + 1, boundaries.size() - 2);
  kernels::bracket_counts(incomes, interior, counts);
  return GroupedSample(std::move(boundaries), std::move(counts), std::move(id));
}

void McmcConfig::validate(std::size_t dimension) const {
  if (iterations == 0) throw ValidationError("MCMC: iterations must be positive");
  if (burn_in >= iterations) throw ValidationError("MCMC: burn-in must be smaller than iterations");
  if (!step_sizes.empty()) {
    if (step_sizes.size() != dimension) {
      throw ValidationError("MCMC: expected " + std::to_string(dimension) + " step sizes, got " +
                            std::to_string(step_sizes.size()));
    }
    for (double s : step_sizes) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("MCMC: step sizes must be positive");
    }
  }
}

PosteriorDraws::PosteriorDraws(Family family, std::vector<double> values, double acceptance_rate,
                               McmcConfig config)
    : family_(family), values_(std::move(values)), acceptance_rate_(acceptance_rate), config_(std::move(config)) {
  if (values_.size() % parameter_count(family_) != 0) {
    throw ValidationError("posterior draws: value count is not a multiple of the dimension");
  }
}

std::vector<double> PosteriorDraws::posterior_mean() const {
  const std::size_t d = dimension();
  std::vector<double> m(d, 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) m[k] += values_[i * d + k];
  }
  for (auto& v : m) v /= static_cast<double>(size());
  return m;
}

std::vector<double> PosteriorDraws::posterior_sd() const {
  const std::size_t d = dimension();
  const auto m = posterior_mean();
  std::vector<double> s(d, 0.0);
  if (size() < 2) return s;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const double r = values_[i * d + k] - m[k];
      s[k] += r * r;
    }
  }
  for (auto& v : s) v = std::sqrt(v / static_cast<double>(size() - 1));
  return s;
}

double log_likelihood(const FamilyParams& params, const GroupedSample& data) {
  validate(params);
  const auto c = data.boundaries();
  const auto y = data.counts();
  const std::size_t groups = y.size();

  std::vector<CdfPair> at(groups + 1);
  at.front() = {0.0, 1.0};
  at.back() = {1.0, 0.0};
  for (std::size_t g = 1; g < groups; ++g) at[g] = cdf_pair(params, c[g]);

  double ll = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    if (y[g] == 0.0) continue;
    // difference taken on whichever side of the median is not cancelling
    const double prob = at[g + 1].cdf <= 0.5 ? at[g + 1].cdf - at[g].cdf
                                             : at[g].survival - at[g + 1].survival;
    if (!(prob > 0.0)) return kNegInf;
    ll += y[g] * std::log(prob);
  }
  return ll;
}

double log_prior(const FamilyParams& params) {
  const auto family = family_of(params);
  const auto v = to_vector(params);
  double lp = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!log_scaled(family, i)) continue;
    if (!(v[i] > 0.0)) return kNegInf;
    lp += -2.0 * std::log(v[i]) - 1.0 / v[i];
  }
  return lp;
}

FamilyParams initial_guess(Family family, const GroupedSample& data) {
  const auto median = bracket_quantile(data, 0.5);
  const auto lower = bracket_quantile(data, 0.25);
  if (!median || !lower || !(*lower > 0.0) || !(*median > *lower)) return unit_params(family);

  const double spread = std::log(*median) - std::log(*lower);
  if (family == Family::lognormal) {
    const double sigma = spread / 0.6744897501960817;  // z_{0.75}
    return LogNormal{std::log(*median), sigma * sigma};
  }
  // Singh-Maddala quantiles with q fixed: x_u = b ((1-u)^(-1/q) - 1)^(1/a)
  constexpr double q0 = 1.5;
  auto k = [](double u) { return std::pow(1.0 - u, -1.0 / q0) - 1.0; };
  const double a = (std::log(k(0.5)) - std::log(k(0.25))) / spread;
  const double b = *median / std::pow(k(0.5), 1.0 / a);
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) return unit_params(family);
  if (family == Family::gb2) return Gb2{a, b, 1.0, q0};
  return SinghMaddala{a, b, q0};
}

PosteriorDraws fit(Family family, const GroupedSample& data, const McmcConfig& config) {
  const std::size_t d = parameter_count(family);
  config.validate(d);
  if (data.groups() - 1 < d) {
    throw IdentificationError("family " + std::string(family_name(family)) + " has " + std::to_string(d) +
                              " parameters but the data provide only " + std::to_string(data.groups() - 1) +
                              " free cells");
  }

  const LogTarget target(family, data);
  auto neg = [&](const std::vector<double>& eta) { return -target(eta); };

  std::vector<double> eta = to_unconstrained(family, to_vector(initial_guess(family, data)));
  if (!std::isfinite(target(eta))) eta = to_unconstrained(family, to_vector(unit_params(family)));

  // Proposal: eta' = eta + scale * L z
  Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    chol(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
        config.step_sizes.empty() ? kDefaultStep : config.step_sizes[i];
  }
  double scale = 1.0;

  if (config.mode_search) {
    const auto opt = detail::nelder_mead(neg, eta, 0.2, 20000, 1e-12);
    if (std::isfinite(opt.value)) {
      eta = opt.x;
      const auto h = detail::hessian(neg, eta, 1e-4);
      Eigen::MatrixXd precision(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          precision(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i * d + j];
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(precision);
      if (llt.info() == Eigen::Success && precision.allFinite()) {
        const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
        Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
        if (cov_llt.info() == Eigen::Success) {
          chol = cov_llt.matrixL();
          scale = 2.38 / std::sqrt(static_cast<double>(d));
        }
      }
    }
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double current = target(eta);
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  std::vector<double> proposal(d);
  std::vector<double> retained;
  retained.reserve((config.iterations - config.burn_in) * d);
  std::size_t accepted_kept = 0;
  std::size_t accepted_batch = 0;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
    const Eigen::VectorXd step = scale * (chol * z);
    for (std::size_t k = 0; k < d; ++k) proposal[k] = eta[k] + step(static_cast<Eigen::Index>(k));
    const double cand = target(proposal);
    const double log_u = std::log(unif(rng));
    const bool accept = std::isfinite(cand) && log_u < cand - current;
    if (accept) {
      eta = proposal;
      current = cand;
    }

    if (it < config.burn_in) {
      accepted_batch += accept ? 1 : 0;
      if (config.adapt && (it + 1) % kAdaptBatch == 0) {
        const double rate = static_cast<double>(accepted_batch) / kAdaptBatch;
        if (rate < 0.2 || rate > 0.4) scale *= std::exp(2.0 * (rate - 0.3));
        accepted_batch = 0;
      }
    } else {
      accepted_kept += accept ? 1 : 0;
      const auto native = to_native(family, eta);
      retained.insert(retained.end(), native.begin(), native.end());
    }
  }

  const double rate =
      static_cast<double>(accepted_kept) / static_cast<double>(config.iterations - config.burn_in);
  return PosteriorDraws(family, std::move(retained), rate, config);
}

PosteriorSummary posterior_ge(const PosteriorDraws& draws, Theta theta) {
  return summarize(draws, [theta](const FamilyParams& params, const MomentWindow& w) -> std::optional<double> {
    if (!w.contains(1.0)) throw MomentError(1.0, w.lower, w.upper);
    if (!theta.is_mld() && !theta.is_theil() && !w.contains(theta.value())) {
      throw MomentError(theta.value(), w.lower, w.upper);
    }
    return ge_parametric(params, theta);
  });
}

PosteriorSummary posterior_mean_income(const PosteriorDraws& draws) {
  return summarize(draws, [](const FamilyParams& params, const MomentWindow& w) -> std::optional<double> {
    if (!w.contains(1.0)) throw MomentError(1.0, w.lower, w.upper);
    return mean(params);
  });
}

}  // namespace gedecomp
