#include "gedecomp/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gedecomp/errors.hpp"
#include "gedecomp/special.hpp"

namespace gedecomp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

Gb2 as_gb2(const SinghMaddala& sm) { return {sm.a, sm.b, 1.0, sm.q}; }

// log(1 + e^v) without overflow.
double log1p_exp(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

// Beta-scale arguments z = t/(1+t) and 1 - z for t = (x/b)^a, from log t.
special::BetaTail gb2_tail(const Gb2& g, double x) {
  if (x <= 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  const double lt = g.a * (std::log(x) - std::log(g.b));
  const double z = 1.0 / (1.0 + std::exp(-lt));
  const double y = 1.0 / (1.0 + std::exp(lt));
  return special::incomplete_beta(g.p, g.q, z, y);
}

// Survival of SM in closed form: (1 + t)^(-q).
double sm_log_survival(const SinghMaddala& s, double x) {
  const double lt = s.a * (std::log(x) - std::log(s.b));
  return -s.q * log1p_exp(lt);
}

double gb2_log_moment_ratio(const Gb2& g, double theta) {
  // log E[X^theta] - theta * log b
  return special::log_gamma(g.p + theta / g.a) + special::log_gamma(g.q - theta / g.a) -
         special::log_gamma(g.p) - special::log_gamma(g.q);
}

void require_moment(const Gb2& g, double theta) {
  const MomentWindow w{-g.a * g.p, g.a * g.q};
  if (!w.contains(theta)) throw MomentError(theta, w.lower, w.upper);
}

double gb2_ge(const Gb2& g, Theta theta) {
  if (theta.is_theil()) {
    if (!(g.q > 1.0 / g.a)) throw TheilExistenceError(g.a, g.q);
  } else {
    require_moment(g, 1.0);
  }
  const double lr = gb2_log_moment_ratio(g, 1.0);
  if (theta.is_mld()) {
    return -(special::digamma(g.p) - special::digamma(g.q)) / g.a + lr;
  }
  if (theta.is_theil()) {
    return (special::digamma(g.p + 1.0 / g.a) - special::digamma(g.q - 1.0 / g.a)) / g.a - lr;
  }
  const double t = theta.value();
  require_moment(g, t);
  const double l = gb2_log_moment_ratio(g, t) - t * lr;
  return std::expm1(l) / (t * (t - 1.0));
}

double ln_ge(const LogNormal& l, Theta theta) {
  if (theta.is_mld() || theta.is_theil()) return 0.5 * l.sigma2;
  const double t = theta.value();
  return std::expm1(0.5 * l.sigma2 * t * (t - 1.0)) / (t * (t - 1.0));
}

}  // namespace

MomentError::MomentError(double theta, double lower, double upper)
    : std::domain_error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "moment of order " << theta << " does not exist; admissible interval is (" << lower
           << ", " << upper << ")";
        return os.str();
      }()),
      theta_(theta),
      lower_(lower),
      upper_(upper) {}

TheilExistenceError::TheilExistenceError(double a, double q) : MomentError(1.0, -kInf, a * q) {}

std::string_view family_name(Family f) noexcept {
  switch (f) {
    case Family::gb2:
      return "gb2";
    case Family::singh_maddala:
      return "sm";
    case Family::lognormal:
      return "ln";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "gb2" || name == "GB2") return Family::gb2;
  if (name == "sm" || name == "SM" || name == "singh-maddala") return Family::singh_maddala;
  if (name == "ln" || name == "LN" || name == "lognormal") return Family::lognormal;
  throw ValidationError("unknown distribution family '" + std::string(name) + "'");
}

std::size_t parameter_count(Family f) noexcept {
  switch (f) {
    case Family::gb2:
      return 4;
    case Family::singh_maddala:
      return 3;
    case Family::lognormal:
      return 2;
  }
  return 0;
}

Family family_of(const FamilyParams& params) noexcept {
  return std::visit(Overloaded{[](const Gb2&) { return Family::gb2; },
                               [](const SinghMaddala&) { return Family::singh_maddala; },
                               [](const LogNormal&) { return Family::lognormal; }},
                    params);
}

std::vector<double> to_vector(const FamilyParams& params) {
  return std::visit(
      Overloaded{[](const Gb2& g) { return std::vector<double>{g.a, g.b, g.p, g.q}; },
                 [](const SinghMaddala& s) { return std::vector<double>{s.a, s.b, s.q}; },
                 [](const LogNormal& l) { return std::vector<double>{l.xi, l.sigma2}; }},
      params);
}

FamilyParams from_vector(Family family, std::span<const double> v) {
  if (v.size() != parameter_count(family)) {
    throw ValidationError("parameter vector of length " + std::to_string(v.size()) + " for family " +
                          std::string(family_name(family)));
  }
  switch (family) {
    case Family::gb2:
      return Gb2{v[0], v[1], v[2], v[3]};
    case Family::singh_maddala:
      return SinghMaddala{v[0], v[1], v[2]};
    case Family::lognormal:
      return LogNormal{v[0], v[1]};
  }
  throw ValidationError("unknown family");
}

void validate(const FamilyParams& params) {
  std::visit(Overloaded{[](const Gb2& g) {
                          if (!positive_finite(g.a) || !positive_finite(g.b) ||
                              !positive_finite(g.p) || !positive_finite(g.q)) {
                            throw DomainError("GB2 parameters a, b, p, q must be positive and finite");
                          }
                        },
                        [](const SinghMaddala& s) {
                          if (!positive_finite(s.a) || !positive_finite(s.b) ||
                              !positive_finite(s.q)) {
                            throw DomainError("SM parameters a, b, q must be positive and finite");
                          }
                        },
                        [](const LogNormal& l) {
                          if (!std::isfinite(l.xi) || !(l.sigma2 >= 0.0) || !std::isfinite(l.sigma2)) {
                            throw DomainError("LN requires finite xi and sigma2 >= 0");
                          }
                        }},
             params);
}

double cdf(const FamilyParams& params, double x) {
  validate(params);
  if (!(x >= 0.0)) throw DomainError("cdf: income must be nonnegative");
  if (x == 0.0) return 0.0;
  return std::visit(Overloaded{[x](const Gb2& g) { return gb2_tail(g, x).lower; },
                               [x](const SinghMaddala& s) {
                                 if (std::isinf(x)) return 1.0;
                                 return -std::expm1(sm_log_survival(s, x));
                               },
                               [x](const LogNormal& l) {
                                 if (l.sigma2 == 0.0) return std::log(x) < l.xi ? 0.0 : 1.0;
                                 return special::normal_cdf((std::log(x) - l.xi) / std::sqrt(l.sigma2));
                               }},
                    params);
}

double survival(const FamilyParams& params, double x) {
  validate(params);
  if (!(x >= 0.0)) throw DomainError("survival: income must be nonnegative");
  if (x == 0.0) return 1.0;
  return std::visit(Overloaded{[x](const Gb2& g) { return gb2_tail(g, x).upper; },
                               [x](const SinghMaddala& s) {
                                 if (std::isinf(x)) return 0.0;
                                 return std::exp(sm_log_survival(s, x));
                               },
                               [x](const LogNormal& l) {
                                 if (l.sigma2 == 0.0) return std::log(x) < l.xi ? 1.0 : 0.0;
                                 return special::normal_sf((std::log(x) - l.xi) / std::sqrt(l.sigma2));
                               }},
                    params);
}

CdfPair cdf_pair(const FamilyParams& params, double x) {
  if (family_of(params) == Family::gb2) {
    validate(params);
    if (!(x >= 0.0)) throw DomainError("cdf: income must be nonnegative");
    const auto tail = gb2_tail(std::get<Gb2>(params), x);
    return {tail.lower, tail.upper};
  }
  return {cdf(params, x), survival(params, x)};
}

double pdf(const FamilyParams& params, double x) {
  validate(params);
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("pdf: income must be positive and finite");
  auto gb2_pdf = [x](const Gb2& g) {
    const double lx = std::log(x);
    const double lt = g.a * (lx - std::log(g.b));
    const double lf = std::log(g.a) + (g.a * g.p - 1.0) * lx - g.a * g.p * std::log(g.b) -
                      special::log_beta(g.p, g.q) - (g.p + g.q) * log1p_exp(lt);
    return std::exp(lf);
  };
  return std::visit(Overloaded{gb2_pdf, [&](const SinghMaddala& s) { return gb2_pdf(as_gb2(s)); },
                               [x](const LogNormal& l) {
                                 if (l.sigma2 == 0.0) {
                                   throw DomainError("pdf: degenerate lognormal has no density");
                                 }
                                 const double z = (std::log(x) - l.xi) / std::sqrt(l.sigma2);
                                 return std::exp(-0.5 * z * z) /
                                        (x * std::sqrt(2.0 * std::numbers::pi * l.sigma2));
                               }},
                    params);
}

MomentWindow moment_window(const FamilyParams& params) {
  validate(params);
  return std::visit(
      Overloaded{[](const Gb2& g) { return MomentWindow{-g.a * g.p, g.a * g.q}; },
                 [](const SinghMaddala& s) { return MomentWindow{-s.a, s.a * s.q}; },
                 [](const LogNormal&) { return MomentWindow{-kInf, kInf}; }},
      params);
}

double log_moment(const FamilyParams& params, double theta) {
  validate(params);
  auto gb2_lm = [theta](const Gb2& g) {
    require_moment(g, theta);
    return theta * std::log(g.b) + gb2_log_moment_ratio(g, theta);
  };
  return std::visit(
      Overloaded{gb2_lm, [&](const SinghMaddala& s) { return gb2_lm(as_gb2(s)); },
                 [theta](const LogNormal& l) { return l.xi * theta + 0.5 * l.sigma2 * theta * theta; }},
      params);
}

double moment(const FamilyParams& params, double theta) {
  return std::exp(log_moment(params, theta));
}

double ge_parametric(const FamilyParams& params, Theta theta) {
  validate(params);
  return std::visit(Overloaded{[theta](const Gb2& g) { return gb2_ge(g, theta); },
                               [theta](const SinghMaddala& s) { return gb2_ge(as_gb2(s), theta); },
                               [theta](const LogNormal& l) { return ln_ge(l, theta); }},
                    params);
}

std::vector<double> sample(const FamilyParams& params, std::size_t n, std::mt19937_64& rng) {
  validate(params);
  if (n == 0) throw ValidationError("sample: n must be at least 1");
  std::vector<double> out(n);
  auto gb2_draws = [&](const Gb2& g) {
    std::gamma_distribution<double> gp(g.p, 1.0);
    std::gamma_distribution<double> gq(g.q, 1.0);
    const double log_b = std::log(g.b);
    for (auto& x : out) {
      // T = U/(1-U) with U ~ Beta(p,q) equals G_p / G_q
      const double lp = std::log(gp(rng));
      const double lq = std::log(gq(rng));
      x = std::exp(log_b + (lp - lq) / g.a);
    }
  };
  std::visit(Overloaded{gb2_draws, [&](const SinghMaddala& s) { gb2_draws(as_gb2(s)); },
                        [&](const LogNormal& l) {
                          std::normal_distribution<double> z(0.0, 1.0);
                          const double sd = std::sqrt(l.sigma2);
                          for (auto& x : out) x = std::exp(l.xi + sd * z(rng));
                        }},
             params);
  return out;
}

std::vector<double> sample(const FamilyParams& params, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample(params, n, rng);
}

}  // namespace gedecomp
