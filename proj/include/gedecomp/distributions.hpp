#pragma once

// Parametric income laws: GB2, Singh-Maddala and lognormal.
//
// GB2(a, b, p, q) is the law of X = b * (U / (1 - U))^(1/a) with
// U ~ Beta(p, q). Singh-Maddala SM(a, b, q) is GB2(a, b, 1, q). LN(xi, s2)
// is exp(N(xi, s2)); s2 = 0 is admitted as the point mass at exp(xi).

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gedecomp {

enum class Family { gb2, singh_maddala, lognormal };

std::string_view family_name(Family f) noexcept;  // "gb2", "sm", "ln"
Family parse_family(std::string_view name);       // throws ValidationError

/// Number of free parameters: 4, 3 or 2.
std::size_t parameter_count(Family f) noexcept;

struct Gb2 {
  double a;  ///< power
  double b;  ///< scale (income units)
  double p;
  double q;
  bool operator==(const Gb2&) const = default;
};

struct SinghMaddala {
  double a;
  double b;
  double q;
  bool operator==(const SinghMaddala&) const = default;
};

struct LogNormal {
  double xi;      ///< mean of log income
  double sigma2;  ///< variance of log income
  bool operator==(const LogNormal&) const = default;
};

using FamilyParams = std::variant<Gb2, SinghMaddala, LogNormal>;

Family family_of(const FamilyParams& params) noexcept;

/// Parameter vector in declaration order (a,b,p,q | a,b,q | xi,sigma2).
std::vector<double> to_vector(const FamilyParams& params);
FamilyParams from_vector(Family family, std::span<const double> values);

/// Throws DomainError unless every positivity constraint holds.
void validate(const FamilyParams& params);

/// Sensitivity parameter of a generalized-entropy index. Values within
/// kLimitWindow of 0 or 1 select the MLD / Theil limit forms.
class Theta {
 public:
  static constexpr double kLimitWindow = 1e-9;

  constexpr Theta(double value) : value_(value) {}  // NOLINT(google-explicit-constructor)

  constexpr double value() const noexcept { return value_; }
  constexpr bool is_mld() const noexcept {
    return value_ > -kLimitWindow && value_ < kLimitWindow;
  }
  constexpr bool is_theil() const noexcept {
    return value_ - 1.0 > -kLimitWindow && value_ - 1.0 < kLimitWindow;
  }

 private:
  double value_;
};

double cdf(const FamilyParams& params, double x);

/// 1 - cdf, evaluated directly in the upper tail.
double survival(const FamilyParams& params, double x);

/// cdf and survival at x, each evaluated on its accurate side.
struct CdfPair {
  double cdf;
  double survival;
};
CdfPair cdf_pair(const FamilyParams& params, double x);

double pdf(const FamilyParams& params, double x);

/// Open interval of theta for which E[X^theta] exists. Unbounded for LN.
struct MomentWindow {
  double lower;
  double upper;
  bool contains(double theta) const noexcept { return lower < theta && theta < upper; }
};

MomentWindow moment_window(const FamilyParams& params);

/// log E[X^theta]. Throws MomentError outside the window.
double log_moment(const FamilyParams& params, double theta);

/// E[X^theta]. moment(params, 1) is the mean.
double moment(const FamilyParams& params, double theta);

inline double mean(const FamilyParams& params) { return moment(params, 1.0); }

/// Generalized entropy GE_theta of the law. theta = 0 gives the mean log
/// deviation, theta = 1 the Theil index.
double ge_parametric(const FamilyParams& params, Theta theta);

/// n independent draws. Same (params, engine state) -> same draws; SM uses
/// the GB2 construction with p = 1.
std::vector<double> sample(const FamilyParams& params, std::size_t n, std::mt19937_64& rng);

std::vector<double> sample(const FamilyParams& params, std::size_t n, std::uint64_t seed);

}  // namespace gedecomp
