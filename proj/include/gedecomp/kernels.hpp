#pragma once

// Data-parallel reductions over income vectors.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is chosen once at startup from CPUID; tests
// can pin either one with force_isa(). Results of the two variants agree to
// a few ulps per element (summation order differs), bracket counts agree
// exactly.

#include <cstddef>
#include <span>
#include <string_view>

namespace gedecomp::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Variant currently used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Pin a variant. Throws std::invalid_argument when it is unavailable.
void force_isa(Isa isa);

/// Restore CPUID-based selection.
void reset_isa() noexcept;

double sum(std::span<const double> x) noexcept;

/// sum_i (scale * x_i)^theta. Inputs must be positive and finite.
double power_sum(std::span<const double> x, double scale, double theta) noexcept;

/// sum_i log(scale * x_i).
double log_sum(std::span<const double> x, double scale) noexcept;

/// sum_i (scale * x_i) * log(scale * x_i).
double xlogx_sum(std::span<const double> x, double scale) noexcept;

/// counts[g] += #{ i : interior[g-1] <= x_i < interior[g] }, where
/// interior holds the finite cut points c_1 < ... < c_{G-1} (c_0 = 0 and
/// c_G = +inf are implicit). counts must have interior.size() + 1 entries.
void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept;

// Direct access to each variant, used by the equivalence tests.
namespace scalar {
double sum(std::span<const double> x) noexcept;
double power_sum(std::span<const double> x, double scale, double theta) noexcept;
double log_sum(std::span<const double> x, double scale) noexcept;
double xlogx_sum(std::span<const double> x, double scale) noexcept;
void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept;
}  // namespace scalar

namespace avx2 {
double sum(std::span<const double> x) noexcept;
double power_sum(std::span<const double> x, double scale, double theta) noexcept;
double log_sum(std::span<const double> x, double scale) noexcept;
double xlogx_sum(std::span<const double> x, double scale) noexcept;
void bracket_counts(std::span<const double> x, std::span<const double> interior,
                    std::span<double> counts) noexcept;
}  // namespace avx2

}  // namespace gedecomp::kernels
