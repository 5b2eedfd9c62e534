#include "gedecomp/benchmark.hpp"

#include <cmath>

#include "gedecomp/errors.hpp"

namespace gedecomp {
namespace {

BenchmarkSolution finish(const BenchmarkProblem& p, std::vector<double> constrained, double residual) {
  BenchmarkSolution s;
  s.residual = residual;
  s.adjustments.resize(constrained.size());
  s.negative.resize(constrained.size());
  for (std::size_t j = 0; j < constrained.size(); ++j) {
    s.adjustments[j] = constrained[j] - p.bayes[j];
    s.negative[j] = constrained[j] < 0.0;
  }
  s.constrained = std::move(constrained);
  return s;
}

}  // namespace

void BenchmarkProblem::validate(bool need_loss_weights) const {
  if (bayes.empty()) throw ValidationError("benchmark problem with no units");
  if (weights.size() != bayes.size()) throw ValidationError("benchmark problem: weights length mismatch");
  if (need_loss_weights && loss_weights.size() != bayes.size()) {
    throw ValidationError("benchmark problem: loss weights length mismatch");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("benchmark problem: weights must be nonnegative");
  }
  if (need_loss_weights) {
    for (double phi : loss_weights) {
      if (!(phi > 0.0) || !std::isfinite(phi)) {
        throw ValidationError("benchmark problem: loss weights must be positive");
      }
    }
  }
  for (double d : bayes) {
    if (!std::isfinite(d)) throw ValidationError("benchmark problem: Bayes estimates must be finite");
  }
}

bool BenchmarkSolution::any_negative() const noexcept {
  for (bool n : negative) {
    if (n) return true;
  }
  return false;
}

double benchmark_residual(std::span<const double> estimates, std::span<const double> weights, double target,
                          double between) {
  double weighted = 0.0;
  for (std::size_t j = 0; j < estimates.size(); ++j) weighted += weights[j] * estimates[j];
  return target - between - weighted;
}

BenchmarkSolution solve(const BenchmarkProblem& p) {
  p.validate();
  double q = 0.0;
  for (std::size_t j = 0; j < p.bayes.size(); ++j) q += p.weights[j] * p.weights[j] / p.loss_weights[j];
  if (!(q > 0.0)) throw BenchmarkError("benchmark problem is degenerate: sum w^2/phi = 0");

  const double residual = benchmark_residual(p.bayes, p.weights, p.target, p.between);
  std::vector<double> d(p.bayes.size());
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double r = p.weights[j] / p.loss_weights[j];
    d[j] = p.bayes[j] + r / q * residual;
  }
  return finish(p, std::move(d), residual);
}

BenchmarkSolution solve_uniform(const BenchmarkProblem& p) {
  p.validate(false);
  double total_weight = 0.0;
  for (double w : p.weights) total_weight += w;
  if (!(total_weight > 0.0)) throw BenchmarkError("benchmark problem is degenerate: all weights are zero");
  const double residual = benchmark_residual(p.bayes, p.weights, p.target, p.between);
  const double shift = residual / total_weight;
  std::vector<double> d(p.bayes.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = p.bayes[j] + shift;
  return finish(p, std::move(d), residual);
}

BenchmarkSolution solve_raking(const BenchmarkProblem& p) {
  p.validate(false);
  for (double b : p.bayes) {
    if (!(b > 0.0)) throw BenchmarkError("raking requires every Bayes estimate to be positive");
  }
  double weighted = 0.0;
  for (std::size_t j = 0; j < p.bayes.size(); ++j) weighted += p.weights[j] * p.bayes[j];
  if (!(weighted > 0.0)) throw BenchmarkError("benchmark problem is degenerate: all weights are zero");
  const double factor = (p.target - p.between) / weighted;
  std::vector<double> d(p.bayes.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = p.bayes[j] * factor;
  return finish(p, std::move(d), p.target - p.between - weighted);
}

}  // namespace gedecomp
