#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bubbles/certificates.hpp"
#include "bubbles/classify.hpp"
#include "bubbles/kernel.hpp"
#include "bubbles/montecarlo.hpp"

namespace bubbles {

/// Law of one return factor X_k: finitely many atoms, or a mean-one lognormal
/// exp(sigma Z - sigma^2 / 2) when lognormal_sigma > 0.
struct FactorLaw {
  std::vector<Atom> atoms;
  double lognormal_sigma = 0.0;

  double mass() const;
  double mean() const;
  /// P[X < 1].
  double prob_below_one() const;
  /// E[X 1{X < 1}].
  double recovery() const;
  double sample(RandomStream& rng) const;
};

/// Claims about the series sum a_k and sum b_k (termwise bounds).
struct DeclaredTails {
  std::optional<SeriesBound> a_bound;
  std::optional<SeriesBound> b_bound;
};

/// S_k = X_1 ... X_k with independent factors.
class IIDReturnModel {
 public:
  IIDReturnModel(std::string name, std::function<FactorLaw(std::size_t)> law, DeclaredTails tails);

  const std::string& name() const { return name_; }
  FactorLaw factor_law(std::size_t k) const { return law_(k); }
  double a(std::size_t k) const { return law_(k).prob_below_one(); }
  double b(std::size_t k) const { return law_(k).recovery(); }
  const DeclaredTails& tails() const { return tails_; }

  /// Throws DegenerateModel unless, for k <= upto: mass and mean are 1,
  /// 0 <= b_k <= a_k < 1, and all atoms are positive.
  void validate(std::size_t upto) const;

 private:
  std::string name_;
  std::function<FactorLaw(std::size_t)> law_;
  DeclaredTails tails_;
};

/// X_k = 1/k with probability 1/k, else 1 + 1/k (a_1 = 0, then a_k = 1/k, b_k = 1/k^2).
IIDReturnModel harmonic_binomial_model();
/// i.i.d. X in {u, d} with P[X = u] = p and p u + (1 - p) d = 1.
IIDReturnModel iid_binomial_model(double up, double down, double p);
/// i.i.d. mean-one lognormal factors.
IIDReturnModel iid_lognormal_model(double sigma);
/// X_k = d with probability r^k, else (1 - d r^k) / (1 - r^k); a_k = r^k.
IIDReturnModel geometric_down_model(double down, double r);

/// Validates the declared termwise bounds on a_k and b_k for k <= partial_n
/// (CertificateRejected on a contradiction), then applies the increment
/// criterion: Bubble iff sum a_k = inf and sum b_k < inf; NoBubble when
/// sum b_k = inf or sum a_k < inf; Indeterminate otherwise.
BubbleVerdict iid_bubble_check(const IIDReturnModel& model, std::size_t partial_n);

struct SurvivalProduct {
  double value = 1.0;      // prod_{l = k_start}^{N} (1 - b_l)
  double log_value = 0.0;  // sum of log(1 - b_l)
  /// Bounds on the infinite product; lower bound 0 without a convergent b certificate.
  double limit_lower = 0.0;
  double limit_upper = 1.0;
};

SurvivalProduct survival_product(const IIDReturnModel& model, std::size_t k_start, std::size_t n);

/// prod_{k=1}^{N} factor(k), accumulated in log space; factor defaults to Phi(sqrt(k) / 2).
double appendix_product(std::size_t n, const std::function<double(std::size_t)>& factor = {});
std::vector<double> appendix_partial_products(std::size_t n, const std::function<double(std::size_t)>& factor = {});

class IIDPathModel final : public PathModel {
 public:
  explicit IIDPathModel(const IIDReturnModel& model) : model_(model) {}
  std::string name() const override { return model_.name(); }
  double step(double x, std::size_t k, RandomStream& rng) const override {
    return x * model_.factor_law(k).sample(rng);
  }

 private:
  const IIDReturnModel& model_;
};

}  // namespace bubbles
