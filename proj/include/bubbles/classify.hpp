#pragma once

#include <map>
#include <string>
#include <vector>

#include "bubbles/certificates.hpp"
#include "bubbles/grid.hpp"
#include "bubbles/io.hpp"
#include "bubbles/kernel.hpp"

namespace bubbles {

enum class Verdict { Bubble, NoBubble, Indeterminate };

const char* to_string(Verdict v) noexcept;
Verdict verdict_from_string(const std::string& s);

/// Outcome of a bubble test. `criterion` names the rule that fired:
///   recovery-floor          liminf b > 0 (no bubble)
///   complete-two-point      iff test for the complete two-point family
///   integrable-recovery     b_eps nonincreasing with integrable b_eps(e^u)
///   increment-sums          sum a_k = inf and sum b_k < inf, or sum b_k = inf
///   kakutani                sum a_k < inf (uniformly integrable)
///   none                    no certified rule applies
struct BubbleVerdict {
  Verdict verdict = Verdict::Indeterminate;
  std::string criterion = "none";
  std::map<std::string, double> evidence;
  std::vector<std::string> notes;
};

Json to_json(const BubbleVerdict& v);
BubbleVerdict verdict_from_json(const Json& j);

struct ClassifyOptions {
  TailGrid tail;
  double epsilon = 1.0;
  /// Lower end of the range on which a must stay positive.
  double x_a = 1e-2;
  /// User-declared bounds on b (epsilon = 0) or b_eps.
  std::vector<TailBound> certificates;
  bool use_analytic_bounds = true;
};

/// Certificate-driven classifier. Every declared or analytic bound is checked
/// against the computed recovery on the tail grid first; a violated bound
/// raises CertificateRejected. Numerical evidence alone never yields a verdict.
BubbleVerdict classify_markov_bubble(const MarkovKernel& kernel, const ClassifyOptions& options);

}  // namespace bubbles
