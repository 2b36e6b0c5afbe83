#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ctrb/coalition.hpp"
#include "ctrb/utility_table.hpp"

namespace ctrb {

// Exact Shapley value by subset enumeration:
//   beta_i = (1/n) sum_{S subset of D\{i}} C(n-1,|S|)^-1 (F(S+i) - F(S)).
// Requires the complete 2^n table; n <= 20.
AttributionResult exact_shapley(const UtilityTable& table);

// KernelSHAP: constrained weighted least squares over sampled subsets.
// Solves min (1/M) sum_j [F(null) + 1_Sj' beta - F(Sj)]^2 subject to
// 1'beta = F(full) - F(null), via the Lagrangian closed form. The
// constraint holds exactly in the result.
AttributionResult kernel_shap(const UtilityOracle& oracle, int n,
                              const std::vector<SubsetSample>& samples,
                              double null_utility, double full_utility);

// Monte-Carlo Banzhaf with maximum sample reuse: every sampled subset
// feeds each contributor's in-average or out-average according to
// membership. Efficiency is not enforced; the gap is still reported.
AttributionResult banzhaf_mc(const UtilityOracle& oracle, int n,
                             const std::vector<SubsetSample>& samples,
                             double null_utility, double full_utility);

// tau_i = F(full) - F(full minus contributor i).
AttributionResult leave_one_out(const UtilityTable& table);

// The linear operator A (n x 2^n) with beta = A v, columns in canonical
// subset order (size ascending, lexicographic within size):
//   A[i,S] =  (1/n) C(n-1,|S|-1)^-1   if i in S
//            -(1/n) C(n-1,|S|)^-1     otherwise.
// Every row has L1 norm exactly 2. n <= 14.
Eigen::MatrixXd shapley_operator(int n);

// Utility vector in canonical subset order for use with the operator.
Eigen::VectorXd utility_vector_canonical(const UtilityTable& table);

// Axiom spot-checks on randomly generated complete games: efficiency,
// symmetry, dummy, linearity. Used by the verify CLI.
struct AxiomReport {
  int trials = 0;
  int efficiency_failures = 0;
  int symmetry_failures = 0;
  int dummy_failures = 0;
  int linearity_failures = 0;
  double max_efficiency_gap = 0.0;
  bool passed = false;
};
AxiomReport verify_shapley_axioms(int n, int trials, std::uint64_t seed,
                                  double tol = 1e-9);

}  // namespace ctrb
