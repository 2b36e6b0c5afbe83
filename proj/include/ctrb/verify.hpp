#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctrb/coalition.hpp"
#include "ctrb/quadratic_game.hpp"

namespace ctrb {

// Per-subset error of sparsified fine-tuning against exact retraining,
// across a grid of step counts, against the lottery-ticket bound
// B_S = |F(sparse optimum on S) - F(exact optimum on S)|.
struct Prop1Row {
  std::uint64_t subset_id = 0;
  int subset_size = 0;
  double b_s = 0.0;                  // bound
  double property_retrained = 0.0;   // F(exact retrain on S)
  double err_at_kmax = 0.0;          // |F(ft at k_max) - F(retrained)|
  bool converged = false;            // per-step improvement < 1e-12
  double final_improvement = 0.0;
  std::vector<double> err_by_k;      // aligned with k_grid
  std::vector<double> property_by_k;
};

struct Prop1Report {
  std::vector<int> k_grid;
  std::vector<Prop1Row> rows;
  std::vector<double> pearson_by_k;  // corr(F_ft(k), F_retrain) across subsets
  double tol = 1e-6;
  int bound_violations = 0;
  int unconverged = 0;
  bool passed = false;

  // CSV with columns subset_id,k,err,B_S.
  std::string per_subset_csv() const;
  std::string to_json() const;
};

Prop1Report verify_prop1(const QuadraticGame& game, const PruneMask& mask,
                         const std::vector<Coalition>& subsets,
                         const std::vector<int>& k_grid, double tol = 1e-6,
                         int workers = 1);

// Exhaustive Shapley comparison: beta from exact retraining vs beta from
// fine-tuned utilities, against the 2*sqrt(n)*C operator bound with
// C = max_S |F(sparse optimum) - F(exact optimum)|.
struct Cor1Report {
  int n = 0;
  int k = 0;
  double c_max = 0.0;
  double bound = 0.0;      // 2 sqrt(n) C + tol
  double beta_error_l2 = 0.0;
  std::vector<double> beta_exact;
  std::vector<double> beta_finetuned;
  double tol = 1e-6;
  bool passed = false;

  std::string to_json() const;
};

Cor1Report verify_cor1(const QuadraticGame& game, const PruneMask& mask,
                       int k, double tol = 1e-6, int workers = 1);

// Descent lemma along a recorded trace:
//   l(theta^(k)) - l(theta_opt) <= ||theta^(0) - theta_opt||^2 / (2 k alpha)
// for every k >= 1, allowing 1e-12 floating slack.
struct DescentReport {
  int steps_checked = 0;
  int violations = 0;
  double max_excess = 0.0;  // worst (lhs - rhs), negative when clean
  bool passed = false;
};

DescentReport verify_descent_bound(const QuadraticGame& game,
                                   const FinetuneTrace& trace,
                                   const Eigen::VectorXd& theta_star_restricted,
                                   double slack = 1e-12);

}  // namespace ctrb
