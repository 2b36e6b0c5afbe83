#include "ctrb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctrb/error.hpp"
#include "ctrb/estimators.hpp"
#include "ctrb/io_util.hpp"
#include "ctrb/parallel.hpp"

namespace ctrb {

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

Prop1Report verify_prop1(const QuadraticGame& game, const PruneMask& mask,
                         const std::vector<Coalition>& subsets,
                         const std::vector<int>& k_grid, double tol,
                         int workers) {
  if (subsets.empty()) throw DataError("verify_prop1 needs subsets");
  if (k_grid.empty()) throw DataError("verify_prop1 needs a k grid");
  std::vector<int> grid = k_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.front() < 1) throw DataError("k grid entries must be >= 1");
  const int k_max = grid.back();

  // Initialization mirrors pruning-then-initial-fine-tuning on the full
  // dataset: the restricted optimum over all contributors.
  const Eigen::VectorXd theta_pruned_full =
      sparse_optimum(game, mask, Coalition::full(game.n()));

  Prop1Report report;
  report.k_grid = grid;
  report.tol = tol;
  report.rows.resize(subsets.size());

  parallel_for_index(
      subsets.size(), workers, [&](std::size_t idx) {
        const Coalition& s = subsets[idx];
        Prop1Row row;
        row.subset_id = canonical_id(s);
        row.subset_size = s.size();

        const Eigen::VectorXd theta_exact = retrain_exact(game, s);
        const Eigen::VectorXd theta_sparse = sparse_optimum(game, mask, s);
        const double f_exact = model_property(game, theta_exact);
        row.property_retrained = f_exact;
        row.b_s = std::abs(model_property(game, theta_sparse) - f_exact);

        const FinetuneTrace trace =
            finetune_sparsified(game, mask, theta_pruned_full, s, k_max,
                                std::nullopt, true);
        row.err_by_k.reserve(grid.size());
        row.property_by_k.reserve(grid.size());
        for (int k : grid) {
          const double f_ft = model_property(
              game, (*trace.theta_path)[static_cast<std::size_t>(k)]);
          row.property_by_k.push_back(f_ft);
          row.err_by_k.push_back(std::abs(f_ft - f_exact));
        }
        row.err_at_kmax = row.err_by_k.back();
        row.final_improvement =
            trace.objective_path[static_cast<std::size_t>(k_max - 1)] -
            trace.objective_path[static_cast<std::size_t>(k_max)];
        row.converged = std::abs(row.final_improvement) < 1e-12;
        report.rows[idx] = std::move(row);
      });

  // Pearson per k between fine-tuned and exactly retrained properties.
  std::vector<double> exact(subsets.size());
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    exact[i] = report.rows[i].property_retrained;
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> ft(subsets.size());
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      ft[i] = report.rows[i].property_by_k[g];
    }
    report.pearson_by_k.push_back(pearson(ft, exact));
  }

  for (const auto& row : report.rows) {
    if (!row.converged) {
      ++report.unconverged;
      continue;
    }
    if (row.err_at_kmax > row.b_s + tol) ++report.bound_violations;
  }
  report.passed = report.bound_violations == 0 && report.unconverged == 0;
  return report;
}

std::string Prop1Report::per_subset_csv() const {
  std::string csv = "subset_id,k,err,B_S\n";
  for (const auto& row : rows) {
    for (std::size_t g = 0; g < k_grid.size(); ++g) {
      csv += subset_hex(row.subset_id);
      csv += ',';
      csv += std::to_string(k_grid[g]);
      csv += ',';
      csv += fmt_double17(row.err_by_k[g]);
      csv += ',';
      csv += fmt_double17(row.b_s);
      csv += '\n';
    }
  }
  return csv;
}

std::string Prop1Report::to_json() const {
  std::ostringstream os;
  os << "{\"passed\": " << (passed ? "true" : "false")
     << ", \"subsets\": " << rows.size()
     << ", \"bound_violations\": " << bound_violations
     << ", \"unconverged\": " << unconverged << ", \"tol\": "
     << fmt_double17(tol) << ", \"k_grid\": [";
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (i) os << ", ";
    os << k_grid[i];
  }
  os << "], \"pearson_by_k\": [";
  for (std::size_t i = 0; i < pearson_by_k.size(); ++i) {
    if (i) os << ", ";
    os << fmt_double17(pearson_by_k[i]);
  }
  os << "]}";
  return os.str();
}

Cor1Report verify_cor1(const QuadraticGame& game, const PruneMask& mask,
                       int k, double tol, int workers) {
  const int n = game.n();
  if (n > 10) throw DataError("verify_cor1 enumerates 2^n; needs n <= 10");
  if (k < 1) throw DataError("verify_cor1 needs k >= 1");
  if (game.ridge() <= 0.0) {
    throw DataError("verify_cor1 needs ridge > 0 for the empty subset");
  }
  const auto subsets = enumerate_subsets_canonical(n);
  const Eigen::VectorXd theta_pruned_full =
      sparse_optimum(game, mask, Coalition::full(n));

  std::vector<double> f_exact(subsets.size());
  std::vector<double> f_ft(subsets.size());
  std::vector<double> f_sparse(subsets.size());
  parallel_for_index(subsets.size(), workers, [&](std::size_t i) {
    const Coalition& s = subsets[i];
    f_exact[i] = model_property(game, retrain_exact(game, s));
    f_sparse[i] = model_property(game, sparse_optimum(game, mask, s));
    const FinetuneTrace trace =
        finetune_sparsified(game, mask, theta_pruned_full, s, k);
    f_ft[i] = model_property(game, trace.final_theta);
  });

  UtilityTable exact_table(n);
  UtilityTable ft_table(n);
  double c_max = 0.0;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    exact_table.set(subsets[i], f_exact[i]);
    ft_table.set(subsets[i], f_ft[i]);
    c_max = std::max(c_max, std::abs(f_sparse[i] - f_exact[i]));
  }

  const auto beta_exact = exact_shapley(exact_table);
  const auto beta_ft = exact_shapley(ft_table);

  Cor1Report report;
  report.n = n;
  report.k = k;
  report.c_max = c_max;
  report.tol = tol;
  report.bound = 2.0 * std::sqrt(static_cast<double>(n)) * c_max + tol;
  double err_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double diff = beta_ft.scores[idx] - beta_exact.scores[idx];
    err_sq += diff * diff;
  }
  report.beta_error_l2 = std::sqrt(err_sq);
  report.beta_exact = beta_exact.scores;
  report.beta_finetuned = beta_ft.scores;
  report.passed = report.beta_error_l2 <= report.bound;
  return report;
}

std::string Cor1Report::to_json() const {
  std::ostringstream os;
  os << "{\"passed\": " << (passed ? "true" : "false") << ", \"n\": " << n
     << ", \"k\": " << k << ", \"beta_error_l2\": "
     << fmt_double17(beta_error_l2) << ", \"c_max\": " << fmt_double17(c_max)
     << ", \"bound\": " << fmt_double17(bound) << "}";
  return os.str();
}

DescentReport verify_descent_bound(const QuadraticGame& game,
                                   const FinetuneTrace& trace,
                                   const Eigen::VectorXd& theta_star_restricted,
                                   double slack) {
  DescentReport report;
  if (trace.objective_path.empty()) {
    throw DataError("trace has no recorded objective values");
  }
  const double l_star = game.objective(trace.subset, theta_star_restricted);
  const double dist_sq =
      (trace.initial_theta - theta_star_restricted).squaredNorm();
  // Floating slack scales with the magnitudes entering the inequality.
  const double scale = std::max(
      {1.0, std::abs(trace.objective_path.front()), std::abs(l_star)});
  const double tol = slack * scale;

  const auto steps = static_cast<int>(trace.objective_path.size()) - 1;
  for (int k = 1; k <= steps; ++k) {
    const double lhs =
        trace.objective_path[static_cast<std::size_t>(k)] - l_star;
    const double rhs = dist_sq / (2.0 * k * trace.alpha);
    ++report.steps_checked;
    const double excess = lhs - rhs;
    report.max_excess = std::max(report.max_excess, excess);
    if (excess > tol) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

}  // namespace ctrb
