#include "ctrb/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "ctrb/error.hpp"
#include "ctrb/rng.hpp"

namespace ctrb {

namespace {

// Binomial coefficients as doubles; exact for the n <= 20 range used here.
std::vector<double> binomial_row(int n) {
  std::vector<double> row(static_cast<std::size_t>(n + 1));
  row[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    row[static_cast<std::size_t>(k)] =
        row[static_cast<std::size_t>(k - 1)] * (n - k + 1) / k;
  }
  return row;
}

double efficiency_gap_of(const std::vector<double>& scores, double null_u,
                         double full_u) {
  double sum = 0.0;
  for (double s : scores) sum += s;
  return std::abs(sum - (full_u - null_u));
}

// Dense utility lookup by bitmask for complete tables.
std::vector<double> utilities_by_mask(const UtilityTable& table) {
  const int n = table.n();
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<double> v(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    v[mask] = table.get(Coalition::from_mask(mask, n));
  }
  return v;
}

}  // namespace

AttributionResult exact_shapley(const UtilityTable& table) {
  const int n = table.n();
  if (n > 20) {
    throw DataError("exact Shapley enumeration limited to n <= 20, got n=" +
                    std::to_string(n));
  }
  const auto v = utilities_by_mask(table);
  const auto choose = binomial_row(n - 1);

  // weight[s] = (1/n) * C(n-1, s)^-1 for |S| = s (S excludes contributor i).
  std::vector<double> weight(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    weight[static_cast<std::size_t>(s)] =
        1.0 / (static_cast<double>(n) * choose[static_cast<std::size_t>(s)]);
  }

  AttributionResult r;
  r.estimator = "exact_shapley";
  r.n = n;
  r.scores.assign(static_cast<std::size_t>(n), 0.0);
  r.samples_used = std::int64_t{1} << n;

  const std::uint64_t all = (std::uint64_t{1} << n) - 1;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    const std::uint64_t others = all ^ bit;
    double beta = 0.0;
    // Iterate the subsets of "others" via the standard submask walk.
    std::uint64_t sub = 0;
    for (;;) {
      const int s = std::popcount(sub);
      beta += weight[static_cast<std::size_t>(s)] * (v[sub | bit] - v[sub]);
      if (sub == others) break;
      sub = (sub - others) & others;
    }
    r.scores[static_cast<std::size_t>(i)] = beta;
  }

  r.efficiency_gap = efficiency_gap_of(r.scores, table.null_utility(),
                                       table.full_utility());
  return r;
}

AttributionResult kernel_shap(const UtilityOracle& oracle, int n,
                              const std::vector<SubsetSample>& samples,
                              double null_utility, double full_utility) {
  if (samples.empty()) throw DataError("kernel_shap needs samples");

  std::vector<int> seen_in(static_cast<std::size_t>(n), 0);
  std::vector<int> seen_out(static_cast<std::size_t>(n), 0);

  Eigen::MatrixXd a_hat = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b_hat = Eigen::VectorXd::Zero(n);
  for (const auto& s : samples) {
    const int size = s.coalition.size();
    if (size < 1 || size > n - 1) {
      throw DataError("kernel_shap sample " + std::to_string(s.draw_index) +
                      " has degenerate size " + std::to_string(size));
    }
    const double u = oracle(s.coalition);
    if (!std::isfinite(u)) {
      throw DataError("non-finite utility for subset " +
                      subset_hex(canonical_id(s.coalition)));
    }
    const double centered = u - null_utility;
    for (int i : s.coalition.members) {
      b_hat(i) += centered;
      for (int j : s.coalition.members) a_hat(i, j) += 1.0;
    }
    auto it = s.coalition.members.begin();
    for (int i = 0; i < n; ++i) {
      if (it != s.coalition.members.end() && *it == i) {
        ++seen_in[static_cast<std::size_t>(i)];
        ++it;
      } else {
        ++seen_out[static_cast<std::size_t>(i)];
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (seen_in[static_cast<std::size_t>(i)] == 0 ||
        seen_out[static_cast<std::size_t>(i)] == 0) {
      throw DataError(
          "contributor " + std::to_string(i) +
          " never sampled on both sides; draw more samples");
    }
  }

  const double m = static_cast<double>(samples.size());
  a_hat /= m;
  b_hat /= m;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_hat);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  const double lambda_min = eig.eigenvalues().minCoeff();
  if (!(lambda_max > 0.0) || lambda_min / lambda_max < 1e-12) {
    throw DataError(
        "singular sampling matrix (rcond < 1e-12); draw more samples");
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(a_hat);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd ainv_b = ldlt.solve(b_hat);
  const Eigen::VectorXd ainv_1 = ldlt.solve(ones);
  const double target = full_utility - null_utility;
  const double correction = (ones.dot(ainv_b) - target) / ones.dot(ainv_1);
  Eigen::VectorXd beta = ainv_b - correction * ainv_1;

  // Snap the constraint to the target exactly; the closed form leaves
  // only rounding residue.
  const double resid = beta.sum() - target;
  beta.array() -= resid / n;

  AttributionResult r;
  r.estimator = "kernel_shap";
  r.n = n;
  r.scores.assign(beta.data(), beta.data() + n);
  r.samples_used = static_cast<std::int64_t>(samples.size());
  r.seed = samples.front().seed;
  r.efficiency_gap = efficiency_gap_of(r.scores, null_utility, full_utility);
  return r;
}

AttributionResult banzhaf_mc(const UtilityOracle& oracle, int n,
                             const std::vector<SubsetSample>& samples,
                             double null_utility, double full_utility) {
  if (samples.empty()) throw DataError("banzhaf_mc needs samples");

  std::vector<double> sum_in(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sum_out(static_cast<std::size_t>(n), 0.0);
  std::vector<std::int64_t> cnt_in(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> cnt_out(static_cast<std::size_t>(n), 0);

  for (const auto& s : samples) {
    const double u = oracle(s.coalition);
    if (!std::isfinite(u)) {
      throw DataError("non-finite utility for subset " +
                      subset_hex(canonical_id(s.coalition)));
    }
    auto it = s.coalition.members.begin();
    for (int i = 0; i < n; ++i) {
      if (it != s.coalition.members.end() && *it == i) {
        sum_in[static_cast<std::size_t>(i)] += u;
        ++cnt_in[static_cast<std::size_t>(i)];
        ++it;
      } else {
        sum_out[static_cast<std::size_t>(i)] += u;
        ++cnt_out[static_cast<std::size_t>(i)];
      }
    }
  }

  AttributionResult r;
  r.estimator = "banzhaf_mc";
  r.n = n;
  r.scores.assign(static_cast<std::size_t>(n), 0.0);
  r.samples_used = static_cast<std::int64_t>(samples.size());
  r.seed = samples.front().seed;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (cnt_in[idx] == 0 || cnt_out[idx] == 0) {
      r.undefined.push_back(i);
      continue;
    }
    r.scores[idx] = sum_in[idx] / static_cast<double>(cnt_in[idx]) -
                    sum_out[idx] / static_cast<double>(cnt_out[idx]);
  }
  r.efficiency_gap = efficiency_gap_of(r.scores, null_utility, full_utility);
  return r;
}

AttributionResult leave_one_out(const UtilityTable& table) {
  const int n = table.n();
  const Coalition full = Coalition::full(n);
  const double f_full = table.full_utility();

  AttributionResult r;
  r.estimator = "leave_one_out";
  r.n = n;
  r.scores.assign(static_cast<std::size_t>(n), 0.0);
  r.samples_used = n + 2;
  for (int i = 0; i < n; ++i) {
    r.scores[static_cast<std::size_t>(i)] = f_full - table.get(full.without(i));
  }
  r.efficiency_gap = efficiency_gap_of(r.scores, table.null_utility(), f_full);
  return r;
}

Eigen::MatrixXd shapley_operator(int n) {
  if (n < 1 || n > 14) {
    throw DataError("shapley_operator limited to 1 <= n <= 14, got n=" +
                    std::to_string(n));
  }
  const auto subsets = enumerate_subsets_canonical(n);
  const auto choose = binomial_row(n - 1);
  Eigen::MatrixXd a(n, static_cast<Eigen::Index>(subsets.size()));
  for (std::size_t col = 0; col < subsets.size(); ++col) {
    const Coalition& s = subsets[col];
    const int size = s.size();
    for (int i = 0; i < n; ++i) {
      if (s.contains(i)) {
        a(i, static_cast<Eigen::Index>(col)) =
            1.0 / (n * choose[static_cast<std::size_t>(size - 1)]);
      } else {
        a(i, static_cast<Eigen::Index>(col)) =
            -1.0 / (n * choose[static_cast<std::size_t>(size)]);
      }
    }
  }
  return a;
}

Eigen::VectorXd utility_vector_canonical(const UtilityTable& table) {
  const auto subsets = enumerate_subsets_canonical(table.n());
  Eigen::VectorXd v(static_cast<Eigen::Index>(subsets.size()));
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = table.get(subsets[i]);
  }
  return v;
}

AxiomReport verify_shapley_axioms(int n, int trials, std::uint64_t seed,
                                  double tol) {
  AxiomReport report;
  report.trials = trials;
  SplitMix64 rng = SplitMix64(seed).split(7);
  const auto subsets = enumerate_subsets_canonical(n);

  for (int t = 0; t < trials; ++t) {
    // Random complete game with utilities in [0, 1).
    UtilityTable game(n);
    for (const auto& s : subsets) game.set(s, rng.next_double());
    const auto beta = exact_shapley(game);

    // Efficiency.
    const double scale =
        std::max(1.0, std::abs(game.full_utility() - game.null_utility()));
    report.max_efficiency_gap =
        std::max(report.max_efficiency_gap, beta.efficiency_gap / scale);
    if (beta.efficiency_gap > tol * scale) ++report.efficiency_failures;

    // Symmetry: symmetrize the game w.r.t. contributors 0 and 1 by
    // averaging each subset's utility with its 0<->1 swapped image.
    UtilityTable sym(n);
    for (const auto& s : subsets) {
      std::uint64_t mask = s.mask();
      std::uint64_t swapped = mask & ~std::uint64_t{3};
      if (mask & 1) swapped |= 2;
      if (mask & 2) swapped |= 1;
      sym.set(s, 0.5 * (game.get(s) +
                        game.get(Coalition::from_mask(swapped, n))));
    }
    const auto beta_sym = exact_shapley(sym);
    if (std::abs(beta_sym.scores[0] - beta_sym.scores[1]) > tol) {
      ++report.symmetry_failures;
    }

    // Dummy: force contributor 0 to add nothing anywhere.
    UtilityTable dummy(n);
    for (const auto& s : subsets) {
      dummy.set(s, game.get(s.without(0)));
    }
    const auto beta_dummy = exact_shapley(dummy);
    if (std::abs(beta_dummy.scores[0]) > tol) ++report.dummy_failures;

    // Linearity: beta(a1 F1 + a2 F2) = a1 beta(F1) + a2 beta(F2).
    UtilityTable game2(n);
    for (const auto& s : subsets) game2.set(s, rng.next_double());
    const double a1 = 0.5 + rng.next_double();
    const double a2 = -1.0 + 2.0 * rng.next_double();
    UtilityTable mix(n);
    for (const auto& s : subsets) {
      mix.set(s, a1 * game.get(s) + a2 * game2.get(s));
    }
    const auto beta2 = exact_shapley(game2);
    const auto beta_mix = exact_shapley(mix);
    for (int i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double expected = a1 * beta.scores[idx] + a2 * beta2.scores[idx];
      if (std::abs(beta_mix.scores[idx] - expected) >
          tol * std::max(1.0, std::abs(expected))) {
        ++report.linearity_failures;
        break;
      }
    }
  }

  report.passed = report.efficiency_failures == 0 &&
                  report.symmetry_failures == 0 &&
                  report.dummy_failures == 0 &&
                  report.linearity_failures == 0;
  return report;
}

}  // namespace ctrb
