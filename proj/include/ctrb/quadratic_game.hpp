#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctrb/coalition.hpp"

namespace ctrb {

// Reproducible synthetic per-contributor regression problem. The game
// is a pure function of the spec.
struct GameSpec {
  int n = 8;
  int d = 20;
  int rows_per_contributor = 5;
  double noise_sd = 0.1;
  double heterogeneity = 1.0;
  std::uint64_t seed = 0;
  // Ridge keeps the minimizer unique for tiny subsets; it shifts the
  // Lipschitz constant by 2*ridge and preserves convexity.
  double ridge = 1e-6;
  int probe_rows = 64;
};

std::string game_spec_to_json(const GameSpec& spec);
GameSpec game_spec_from_json(const std::string& text);

enum class PropertyKind { neg_probe_mse };

// Boolean keep-vector from magnitude pruning.
struct PruneMask {
  std::vector<bool> keep;
  double sparsity = 0.0;

  int dim() const { return static_cast<int>(keep.size()); }
  int kept_count() const;
  std::vector<int> kept_indices() const;
  static PruneMask all_kept(int d);
};

// Per-contributor least-squares blocks, a shared noiseless probe set,
// and the training objective
//   l_S(theta) = ||X_S theta - y_S||^2 + ridge ||theta||^2,
// whose gradient is Lipschitz with L_S = 2 sigma_max(X_S' X_S) + 2 ridge.
class QuadraticGame {
 public:
  QuadraticGame(std::vector<Eigen::MatrixXd> features,
                std::vector<Eigen::VectorXd> targets, double ridge,
                Eigen::MatrixXd probe_features, Eigen::VectorXd probe_targets);

  int n() const { return static_cast<int>(features_.size()); }
  int dim() const { return d_; }
  double ridge() const { return ridge_; }
  PropertyKind property_kind() const { return PropertyKind::neg_probe_mse; }

  const Eigen::MatrixXd& features(int contributor) const;
  const Eigen::VectorXd& targets(int contributor) const;
  const Eigen::MatrixXd& probe_features() const { return probe_features_; }
  const Eigen::VectorXd& probe_targets() const { return probe_targets_; }

  int rows_for(const Coalition& s) const;
  // Stacked [X_S; y_S] for the coalition, contributor blocks in index order.
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack(const Coalition& s) const;

  // l_S at theta.
  double objective(const Coalition& s, const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Coalition& s,
                           const Eigen::VectorXd& theta) const;

  // Exact L_S = 2 sigma_max(X_S' X_S) + 2 ridge. Eigendecomposition up
  // to d = 200, power iteration above.
  double lipschitz_constant(const Coalition& s) const;
  // As above but for the objective restricted to kept coordinates.
  double lipschitz_constant_restricted(const Coalition& s,
                                       const PruneMask& mask) const;

  // Cheap sound upper bounds on L_S (see finetune validation):
  // sum of per-contributor spectral norms, and the full-data constant
  // (X_S' X_S <= X_D' X_D in the PSD order).
  double lipschitz_upper_bound(const Coalition& s) const;
  double lipschitz_full_data() const;

 private:
  int d_;
  double ridge_;
  std::vector<Eigen::MatrixXd> features_;
  std::vector<Eigen::VectorXd> targets_;
  Eigen::MatrixXd probe_features_;
  Eigen::VectorXd probe_targets_;
  std::vector<double> contributor_spectral_;  // sigma_max(X_i' X_i)
  double full_spectral_;                      // sigma_max(X_D' X_D)
};

QuadraticGame generate_game(const GameSpec& spec);

// Exact minimizer of l_S via normal equations. Requires a nonempty
// coalition or ridge > 0.
Eigen::VectorXd retrain_exact(const QuadraticGame& game, const Coalition& s);

// Keep the round((1-sparsity)*d) largest-magnitude coordinates; ties
// keep the lower index.
PruneMask prune_magnitude(const Eigen::VectorXd& theta, double sparsity);

// Exact minimizer restricted to kept coordinates; masked entries zero.
Eigen::VectorXd sparse_optimum(const QuadraticGame& game,
                               const PruneMask& mask, const Coalition& s);

// F(theta) = -(1/N) ||X_probe theta - y_probe||^2.
double model_property(const QuadraticGame& game, const Eigen::VectorXd& theta);

struct FinetuneTrace {
  Coalition subset;
  int k = 0;
  double alpha = 0.0;
  Eigen::VectorXd initial_theta;
  Eigen::VectorXd final_theta;
  // l_S values, entry 0 at the initial point, entry i after step i.
  std::vector<double> objective_path;
  std::optional<std::vector<Eigen::VectorXd>> theta_path;
};

// Masked gradient descent on l_S:
//   theta <- theta - alpha * (mask .* grad l_S(theta)).
// theta_init must be zero on masked coordinates. When alpha is omitted
// it defaults to 1/L_S from the exact spectral norm. An explicit alpha
// above 1/L_S is rejected; the check first tries cheap upper bounds on
// L_S before paying for the exact spectral norm.
FinetuneTrace finetune_sparsified(const QuadraticGame& game,
                                  const PruneMask& mask,
                                  const Eigen::VectorXd& theta_init,
                                  const Coalition& s, int k,
                                  std::optional<double> alpha = std::nullopt,
                                  bool record_theta_path = false);

}  // namespace ctrb
