#include "ctrb/quadratic_game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctrb/error.hpp"
#include "ctrb/io_util.hpp"
#include "ctrb/rng.hpp"
#include "nlohmann/json.hpp"

namespace ctrb {

std::string game_spec_to_json(const GameSpec& spec) {
  nlohmann::json j;
  j["n"] = spec.n;
  j["d"] = spec.d;
  j["rows_per_contributor"] = spec.rows_per_contributor;
  j["noise_sd"] = spec.noise_sd;
  j["heterogeneity"] = spec.heterogeneity;
  j["seed"] = spec.seed;
  j["ridge"] = spec.ridge;
  j["probe_rows"] = spec.probe_rows;
  return j.dump();
}

GameSpec game_spec_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GameSpec spec;
  spec.n = j.value("n", spec.n);
  spec.d = j.value("d", spec.d);
  spec.rows_per_contributor =
      j.value("rows_per_contributor", spec.rows_per_contributor);
  spec.noise_sd = j.value("noise_sd", spec.noise_sd);
  spec.heterogeneity = j.value("heterogeneity", spec.heterogeneity);
  spec.seed = j.value("seed", spec.seed);
  spec.ridge = j.value("ridge", spec.ridge);
  spec.probe_rows = j.value("probe_rows", spec.probe_rows);
  return spec;
}

int PruneMask::kept_count() const {
  return static_cast<int>(std::count(keep.begin(), keep.end(), true));
}

std::vector<int> PruneMask::kept_indices() const {
  std::vector<int> idx;
  for (int i = 0; i < dim(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  return idx;
}

PruneMask PruneMask::all_kept(int d) {
  PruneMask m;
  m.keep.assign(static_cast<std::size_t>(d), true);
  m.sparsity = 0.0;
  return m;
}

namespace {

double spectral_norm_sym(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return 0.0;
  if (a.rows() <= 200) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    return eig.eigenvalues().maxCoeff();
  }
  // Power iteration for larger grams, tolerance 1e-10.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = a * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = w.dot(a * w);
    if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
      return next;
    }
    lambda = next;
    v = w;
  }
  return lambda;
}

Eigen::MatrixXd gram_of(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  a.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  return Eigen::MatrixXd(a.selfadjointView<Eigen::Lower>());
}

}  // namespace

QuadraticGame::QuadraticGame(std::vector<Eigen::MatrixXd> features,
                             std::vector<Eigen::VectorXd> targets,
                             double ridge, Eigen::MatrixXd probe_features,
                             Eigen::VectorXd probe_targets)
    : ridge_(ridge),
      features_(std::move(features)),
      targets_(std::move(targets)),
      probe_features_(std::move(probe_features)),
      probe_targets_(std::move(probe_targets)) {
  if (features_.empty()) throw DataError("game needs at least one contributor");
  if (ridge_ < 0.0) throw DataError("ridge must be >= 0");
  d_ = static_cast<int>(features_.front().cols());
  if (d_ < 1) throw DataError("game needs d >= 1");
  Eigen::MatrixXd full_gram = Eigen::MatrixXd::Zero(d_, d_);
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].cols() != d_) {
      throw DataError("contributor feature width mismatch");
    }
    if (features_[i].rows() < 1) {
      throw DataError("every contributor needs at least one row");
    }
    if (features_[i].rows() != targets_[i].size()) {
      throw DataError("feature/target row mismatch");
    }
    const Eigen::MatrixXd g = gram_of(features_[i]);
    contributor_spectral_.push_back(spectral_norm_sym(g));
    full_gram += g;
  }
  if (probe_features_.rows() < 1 || probe_features_.cols() != d_ ||
      probe_features_.rows() != probe_targets_.size()) {
    throw DataError("probe set malformed");
  }
  full_spectral_ = spectral_norm_sym(full_gram);
}

const Eigen::MatrixXd& QuadraticGame::features(int contributor) const {
  return features_.at(static_cast<std::size_t>(contributor));
}

const Eigen::VectorXd& QuadraticGame::targets(int contributor) const {
  return targets_.at(static_cast<std::size_t>(contributor));
}

int QuadraticGame::rows_for(const Coalition& s) const {
  int rows = 0;
  for (int i : s.members) {
    rows += static_cast<int>(features_[static_cast<std::size_t>(i)].rows());
  }
  return rows;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> QuadraticGame::stack(
    const Coalition& s) const {
  const int rows = rows_for(s);
  Eigen::MatrixXd x(rows, d_);
  Eigen::VectorXd y(rows);
  int at = 0;
  for (int i : s.members) {
    const auto& xi = features_[static_cast<std::size_t>(i)];
    const auto& yi = targets_[static_cast<std::size_t>(i)];
    x.middleRows(at, xi.rows()) = xi;
    y.segment(at, yi.size()) = yi;
    at += static_cast<int>(xi.rows());
  }
  return {std::move(x), std::move(y)};
}

double QuadraticGame::objective(const Coalition& s,
                                const Eigen::VectorXd& theta) const {
  double value = ridge_ * theta.squaredNorm();
  for (int i : s.members) {
    value += (features_[static_cast<std::size_t>(i)] * theta -
              targets_[static_cast<std::size_t>(i)])
                 .squaredNorm();
  }
  return value;
}

Eigen::VectorXd QuadraticGame::gradient(const Coalition& s,
                                        const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g = 2.0 * ridge_ * theta;
  for (int i : s.members) {
    const auto& xi = features_[static_cast<std::size_t>(i)];
    const auto& yi = targets_[static_cast<std::size_t>(i)];
    g.noalias() += 2.0 * xi.transpose() * (xi * theta - yi);
  }
  return g;
}

double QuadraticGame::lipschitz_constant(const Coalition& s) const {
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d_, d_);
  for (int i : s.members) {
    gram += gram_of(features_[static_cast<std::size_t>(i)]);
  }
  return 2.0 * spectral_norm_sym(gram) + 2.0 * ridge_;
}

double QuadraticGame::lipschitz_constant_restricted(
    const Coalition& s, const PruneMask& mask) const {
  const auto kept = mask.kept_indices();
  Eigen::MatrixXd gram =
      Eigen::MatrixXd::Zero(static_cast<int>(kept.size()),
                            static_cast<int>(kept.size()));
  for (int i : s.members) {
    const auto& xi = features_[static_cast<std::size_t>(i)];
    Eigen::MatrixXd xk(xi.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      xk.col(static_cast<Eigen::Index>(c)) = xi.col(kept[c]);
    }
    gram += gram_of(xk);
  }
  return 2.0 * spectral_norm_sym(gram) + 2.0 * ridge_;
}

double QuadraticGame::lipschitz_upper_bound(const Coalition& s) const {
  double sum = 0.0;
  for (int i : s.members) {
    sum += contributor_spectral_[static_cast<std::size_t>(i)];
  }
  // X_S'X_S <= X_D'X_D in PSD order, so the full-data norm also bounds.
  return 2.0 * std::min(sum, full_spectral_) + 2.0 * ridge_;
}

double QuadraticGame::lipschitz_full_data() const {
  return 2.0 * full_spectral_ + 2.0 * ridge_;
}

QuadraticGame generate_game(const GameSpec& spec) {
  if (spec.n < 1 || spec.d < 1 || spec.rows_per_contributor < 1) {
    throw DataError("game spec needs n, d, rows_per_contributor >= 1");
  }
  if (spec.probe_rows < 1) throw DataError("game spec needs probe_rows >= 1");

  SplitMix64 root(spec.seed);
  SplitMix64 shared_rng = root.split(10);
  SplitMix64 offset_rng = root.split(11);
  SplitMix64 feature_rng = root.split(12);
  SplitMix64 noise_rng = root.split(13);
  SplitMix64 probe_rng = root.split(14);

  Eigen::VectorXd theta_shared(spec.d);
  for (int j = 0; j < spec.d; ++j) {
    theta_shared(j) = shared_rng.next_gaussian();
  }

  std::vector<Eigen::MatrixXd> features;
  std::vector<Eigen::VectorXd> targets;
  features.reserve(static_cast<std::size_t>(spec.n));
  targets.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    Eigen::VectorXd theta_i = theta_shared;
    for (int j = 0; j < spec.d; ++j) {
      theta_i(j) += spec.heterogeneity * offset_rng.next_gaussian();
    }
    Eigen::MatrixXd x(spec.rows_per_contributor, spec.d);
    for (int r = 0; r < spec.rows_per_contributor; ++r) {
      for (int j = 0; j < spec.d; ++j) {
        x(r, j) = feature_rng.next_gaussian();
      }
    }
    Eigen::VectorXd y = x * theta_i;
    for (int r = 0; r < spec.rows_per_contributor; ++r) {
      y(r) += spec.noise_sd * noise_rng.next_gaussian();
    }
    features.push_back(std::move(x));
    targets.push_back(std::move(y));
  }

  Eigen::MatrixXd x_probe(spec.probe_rows, spec.d);
  for (int r = 0; r < spec.probe_rows; ++r) {
    for (int j = 0; j < spec.d; ++j) {
      x_probe(r, j) = probe_rng.next_gaussian();
    }
  }
  Eigen::VectorXd y_probe = x_probe * theta_shared;

  return QuadraticGame(std::move(features), std::move(targets), spec.ridge,
                       std::move(x_probe), std::move(y_probe));
}

namespace {

// Solve (gram + ridge I) theta = rhs, with the spec's singularity and
// residual-gradient checks.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& gram,
                                       const Eigen::VectorXd& rhs,
                                       double ridge) {
  Eigen::MatrixXd a = gram;
  a.diagonal().array() += ridge;
  if (ridge == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo <= hi * 1e-12) {
      throw DataError(
          "singular normal equations; set ridge > 0 or add data");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw DataError("normal equations not positive definite; increase ridge");
  }
  Eigen::VectorXd theta = llt.solve(rhs);
  const double grad_norm = (a * theta - rhs).norm();
  if (grad_norm >= 1e-8 * (1.0 + rhs.norm())) {
    // One refinement pass before giving up.
    theta += llt.solve(rhs - a * theta);
    const double refined = (a * theta - rhs).norm();
    if (refined >= 1e-8 * (1.0 + rhs.norm())) {
      throw DataError("normal equations too ill-conditioned; increase ridge");
    }
  }
  return theta;
}

}  // namespace

Eigen::VectorXd retrain_exact(const QuadraticGame& game, const Coalition& s) {
  if (s.size() == 0 && game.ridge() == 0.0) {
    throw DataError("empty coalition with ridge 0 has no unique minimizer");
  }
  const int d = game.dim();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (int i : s.members) {
    const auto& xi = game.features(i);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xi.transpose());
    rhs.noalias() += xi.transpose() * game.targets(i);
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  // Objective gradient is 2((gram + ridge I) theta - rhs); solve the
  // un-doubled system.
  return solve_normal_equations(gram, rhs, game.ridge());
}

PruneMask prune_magnitude(const Eigen::VectorXd& theta, double sparsity) {
  if (sparsity < 0.0 || sparsity >= 1.0) {
    throw DataError("sparsity must be in [0, 1)");
  }
  const int d = static_cast<int>(theta.size());
  const auto kept_count =
      static_cast<int>(std::lround((1.0 - sparsity) * d));
  if (kept_count < 1) {
    throw DataError("sparsity leaves no coordinates; lower it");
  }
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&theta](int a, int b) {
    return std::abs(theta(a)) > std::abs(theta(b));
  });
  PruneMask mask;
  mask.keep.assign(static_cast<std::size_t>(d), false);
  mask.sparsity = sparsity;
  for (int i = 0; i < kept_count; ++i) {
    mask.keep[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        true;
  }
  return mask;
}

Eigen::VectorXd sparse_optimum(const QuadraticGame& game,
                               const PruneMask& mask, const Coalition& s) {
  if (mask.dim() != game.dim()) throw DataError("mask dimension mismatch");
  if (s.size() == 0 && game.ridge() == 0.0) {
    throw DataError("empty coalition with ridge 0 has no unique minimizer");
  }
  const auto kept = mask.kept_indices();
  const auto dk = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dk, dk);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dk);
  for (int i : s.members) {
    const auto& xi = game.features(i);
    Eigen::MatrixXd xk(xi.rows(), dk);
    for (Eigen::Index c = 0; c < dk; ++c) {
      xk.col(c) = xi.col(kept[static_cast<std::size_t>(c)]);
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xk.transpose());
    rhs.noalias() += xk.transpose() * game.targets(i);
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  const Eigen::VectorXd theta_k =
      solve_normal_equations(gram, rhs, game.ridge());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(game.dim());
  for (Eigen::Index c = 0; c < dk; ++c) {
    theta(kept[static_cast<std::size_t>(c)]) = theta_k(c);
  }
  return theta;
}

double model_property(const QuadraticGame& game,
                      const Eigen::VectorXd& theta) {
  if (theta.size() != game.dim()) throw DataError("theta dimension mismatch");
  const auto n = static_cast<double>(game.probe_features().rows());
  return -(game.probe_features() * theta - game.probe_targets())
              .squaredNorm() /
         n;
}

FinetuneTrace finetune_sparsified(const QuadraticGame& game,
                                  const PruneMask& mask,
                                  const Eigen::VectorXd& theta_init,
                                  const Coalition& s, int k,
                                  std::optional<double> alpha,
                                  bool record_theta_path) {
  if (mask.dim() != game.dim()) throw DataError("mask dimension mismatch");
  if (theta_init.size() != game.dim()) {
    throw DataError("theta_init dimension mismatch");
  }
  if (k < 0) throw DataError("step count must be >= 0");
  for (int j = 0; j < game.dim(); ++j) {
    if (!mask.keep[static_cast<std::size_t>(j)] && theta_init(j) != 0.0) {
      throw DataError("theta_init must be zero on masked coordinates");
    }
  }

  double rate;
  if (alpha.has_value()) {
    rate = *alpha;
    if (!(rate > 0.0)) throw DataError("learning rate must be positive");
    // Reject alpha > 1/L_S. Cheap sound upper bounds on L_S decide most
    // cases; fall back to the exact spectral norm when inconclusive.
    if (rate * game.lipschitz_upper_bound(s) > 1.0) {
      const double exact = game.lipschitz_constant(s);
      if (rate * exact > 1.0 + 1e-12) {
        throw DataError("learning rate " + fmt_double6(rate) +
                        " exceeds 1/L_S = " + fmt_double6(1.0 / exact));
      }
    }
  } else {
    rate = 1.0 / game.lipschitz_constant(s);
  }

  const auto kept = mask.kept_indices();
  const auto dk = static_cast<Eigen::Index>(kept.size());

  // Restricted sufficient statistics: masked gradient descent only
  // moves kept coordinates, so iterate in the kept subspace.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dk, dk);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dk);
  double y_sq = 0.0;
  for (int i : s.members) {
    const auto& xi = game.features(i);
    Eigen::MatrixXd xk(xi.rows(), dk);
    for (Eigen::Index c = 0; c < dk; ++c) {
      xk.col(c) = xi.col(kept[static_cast<std::size_t>(c)]);
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xk.transpose());
    rhs.noalias() += xk.transpose() * game.targets(i);
    y_sq += game.targets(i).squaredNorm();
  }
  gram = gram.selfadjointView<Eigen::Lower>();
  gram.diagonal().array() += game.ridge();
  // l_S(theta) = theta_k' (gram) theta_k - 2 rhs' theta_k + y_sq with the
  // ridge folded into gram; gradient on kept coords = 2(gram theta_k - rhs).

  Eigen::VectorXd theta_k(dk);
  for (Eigen::Index c = 0; c < dk; ++c) {
    theta_k(c) = theta_init(kept[static_cast<std::size_t>(c)]);
  }

  FinetuneTrace trace;
  trace.subset = s;
  trace.k = k;
  trace.alpha = rate;
  trace.initial_theta = theta_init;
  trace.objective_path.reserve(static_cast<std::size_t>(k) + 1);
  if (record_theta_path) trace.theta_path.emplace();

  auto embed = [&](const Eigen::VectorXd& tk) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(game.dim());
    for (Eigen::Index c = 0; c < dk; ++c) {
      full(kept[static_cast<std::size_t>(c)]) = tk(c);
    }
    return full;
  };
  auto objective_k = [&](const Eigen::VectorXd& tk) {
    return tk.dot(gram * tk) - 2.0 * rhs.dot(tk) + y_sq;
  };

  trace.objective_path.push_back(objective_k(theta_k));
  if (record_theta_path) trace.theta_path->push_back(embed(theta_k));

  for (int step = 0; step < k; ++step) {
    const Eigen::VectorXd grad = 2.0 * (gram * theta_k - rhs);
    theta_k.noalias() -= rate * grad;
    trace.objective_path.push_back(objective_k(theta_k));
    if (record_theta_path) trace.theta_path->push_back(embed(theta_k));
  }

  trace.final_theta = embed(theta_k);
  return trace;
}

}  // namespace ctrb
