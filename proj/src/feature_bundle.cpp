#include "ctrb/feature_bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctrb/error.hpp"
#include "ctrb/rng.hpp"

namespace ctrb {

void validate_assignment(const ContributorAssignment& assignment) {
  if (assignment.n_contributors < 1) {
    throw DataError("assignment needs at least one contributor");
  }
  std::vector<std::int64_t> counts(
      static_cast<std::size_t>(assignment.n_contributors), 0);
  for (int o : assignment.owner) {
    if (o < 0 || o >= assignment.n_contributors) {
      throw DataError("owner index " + std::to_string(o) + " out of range");
    }
    ++counts[static_cast<std::size_t>(o)];
  }
  for (int i = 0; i < assignment.n_contributors; ++i) {
    if (counts[static_cast<std::size_t>(i)] == 0) {
      throw DataError("contributor " + std::to_string(i) + " owns no data");
    }
  }
}

Eigen::MatrixXd random_projection(const Eigen::MatrixXd& g, int k,
                                  std::uint64_t seed, bool identity) {
  const auto d = static_cast<int>(g.cols());
  if (k > d) {
    throw DataError("projection dimension k=" + std::to_string(k) +
                    " exceeds input dimension d=" + std::to_string(d));
  }
  if (identity) {
    if (k != d) throw DataError("identity bypass requires k == d");
    return g;
  }
  SplitMix64 rng = SplitMix64(seed).split(3);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  Eigen::MatrixXd projection(d, k);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < k; ++c) {
      projection(r, c) = scale * rng.next_gaussian();
    }
  }
  return g * projection;
}

namespace {

// Cholesky of the ridged kernel after the positive-definiteness check.
Eigen::LLT<Eigen::MatrixXd> kernel_factor(const Eigen::MatrixXd& phi,
                                          double lambda) {
  if (lambda < 0.0) throw DataError("lambda must be >= 0");
  const auto k = phi.cols();
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(k, k);
  kernel.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  kernel = kernel.selfadjointView<Eigen::Lower>();
  kernel.diagonal().array() += lambda;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || lo <= hi * 1e-14) {
    throw DataError(
        "kernel Phi'Phi + lambda I is singular; increase lambda");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(kernel);
  if (llt.info() != Eigen::Success) {
    throw DataError("kernel factorization failed; increase lambda");
  }
  return llt;
}

void check_bundle(const FeatureBundle& bundle) {
  if (bundle.gammas.empty()) throw DataError("bundle has no query features");
  for (const auto& gamma : bundle.gammas) {
    if (gamma.cols() != bundle.phi.cols()) {
      throw DataError("Phi and Gamma have mismatched feature widths");
    }
    if (!gamma.allFinite()) throw DataError("Gamma has non-finite entries");
  }
  if (!bundle.phi.allFinite()) throw DataError("Phi has non-finite entries");
}

}  // namespace

Eigen::MatrixXd trak_scores(const Eigen::MatrixXd& phi,
                            const Eigen::MatrixXd& gamma, double lambda) {
  if (gamma.cols() != phi.cols()) {
    throw DataError("Phi and Gamma have mismatched feature widths");
  }
  const auto llt = kernel_factor(phi, lambda);
  // (Phi'Phi + lambda I)^-1 Gamma', then one row per training datum.
  const Eigen::MatrixXd solved = llt.solve(gamma.transpose());
  return phi * solved;
}

Eigen::MatrixXd trak_scores(const FeatureBundle& bundle) {
  check_bundle(bundle);
  return trak_scores(bundle.phi, bundle.gammas.front(), bundle.lambda);
}

Eigen::MatrixXd journey_trak_scores(const FeatureBundle& bundle) {
  check_bundle(bundle);
  const auto llt = kernel_factor(bundle.phi, bundle.lambda);
  Eigen::MatrixXd total;
  for (const auto& gamma : bundle.gammas) {
    const Eigen::MatrixXd scores = bundle.phi * llt.solve(gamma.transpose());
    if (total.size() == 0) {
      total = scores;
    } else {
      if (scores.rows() != total.rows() || scores.cols() != total.cols()) {
        throw DataError("per-timestep Gammas have mismatched shapes");
      }
      total += scores;
    }
  }
  return total / static_cast<double>(bundle.gammas.size());
}

Eigen::MatrixXd relative_if_scores(const FeatureBundle& bundle) {
  check_bundle(bundle);
  const auto llt = kernel_factor(bundle.phi, bundle.lambda);
  const Eigen::MatrixXd numerator =
      bundle.phi * llt.solve(bundle.gammas.front().transpose());
  // Columns of (Phi'Phi + lambda I)^-1 Phi' are the kernel inverse
  // applied to each training gradient.
  const Eigen::MatrixXd solved_phi = llt.solve(bundle.phi.transpose());

  Eigen::MatrixXd scores = numerator;
  bool warned = false;
  for (Eigen::Index j = 0; j < scores.rows(); ++j) {
    const double denom = solved_phi.col(j).norm();
    if (denom == 0.0) {
      scores.row(j).setZero();
      if (!warned) {
        warn("relative IF: zero-gradient training datum scored 0");
        warned = true;
      }
    } else {
      scores.row(j) /= denom;
    }
  }
  return scores;
}

Eigen::MatrixXd renormalized_if_scores(const FeatureBundle& bundle) {
  check_bundle(bundle);
  Eigen::MatrixXd scores =
      trak_scores(bundle.phi, bundle.gammas.front(), bundle.lambda);
  bool warned = false;
  for (Eigen::Index j = 0; j < scores.rows(); ++j) {
    const double denom = bundle.phi.row(j).norm();
    if (denom == 0.0) {
      scores.row(j).setZero();
      if (!warned) {
        warn("renormalized IF: zero-gradient training datum scored 0");
        warned = true;
      }
    } else {
      scores.row(j) /= denom;
    }
  }
  return scores;
}

std::vector<double> cosine_scores(const Eigen::MatrixXd& train_vectors,
                                  const Eigen::MatrixXd& query_vectors,
                                  Reduce reduce) {
  if (train_vectors.cols() != query_vectors.cols()) {
    throw DataError("train and query vectors have different dimensions");
  }
  if (query_vectors.rows() < 1) throw DataError("no query vectors");
  bool warned = false;
  const auto n_train = train_vectors.rows();
  const auto n_query = query_vectors.rows();
  std::vector<double> out(static_cast<std::size_t>(n_train), 0.0);
  for (Eigen::Index t = 0; t < n_train; ++t) {
    const double tn = train_vectors.row(t).norm();
    double acc = reduce == Reduce::max
                     ? -std::numeric_limits<double>::infinity()
                     : 0.0;
    for (Eigen::Index q = 0; q < n_query; ++q) {
      const double qn = query_vectors.row(q).norm();
      double cosine = 0.0;
      if (tn == 0.0 || qn == 0.0) {
        if (!warned) {
          warn("cosine: zero vector scored 0");
          warned = true;
        }
      } else {
        cosine = train_vectors.row(t).dot(query_vectors.row(q)) / (tn * qn);
      }
      if (reduce == Reduce::max) {
        acc = std::max(acc, cosine);
      } else {
        acc += cosine;
      }
    }
    out[static_cast<std::size_t>(t)] =
        reduce == Reduce::max ? acc : acc / static_cast<double>(n_query);
  }
  return out;
}

std::vector<double> reduce_queries_mean(const Eigen::MatrixXd& scores) {
  std::vector<double> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = scores.row(r).mean();
  }
  return out;
}

std::vector<double> aggregate_to_contributors(
    const std::vector<double>& per_datum_scores,
    const ContributorAssignment& assignment, AggregateMode mode) {
  validate_assignment(assignment);
  if (per_datum_scores.size() != assignment.owner.size()) {
    throw DataError("score count does not match assignment");
  }
  const auto n = static_cast<std::size_t>(assignment.n_contributors);
  std::vector<double> out(n, 0.0);
  std::vector<std::int64_t> counts(n, 0);
  if (mode == AggregateMode::max) {
    std::fill(out.begin(), out.end(),
              -std::numeric_limits<double>::infinity());
  }
  for (std::size_t i = 0; i < per_datum_scores.size(); ++i) {
    const auto owner = static_cast<std::size_t>(assignment.owner[i]);
    switch (mode) {
      case AggregateMode::sum:
      case AggregateMode::mean:
        out[owner] += per_datum_scores[i];
        break;
      case AggregateMode::max:
        out[owner] = std::max(out[owner], per_datum_scores[i]);
        break;
    }
    ++counts[owner];
  }
  if (mode == AggregateMode::mean) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] /= static_cast<double>(counts[i]);
    }
  }
  return out;
}

}  // namespace ctrb
