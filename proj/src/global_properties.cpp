#include "ctrb/global_properties.hpp"

#include <algorithm>
#include <cmath>

#include "ctrb/error.hpp"

namespace ctrb {

double inception_score(const ClassProbTable& table) {
  const auto rows = table.p.rows();
  const auto cols = table.p.cols();
  if (rows < 1 || cols < 1) throw DataError("probability table is empty");
  for (Eigen::Index i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double v = table.p(i, j);
      if (v < 0.0 || !std::isfinite(v)) {
        throw DataError("row " + std::to_string(i) +
                        " has a negative or non-finite probability");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw DataError("row " + std::to_string(i) +
                      " is off the simplex (sum deviates by more than 1e-6)");
    }
  }

  Eigen::VectorXd marginal = table.p.colwise().mean();
  double mean_kl = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    double kl = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double pij = table.p(i, j);
      if (pij > 0.0) kl += pij * (std::log(pij) - std::log(marginal(j)));
    }
    mean_kl += kl;
  }
  mean_kl /= static_cast<double>(rows);
  return std::exp(mean_kl);
}

double cluster_entropy(const ClusterAssignment& assignment) {
  if (assignment.k < 1) throw DataError("cluster count must be >= 1");
  if (assignment.labels.empty()) throw DataError("no cluster labels");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(assignment.k), 0);
  for (int label : assignment.labels) {
    if (label < 0 || label >= assignment.k) {
      throw DataError("label " + std::to_string(label) +
                      " outside [0, K)");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  const auto total = static_cast<double>(assignment.labels.size());
  double entropy = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    entropy -= p * std::log(p);
  }
  return entropy;
}

ClusterAssignment assign_nearest_centroid(const Eigen::MatrixXd& embeddings,
                                          const Eigen::MatrixXd& centroids) {
  if (embeddings.cols() != centroids.cols()) {
    throw DataError("embedding and centroid dimensions differ");
  }
  if (centroids.rows() < 1) throw DataError("need at least one centroid");
  ClusterAssignment out;
  out.k = static_cast<int>(centroids.rows());
  out.labels.resize(static_cast<std::size_t>(embeddings.rows()));
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    int best = 0;
    double best_dist = (embeddings.row(i) - centroids.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double dist = (embeddings.row(i) - centroids.row(c)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = static_cast<int>(c);
      }
    }
    out.labels[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

double percentile_score(const std::vector<double>& values, double q) {
  if (values.empty()) throw DataError("percentile of empty input");
  if (!(q > 0.0) || q > 100.0) throw DataError("q must be in (0, 100]");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  // q*N first, then /100: keeps integer cases like q=90, N=50 exact.
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size()) / 100.0));
  const std::size_t idx = std::max<std::size_t>(rank, 1) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

}  // namespace ctrb
