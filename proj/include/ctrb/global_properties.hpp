#pragma once

#include <Eigen/Dense>
#include <vector>

namespace ctrb {

// Rows are class-probability vectors on the simplex (checked to 1e-6).
struct ClassProbTable {
  Eigen::MatrixXd p;  // N_images x K
};

struct ClusterAssignment {
  std::vector<int> labels;  // cluster ids in [0, K)
  int k = 0;
};

// IS = exp(mean over rows of KL(row || column mean)), with 0 log 0 = 0.
double inception_score(const ClassProbTable& table);

// Entropy (nats) of the empirical cluster distribution; empty clusters
// contribute zero.
double cluster_entropy(const ClusterAssignment& assignment);

// Euclidean nearest centroid, ties to the lowest index.
ClusterAssignment assign_nearest_centroid(const Eigen::MatrixXd& embeddings,
                                          const Eigen::MatrixXd& centroids);

// Nearest-rank percentile: sorted ascending, 1-based index
// ceil(q*N/100). The result is always an element of the input.
double percentile_score(const std::vector<double>& values, double q);

}  // namespace ctrb
