#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace ctrb {

// Projected gradient features: Phi holds one row per training datum,
// each Gamma one row per query. Journey-style scoring supplies one
// Gamma per timestep. The same computation serves TRAK and D-TRAK; the
// two differ only in which loss produced the supplied feature files.
struct FeatureBundle {
  Eigen::MatrixXd phi;                 // N_train x k
  std::vector<Eigen::MatrixXd> gammas; // each N_query x k
  double lambda = 0.5;
};

// Maps each training datum to its owning contributor.
struct ContributorAssignment {
  std::vector<int> owner;  // length N_train
  int n_contributors = 0;
};
void validate_assignment(const ContributorAssignment& assignment);

// Multiply by a Gaussian matrix with entries N(0, 1/k). identity=true
// bypasses projection (requires k == input width).
Eigen::MatrixXd random_projection(const Eigen::MatrixXd& g, int k,
                                  std::uint64_t seed, bool identity = false);

// scores = Phi (Phi'Phi + lambda I)^-1 Gamma', one column per query.
Eigen::MatrixXd trak_scores(const Eigen::MatrixXd& phi,
                            const Eigen::MatrixXd& gamma, double lambda);
Eigen::MatrixXd trak_scores(const FeatureBundle& bundle);

// Mean of trak_scores over the per-timestep Gammas.
Eigen::MatrixXd journey_trak_scores(const FeatureBundle& bundle);

// TRAK numerator normalized by ||(Phi'Phi + lambda I)^-1 phi_j|| per
// training datum; zero-gradient rows score 0 with a warning.
Eigen::MatrixXd relative_if_scores(const FeatureBundle& bundle);

// TRAK numerator normalized by ||phi_j|| per training datum.
Eigen::MatrixXd renormalized_if_scores(const FeatureBundle& bundle);

enum class Reduce { mean, max };
enum class AggregateMode { sum, mean, max };

// Cosine similarity per (train, query) pair, reduced over queries.
// Zero vectors score 0 with a warning.
std::vector<double> cosine_scores(const Eigen::MatrixXd& train_vectors,
                                  const Eigen::MatrixXd& query_vectors,
                                  Reduce reduce);

// Column-mean over queries, the reduction used before aggregating
// datum-level scores.
std::vector<double> reduce_queries_mean(const Eigen::MatrixXd& scores);

// Group-reduce datum scores by owner.
std::vector<double> aggregate_to_contributors(
    const std::vector<double>& per_datum_scores,
    const ContributorAssignment& assignment, AggregateMode mode);

}  // namespace ctrb
