#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctrb/coalition.hpp"

namespace ctrb {

// Measured utilities on held-out fixed-size subsets, one replicate.
struct HeldOutSet {
  std::vector<std::pair<Coalition, double>> records;
  double alpha_fraction = 0.5;
  int replicate_id = 0;
};

// Additive datamodel prediction: sum of member scores.
double additive_prediction(std::span<const double> tau, const Coalition& s);

// Spearman rank correlation with average ranks for ties. Zero rank
// variance on either side is an error.
double spearman_rho(std::span<const double> a, std::span<const double> b);

double pearson_r(std::span<const double> a, std::span<const double> b);

// LDS: Spearman correlation between measured utilities and additive
// predictions over one held-out replicate.
double lds(std::span<const double> tau, const HeldOutSet& held_out);

struct LdsSummary {
  std::vector<double> per_replicate;
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 * sd / sqrt(replicates); 0 for one replicate

  std::string to_json() const;
  std::string to_csv() const;  // columns replicate,lds
};

LdsSummary lds_summary(std::span<const double> tau,
                       const std::vector<HeldOutSet>& replicates);

enum class CounterfactualDirection { remove_top, keep_top };

// Rank contributors by score descending (ties to the lower index) and
// return the retained coalition: everything but the top ceil(f*n) for
// remove_top, exactly the top ceil(f*n) for keep_top.
Coalition counterfactual_sets(std::span<const double> tau, double fraction,
                              CounterfactualDirection direction);

// Relative property change (f_new - f_full) / f_full.
double relative_change(double f_new, double f_full);

// Held-out replicates on disk: JSONL records
// {"members": [...], "utility": x, "replicate": r, "alpha": a}.
void write_heldout_jsonl(const std::vector<HeldOutSet>& replicates,
                         const std::string& path);
std::vector<HeldOutSet> read_heldout_jsonl(const std::string& path, int n);

}  // namespace ctrb
