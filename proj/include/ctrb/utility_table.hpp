#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctrb/coalition.hpp"

namespace ctrb {

// Measured global properties keyed by canonical subset id. The null
// (empty-set) and full-set utilities must both be present before any
// estimator runs against the table.
class UtilityTable {
 public:
  explicit UtilityTable(int n);
  UtilityTable(int n, double null_utility, double full_utility);

  int n() const { return n_; }
  std::size_t size() const { return entries_.size(); }

  void set(const Coalition& c, double utility);
  bool has(const Coalition& c) const;
  bool has_id(std::uint64_t id) const;
  // Throws DataError naming the missing canonical id.
  double get(const Coalition& c) const;

  bool has_null() const;
  bool has_full() const;
  double null_utility() const;  // F(empty)
  double full_utility() const;  // F(full)

  const std::unordered_map<std::uint64_t, std::pair<Coalition, double>>&
  entries() const {
    return entries_;
  }

 private:
  int n_;
  std::unordered_map<std::uint64_t, std::pair<Coalition, double>> entries_;
  std::uint64_t null_id_;
  std::uint64_t full_id_;
};

// A coalition -> utility function; the bridge between estimators and
// whatever produces utilities (a table, the quadratic lab, an external
// pipeline).
using UtilityOracle = std::function<double(const Coalition&)>;

UtilityOracle oracle_from_table(const UtilityTable& table);

// Per-contributor scores plus diagnostics. efficiency_gap is
// |sum(scores) - (F(full) - F(null))| and is reported for every
// estimator, including those that do not enforce it.
struct AttributionResult {
  std::string estimator;
  int n = 0;
  std::vector<double> scores;
  double efficiency_gap = 0.0;
  std::int64_t samples_used = 0;
  std::uint64_t seed = 0;
  // Contributors whose Monte-Carlo estimate never saw one side of the
  // membership split; their score entries are zero placeholders.
  std::vector<int> undefined;
};

std::string attribution_to_json(const AttributionResult& r);
AttributionResult attribution_from_json(const std::string& text);

}  // namespace ctrb
