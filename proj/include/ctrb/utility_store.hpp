#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctrb/coalition.hpp"
#include "ctrb/utility_table.hpp"

namespace ctrb {

// One manifest line. utility is present iff the subset has been
// measured; meta carries free-form pipeline tags.
struct ManifestRecord {
  Coalition members;
  std::optional<double> utility;
  std::string estimator_tag;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;
};

std::string manifest_record_to_jsonl(const ManifestRecord& record);
ManifestRecord manifest_record_from_jsonl(const std::string& line, int n);

// Which subsets an estimator needs measured.
struct Requirement {
  enum class Kind { all_subsets, loo_set, sampled };
  Kind kind = Kind::sampled;
  std::vector<Coalition> sampled;

  static Requirement all(int n);
  static Requirement loo(int n);
  static Requirement from_samples(const std::vector<SubsetSample>& samples,
                                  int n);
  std::vector<Coalition> coalitions(int n) const;
};

// Canonical manifests keyed by subset id: pending export, measured-
// utility import with conflict detection, and completeness queries.
// Contents are a pure function of the multiset of imported records.
class UtilityStore {
 public:
  explicit UtilityStore(int n);

  int n() const { return n_; }
  std::size_t size() const { return records_.size(); }
  std::size_t measured_count() const;

  // Write pending records (utilities absent) for every distinct
  // unmeasured coalition in the samples; duplicates collapse and
  // already-measured ids are skipped. Returns lines written.
  std::size_t export_pending(const std::vector<SubsetSample>& samples,
                             const std::string& path,
                             const std::string& estimator_tag = "",
                             std::uint64_t seed = 0);

  // Merge measured records. Conflicting utilities for a subset id that
  // differ by more than 1e-9 raise an error listing the ids.
  struct ImportStats {
    std::size_t added = 0;
    std::size_t merged = 0;
  };
  ImportStats import_utilities(const std::string& path);
  ImportStats merge_record(const ManifestRecord& record);

  bool is_measured(const Coalition& c) const;
  std::optional<double> utility_of(const Coalition& c) const;

  // Requirement coalitions whose utilities are not yet in the store.
  std::vector<Coalition> missing_for(const Requirement& requirement) const;

  // Measured entries as a UtilityTable (estimators validate null/full
  // presence themselves).
  UtilityTable to_table() const;

  // Atomic full-store snapshot (write temp, rename).
  void save(const std::string& path) const;
  static UtilityStore load(const std::string& path, int n);

 private:
  int n_;
  std::map<std::uint64_t, ManifestRecord> records_;  // ordered for output
};

}  // namespace ctrb
