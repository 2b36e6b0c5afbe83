#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ctrb {

// A subset of contributor indices in [0, n). Members are kept strictly
// increasing; the empty and full coalitions are both representable.
struct Coalition {
  std::vector<int> members;
  int n = 0;

  Coalition() = default;
  Coalition(std::vector<int> members_in, int n_in);

  static Coalition empty(int n) { return Coalition({}, n); }
  static Coalition full(int n);
  static Coalition from_mask(std::uint64_t mask, int n);

  std::uint64_t mask() const;  // requires n <= 64
  int size() const { return static_cast<int>(members.size()); }
  bool contains(int i) const;
  Coalition complement() const;
  Coalition with(int i) const;
  Coalition without(int i) const;

  bool operator==(const Coalition& other) const {
    return n == other.n && members == other.members;
  }
};

// FNV-1a (64-bit) over the comma-joined decimal member indices.
// Stable across runs and platforms; the empty coalition hashes to the
// FNV offset basis.
std::uint64_t canonical_id(const Coalition& c);

// 16 lowercase hex digits, the form used in external files.
std::string subset_hex(std::uint64_t id);
std::uint64_t parse_subset_hex(const std::string& hex);

// One sampled subset. When sampling is paired, the partner draw holds
// the exact complement coalition.
struct SubsetSample {
  Coalition coalition;
  std::int64_t draw_index = 0;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> paired_with;
};

// Draw m subsets from the Shapley kernel: size z in {1,...,n-1} with
// probability proportional to 1/(z(n-z)), then a uniform subset of that
// size. Empty and full coalitions are never sampled; the efficiency
// constraint accounts for them. With paired=true draws come in
// complement pairs (an odd trailing draw stays unpaired).
std::vector<SubsetSample> sample_shapley_kernel(int n, int m,
                                                std::uint64_t seed,
                                                bool paired = true);

// Uniform over subsets of fixed size floor(alpha*n); draws independent.
std::vector<SubsetSample> sample_uniform_fraction(int n, double alpha, int b,
                                                  std::uint64_t seed);

// Each contributor included independently with probability 1/2.
std::vector<SubsetSample> sample_uniform_any(int n, int m,
                                             std::uint64_t seed);

// All 2^n subsets in canonical order: size ascending, lexicographic
// within a size. This is the column order of the Shapley operator and
// the index order of utility vectors.
std::vector<Coalition> enumerate_subsets_canonical(int n);

// JSONL, one record per draw:
// {"subset_id": "<16 hex>", "members": [...], "draw_index": i, "seed": s}
std::string subset_sample_to_jsonl(const SubsetSample& s);
SubsetSample subset_sample_from_jsonl(const std::string& line, int n);
void write_samples_jsonl(const std::vector<SubsetSample>& samples,
                         const std::string& path);
std::vector<SubsetSample> read_samples_jsonl(const std::string& path, int n);

}  // namespace ctrb
