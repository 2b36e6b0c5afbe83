#include "ctrb/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ctrb/error.hpp"
#include "ctrb/io_util.hpp"
#include "nlohmann/json.hpp"

namespace ctrb {

double additive_prediction(std::span<const double> tau, const Coalition& s) {
  if (static_cast<int>(tau.size()) != s.n) {
    throw DataError("score vector length does not match n");
  }
  double sum = 0.0;
  for (int i : s.members) sum += tau[static_cast<std::size_t>(i)];
  return sum;
}

namespace {

// Average ranks, ties share the mean of their positions (1-based).
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double pearson_r(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("length mismatch");
  if (a.size() < 2) throw DataError("correlation needs at least 2 points");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) {
    throw DataError("zero variance; correlation undefined");
  }
  return sab / std::sqrt(saa * sbb);
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("length mismatch");
  if (a.size() < 2) throw DataError("correlation needs at least 2 points");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson_r(ra, rb);
}

double lds(std::span<const double> tau, const HeldOutSet& held_out) {
  if (held_out.records.size() < 2) {
    throw DataError("LDS needs at least 2 held-out records");
  }
  std::vector<double> measured;
  std::vector<double> predicted;
  measured.reserve(held_out.records.size());
  predicted.reserve(held_out.records.size());
  for (const auto& [coalition, utility] : held_out.records) {
    if (!std::isfinite(utility)) {
      throw DataError("non-finite held-out utility for subset " +
                      subset_hex(canonical_id(coalition)));
    }
    measured.push_back(utility);
    predicted.push_back(additive_prediction(tau, coalition));
  }
  return spearman_rho(measured, predicted);
}

LdsSummary lds_summary(std::span<const double> tau,
                       const std::vector<HeldOutSet>& replicates) {
  if (replicates.empty()) throw DataError("no held-out replicates");
  LdsSummary summary;
  for (const auto& replicate : replicates) {
    summary.per_replicate.push_back(lds(tau, replicate));
  }
  const auto r = static_cast<double>(summary.per_replicate.size());
  for (double v : summary.per_replicate) summary.mean += v;
  summary.mean /= r;
  if (summary.per_replicate.size() > 1) {
    double ss = 0.0;
    for (double v : summary.per_replicate) {
      ss += (v - summary.mean) * (v - summary.mean);
    }
    const double sd = std::sqrt(ss / (r - 1.0));
    summary.ci95 = 1.96 * sd / std::sqrt(r);
  }
  return summary;
}

std::string LdsSummary::to_json() const {
  std::ostringstream os;
  os << "{\"mean\": " << fmt_double17(mean)
     << ", \"ci95\": " << fmt_double17(ci95) << ", \"replicates\": [";
  for (std::size_t i = 0; i < per_replicate.size(); ++i) {
    if (i) os << ", ";
    os << fmt_double17(per_replicate[i]);
  }
  os << "]}";
  return os.str();
}

std::string LdsSummary::to_csv() const {
  std::string csv = "replicate,lds\n";
  for (std::size_t i = 0; i < per_replicate.size(); ++i) {
    csv += std::to_string(i);
    csv += ',';
    csv += fmt_double17(per_replicate[i]);
    csv += '\n';
  }
  return csv;
}

Coalition counterfactual_sets(std::span<const double> tau, double fraction,
                              CounterfactualDirection direction) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw DataError("fraction must be in (0, 1)");
  }
  const auto n = static_cast<int>(tau.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&tau](int a, int b) {
    return tau[static_cast<std::size_t>(a)] > tau[static_cast<std::size_t>(b)];
  });

  const auto top = static_cast<int>(
      std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<int> retained;
  if (direction == CounterfactualDirection::remove_top) {
    retained.assign(order.begin() + top, order.end());
  } else {
    retained.assign(order.begin(), order.begin() + top);
  }
  if (retained.empty()) {
    throw DataError("counterfactual fraction retains no contributors");
  }
  return Coalition(std::move(retained), n);
}

double relative_change(double f_new, double f_full) {
  if (f_full == 0.0) {
    throw DataError("relative change undefined for F(full) = 0");
  }
  return (f_new - f_full) / f_full;
}

void write_heldout_jsonl(const std::vector<HeldOutSet>& replicates,
                         const std::string& path) {
  std::string text;
  for (const auto& replicate : replicates) {
    for (const auto& [coalition, utility] : replicate.records) {
      std::ostringstream os;
      os << "{\"members\": [";
      for (std::size_t i = 0; i < coalition.members.size(); ++i) {
        if (i) os << ", ";
        os << coalition.members[i];
      }
      os << "], \"utility\": " << fmt_double17(utility)
         << ", \"replicate\": " << replicate.replicate_id
         << ", \"alpha\": " << fmt_double17(replicate.alpha_fraction) << "}";
      text += os.str();
      text += '\n';
    }
  }
  write_text_file_atomic(path, text);
}

std::vector<HeldOutSet> read_heldout_jsonl(const std::string& path, int n) {
  const std::string text = read_text_file(path);
  std::map<int, HeldOutSet> by_replicate;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      auto members = j.at("members").get<std::vector<int>>();
      const double utility = j.at("utility").get<double>();
      const int replicate = j.value("replicate", 0);
      auto& set = by_replicate[replicate];
      set.replicate_id = replicate;
      set.alpha_fraction = j.value("alpha", set.alpha_fraction);
      set.records.emplace_back(Coalition(std::move(members), n), utility);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": malformed record: " + e.what());
    }
  }
  std::vector<HeldOutSet> out;
  out.reserve(by_replicate.size());
  for (auto& [id, set] : by_replicate) out.push_back(std::move(set));
  if (out.empty()) throw DataError("no held-out records in " + path);
  return out;
}

}  // namespace ctrb
