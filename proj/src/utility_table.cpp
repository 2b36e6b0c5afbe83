#include "ctrb/utility_table.hpp"

#include <cmath>
#include <sstream>

#include "ctrb/error.hpp"
#include "ctrb/io_util.hpp"
#include "nlohmann/json.hpp"

namespace ctrb {

UtilityTable::UtilityTable(int n)
    : n_(n),
      null_id_(canonical_id(Coalition::empty(n))),
      full_id_(canonical_id(Coalition::full(n))) {
  if (n < 1) throw DataError("utility table needs n >= 1");
}

UtilityTable::UtilityTable(int n, double null_utility, double full_utility)
    : UtilityTable(n) {
  set(Coalition::empty(n), null_utility);
  set(Coalition::full(n), full_utility);
}

void UtilityTable::set(const Coalition& c, double utility) {
  if (c.n != n_) {
    throw DataError("coalition has n=" + std::to_string(c.n) +
                    ", table has n=" + std::to_string(n_));
  }
  entries_[canonical_id(c)] = {c, utility};
}

bool UtilityTable::has(const Coalition& c) const {
  return entries_.count(canonical_id(c)) > 0;
}

bool UtilityTable::has_id(std::uint64_t id) const {
  return entries_.count(id) > 0;
}

double UtilityTable::get(const Coalition& c) const {
  const auto id = canonical_id(c);
  const auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw DataError("missing utility for subset " + subset_hex(id));
  }
  return it->second.second;
}

bool UtilityTable::has_null() const { return entries_.count(null_id_) > 0; }
bool UtilityTable::has_full() const { return entries_.count(full_id_) > 0; }

double UtilityTable::null_utility() const {
  const auto it = entries_.find(null_id_);
  if (it == entries_.end()) throw DataError("null utility F(empty) not set");
  return it->second.second;
}

double UtilityTable::full_utility() const {
  const auto it = entries_.find(full_id_);
  if (it == entries_.end()) throw DataError("full utility F(all) not set");
  return it->second.second;
}

UtilityOracle oracle_from_table(const UtilityTable& table) {
  return [&table](const Coalition& c) { return table.get(c); };
}

std::string attribution_to_json(const AttributionResult& r) {
  std::ostringstream os;
  os << "{\"estimator\": \"" << r.estimator << "\", \"n\": " << r.n
     << ", \"scores\": [";
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    if (i) os << ", ";
    os << fmt_double17(r.scores[i]);
  }
  os << "], \"efficiency_gap\": " << fmt_double17(r.efficiency_gap)
     << ", \"samples_used\": " << r.samples_used << ", \"seed\": " << r.seed;
  if (!r.undefined.empty()) {
    os << ", \"undefined\": [";
    for (std::size_t i = 0; i < r.undefined.size(); ++i) {
      if (i) os << ", ";
      os << r.undefined[i];
    }
    os << "]";
  }
  os << "}";
  return os.str();
}

AttributionResult attribution_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AttributionResult r;
  r.estimator = j.at("estimator").get<std::string>();
  r.n = j.at("n").get<int>();
  r.scores = j.at("scores").get<std::vector<double>>();
  r.efficiency_gap = j.at("efficiency_gap").get<double>();
  r.samples_used = j.at("samples_used").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("undefined")) {
    r.undefined = j.at("undefined").get<std::vector<int>>();
  }
  if (static_cast<int>(r.scores.size()) != r.n) {
    throw DataError("attribution scores length does not match n");
  }
  return r;
}

}  // namespace ctrb
