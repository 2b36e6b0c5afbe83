#include "ctrb/coalition.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ctrb/error.hpp"
#include "ctrb/io_util.hpp"
#include "ctrb/rng.hpp"
#include "nlohmann/json.hpp"

namespace ctrb {

Coalition::Coalition(std::vector<int> members_in, int n_in)
    : members(std::move(members_in)), n(n_in) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (int i : members) {
    if (i < 0 || i >= n) {
      throw DataError("coalition member " + std::to_string(i) +
                      " out of range for n=" + std::to_string(n));
    }
  }
}

Coalition Coalition::full(int n) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  return Coalition(std::move(all), n);
}

Coalition Coalition::from_mask(std::uint64_t mask, int n) {
  std::vector<int> members;
  for (int i = 0; i < n; ++i) {
    if (mask & (std::uint64_t{1} << i)) members.push_back(i);
  }
  return Coalition(std::move(members), n);
}

std::uint64_t Coalition::mask() const {
  std::uint64_t m = 0;
  for (int i : members) m |= std::uint64_t{1} << i;
  return m;
}

bool Coalition::contains(int i) const {
  return std::binary_search(members.begin(), members.end(), i);
}

Coalition Coalition::complement() const {
  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(n - size()));
  auto it = members.begin();
  for (int i = 0; i < n; ++i) {
    if (it != members.end() && *it == i) {
      ++it;
    } else {
      rest.push_back(i);
    }
  }
  return Coalition(std::move(rest), n);
}

Coalition Coalition::with(int i) const {
  std::vector<int> m = members;
  m.push_back(i);
  return Coalition(std::move(m), n);
}

Coalition Coalition::without(int i) const {
  std::vector<int> m;
  m.reserve(members.size());
  for (int x : members) {
    if (x != i) m.push_back(x);
  }
  return Coalition(std::move(m), n);
}

std::uint64_t canonical_id(const Coalition& c) {
  // FNV-1a 64-bit over "i0,i1,...,ik" in increasing order.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](char byte) {
    h ^= static_cast<unsigned char>(byte);
    h *= 0x100000001b3ULL;
  };
  bool first = true;
  char buf[16];
  for (int i : c.members) {
    if (!first) feed(',');
    first = false;
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), i);
    (void)ec;
    for (char* p = buf; p != end; ++p) feed(*p);
  }
  return h;
}

std::string subset_hex(std::uint64_t id) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[id & 0xf];
    id >>= 4;
  }
  return out;
}

std::uint64_t parse_subset_hex(const std::string& hex) {
  if (hex.size() != 16) {
    throw DataError("subset_id must be 16 hex digits, got \"" + hex + "\"");
  }
  std::uint64_t id = 0;
  auto res = std::from_chars(hex.data(), hex.data() + hex.size(), id, 16);
  if (res.ec != std::errc() || res.ptr != hex.data() + hex.size()) {
    throw DataError("invalid subset_id \"" + hex + "\"");
  }
  return id;
}

namespace {

// Partial Fisher-Yates: a uniform subset of the given size.
Coalition uniform_subset_of_size(int n, int size, SplitMix64& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < size; ++i) {
    const auto j =
        i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(size));
  return Coalition(std::move(pool), n);
}

}  // namespace

std::vector<SubsetSample> sample_shapley_kernel(int n, int m,
                                                std::uint64_t seed,
                                                bool paired) {
  if (n < 2) {
    throw DataError("shapley kernel sampling needs n >= 2, got n=" +
                    std::to_string(n));
  }
  if (m < 1) throw DataError("draw count must be >= 1");

  // Size distribution: P(z) proportional to 1/(z(n-z)), z = 1..n-1.
  std::vector<double> cum(static_cast<std::size_t>(n - 1));
  double total = 0.0;
  for (int z = 1; z <= n - 1; ++z) {
    total += 1.0 / (static_cast<double>(z) * static_cast<double>(n - z));
    cum[static_cast<std::size_t>(z - 1)] = total;
  }

  SplitMix64 rng = SplitMix64(seed).split(0);
  std::vector<SubsetSample> out;
  out.reserve(static_cast<std::size_t>(m));
  std::int64_t draw = 0;
  while (draw < m) {
    const double u = rng.next_double() * total;
    int z = 1;
    while (cum[static_cast<std::size_t>(z - 1)] <= u && z < n - 1) ++z;
    Coalition c = uniform_subset_of_size(n, z, rng);

    SubsetSample s;
    s.coalition = c;
    s.draw_index = draw;
    s.seed = seed;
    if (paired && draw + 1 < m) {
      s.paired_with = draw + 1;
      SubsetSample partner;
      partner.coalition = c.complement();
      partner.draw_index = draw + 1;
      partner.seed = seed;
      partner.paired_with = draw;
      out.push_back(std::move(s));
      out.push_back(std::move(partner));
      draw += 2;
    } else {
      out.push_back(std::move(s));
      draw += 1;
    }
  }
  return out;
}

std::vector<SubsetSample> sample_uniform_fraction(int n, double alpha, int b,
                                                  std::uint64_t seed) {
  if (n < 1 || b < 1) throw DataError("need n >= 1 and b >= 1");
  // The 1e-9 guard keeps sizes like 0.7*10 from flooring to 6.
  const int size = static_cast<int>(std::floor(alpha * n + 1e-9));
  if (size < 1 || size >= n) {
    throw DataError("degenerate subset size " + std::to_string(size) +
                    " from alpha=" + std::to_string(alpha) +
                    ", n=" + std::to_string(n));
  }
  SplitMix64 rng = SplitMix64(seed).split(1);
  std::vector<SubsetSample> out;
  out.reserve(static_cast<std::size_t>(b));
  for (std::int64_t i = 0; i < b; ++i) {
    SubsetSample s;
    s.coalition = uniform_subset_of_size(n, size, rng);
    s.draw_index = i;
    s.seed = seed;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SubsetSample> sample_uniform_any(int n, int m,
                                             std::uint64_t seed) {
  if (n < 1 || m < 1) throw DataError("need n >= 1 and m >= 1");
  SplitMix64 rng = SplitMix64(seed).split(2);
  std::vector<SubsetSample> out;
  out.reserve(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) {
    std::vector<int> members;
    for (int j = 0; j < n; ++j) {
      if (rng.next_u64() & 1) members.push_back(j);
    }
    SubsetSample s;
    s.coalition = Coalition(std::move(members), n);
    s.draw_index = i;
    s.seed = seed;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Coalition> enumerate_subsets_canonical(int n) {
  if (n < 0 || n > 24) {
    throw DataError("subset enumeration limited to n <= 24");
  }
  std::vector<Coalition> out;
  out.reserve(std::size_t{1} << n);
  out.push_back(Coalition::empty(n));
  for (int size = 1; size <= n; ++size) {
    // Combinations in lexicographic order of the member list.
    std::vector<int> comb(static_cast<std::size_t>(size));
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
      out.push_back(Coalition(comb, n));
      int i = size - 1;
      while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++comb[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) {
        comb[static_cast<std::size_t>(j)] =
            comb[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  }
  return out;
}

std::string subset_sample_to_jsonl(const SubsetSample& s) {
  std::ostringstream os;
  os << "{\"subset_id\": \"" << subset_hex(canonical_id(s.coalition))
     << "\", \"members\": [";
  for (std::size_t i = 0; i < s.coalition.members.size(); ++i) {
    if (i) os << ", ";
    os << s.coalition.members[i];
  }
  os << "], \"draw_index\": " << s.draw_index << ", \"seed\": " << s.seed
     << "}";
  return os.str();
}

SubsetSample subset_sample_from_jsonl(const std::string& line, int n) {
  nlohmann::json j = nlohmann::json::parse(line);
  SubsetSample s;
  std::vector<int> members = j.at("members").get<std::vector<int>>();
  s.coalition = Coalition(std::move(members), n);
  s.draw_index = j.at("draw_index").get<std::int64_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("subset_id")) {
    const auto id = parse_subset_hex(j.at("subset_id").get<std::string>());
    if (id != canonical_id(s.coalition)) {
      throw DataError("subset_id does not match members in line: " + line);
    }
  }
  return s;
}

void write_samples_jsonl(const std::vector<SubsetSample>& samples,
                         const std::string& path) {
  std::string text;
  for (const auto& s : samples) {
    text += subset_sample_to_jsonl(s);
    text += '\n';
  }
  write_text_file_atomic(path, text);
}

std::vector<SubsetSample> read_samples_jsonl(const std::string& path, int n) {
  const std::string text = read_text_file(path);
  std::vector<SubsetSample> out;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(subset_sample_from_jsonl(line, n));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": malformed record: " + e.what());
    }
  }
  return out;
}

}  // namespace ctrb
