#include "ctrb/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ctrb/error.hpp"
#include "ctrb/io_util.hpp"

namespace ctrb {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'R', 'B'};

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint32_t get_u32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t count = 1;
  for (std::uint64_t d : dims) count *= static_cast<std::size_t>(d);
  return dims.empty() ? 0 : count;
}

void write_tensor(const std::string& path, const Tensor& tensor) {
  if (tensor.dims.empty()) throw DataError("tensor needs rank >= 1");
  if (tensor.data.size() != tensor.element_count()) {
    throw DataError("tensor data size does not match dims");
  }
  std::string out;
  out.append(kMagic, 4);
  put_u32_le(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (std::uint64_t d : tensor.dims) put_u64_le(out, d);
  for (double value : tensor.data) {
    put_u64_le(out, std::bit_cast<std::uint64_t>(value));
  }
  write_text_file_atomic(path, out);
}

Tensor read_tensor(const std::string& path) {
  const std::string raw = read_text_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  if (raw.size() < 8 || std::memcmp(raw.data(), kMagic, 4) != 0) {
    throw DataError(path + ": not a CTRB tensor file");
  }
  const std::uint32_t rank = get_u32_le(p + 4);
  if (rank < 1 || rank > 8) {
    throw DataError(path + ": unsupported tensor rank " +
                    std::to_string(rank));
  }
  std::size_t offset = 8;
  if (raw.size() < offset + 8 * rank) {
    throw DataError(path + ": truncated tensor header");
  }
  Tensor tensor;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint64_t dim = get_u64_le(p + offset);
    tensor.dims.push_back(dim);
    count *= static_cast<std::size_t>(dim);
    offset += 8;
  }
  if (raw.size() != offset + 8 * count) {
    throw DataError(path + ": tensor payload size mismatch");
  }
  tensor.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    tensor.data[i] = std::bit_cast<double>(get_u64_le(p + offset));
    offset += 8;
  }
  return tensor;
}

void write_tensor_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  Tensor tensor;
  tensor.dims = {static_cast<std::uint64_t>(m.rows()),
                 static_cast<std::uint64_t>(m.cols())};
  tensor.data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      tensor.data.push_back(m(r, c));
    }
  }
  write_tensor(path, tensor);
}

Eigen::MatrixXd read_tensor_matrix(const std::string& path) {
  const Tensor tensor = read_tensor(path);
  if (tensor.dims.size() == 1) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(tensor.dims[0]), 1);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, 0) = tensor.data[static_cast<std::size_t>(r)];
    }
    return m;
  }
  if (tensor.dims.size() != 2) {
    throw DataError(path + ": expected a rank-1 or rank-2 tensor");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(tensor.dims[0]),
                    static_cast<Eigen::Index>(tensor.dims[1]));
  std::size_t at = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = tensor.data[at++];
    }
  }
  return m;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.rows.empty()) throw DataError(path + ": CSV has no data rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()),
                    static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          table.rows[r][c];
    }
  }
  return m;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header) {
  CsvTable table;
  if (header.empty()) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      table.header.push_back("c" + std::to_string(c));
    }
  } else {
    if (static_cast<Eigen::Index>(header.size()) != m.cols()) {
      throw DataError("header width does not match matrix");
    }
    table.header = header;
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

Eigen::MatrixXd read_matrix_any(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".csv") {
    return read_csv_matrix(path);
  }
  return read_tensor_matrix(path);
}

}  // namespace ctrb
