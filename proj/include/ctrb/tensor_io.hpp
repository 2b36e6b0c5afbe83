#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ctrb {

// Binary tensor container: magic "CTRB", u32 rank, u64 dims, then
// little-endian 64-bit floats, row-major. Byte layout is fixed
// regardless of host endianness.
struct Tensor {
  std::vector<std::uint64_t> dims;
  std::vector<double> data;  // row-major

  std::size_t element_count() const;
};

void write_tensor(const std::string& path, const Tensor& tensor);
Tensor read_tensor(const std::string& path);

void write_tensor_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_tensor_matrix(const std::string& path);

// CSV (header row) fallback for small matrices.
Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});

// Dispatch on extension: ".csv" reads the CSV form, anything else the
// binary container.
Eigen::MatrixXd read_matrix_any(const std::string& path);

}  // namespace ctrb
