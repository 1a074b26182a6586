#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vdpsync/fock.hpp"

namespace vdpsync::io {

/// Format with 17 significant digits (round-trip exact for doubles).
std::string format_double(double v);

/// Minimal CSV emitter; numbers are serialized with 17 significant digits so
/// re-runs are byte identical.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::size_t rows_ = 0;
};

/// FNV-1a 64-bit checksum of a file's bytes.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);

/// Density-matrix JSON: {"dim": N, "entries": [[re, im], ...]} row-major.
void write_density_matrix(const std::filesystem::path& path, const fock::DensityMatrix& rho);
fock::DensityMatrix read_density_matrix(const std::filesystem::path& path);

}  // namespace vdpsync::io
