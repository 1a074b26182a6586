#include "vdpsync/io.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace vdpsync::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw ConfigError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out_ << ',';
    out_ << header[i];
  }
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw ConfigError("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(values[i]);
  }
  out_ << '\n';
  ++rows_;
}

void CsvWriter::raw_row(const std::string& line) {
  out_ << line << '\n';
  ++rows_;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string() + " for checksumming");
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

void write_density_matrix(const std::filesystem::path& path, const fock::DensityMatrix& rho) {
  nlohmann::json j;
  j["dim"] = rho.dim();
  nlohmann::json entries = nlohmann::json::array();
  for (int r = 0; r < rho.dim(); ++r)
    for (int c = 0; c < rho.dim(); ++c)
      entries.push_back({rho.m(r, c).real(), rho.m(r, c).imag()});
  j["entries"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  out << j.dump() << '\n';
}

fock::DensityMatrix read_density_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  const int dim = j.at("dim").get<int>();
  const auto& entries = j.at("entries");
  if (static_cast<int>(entries.size()) != dim * dim)
    throw ConfigError("density matrix entry count does not match dim");
  fock::DensityMatrix rho;
  rho.m.resize(dim, dim);
  int k = 0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c, ++k)
      rho.m(r, c) = fock::Complex(entries[k][0].get<double>(), entries[k][1].get<double>());
  return rho;
}

}  // namespace vdpsync::io
