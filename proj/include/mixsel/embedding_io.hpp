#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixsel/errors.hpp"
#include "mixsel/linalg.hpp"

// Embedding ingestion. Binary format "MXE1": magic, version u32, count u64,
// dim u32, all little-endian, then count x dim float32 row-major. Files with
// a .csv extension fall back to one comma-separated row per sample.

namespace mixsel {

inline constexpr char kEmbeddingMagic[4] = {'M', 'X', 'E', '1'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

namespace detail {

inline bool has_csv_extension(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

template <typename T>
void write_le(std::ofstream& out, T value) {
  // Little-endian host assumed; matches every platform this builds on.
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace detail

inline void save_embeddings_binary(const std::string& path,
                                   const std::vector<Vector>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out.write(kEmbeddingMagic, 4);
  detail::write_le<std::uint32_t>(out, kEmbeddingVersion);
  detail::write_le<std::uint64_t>(out, rows.size());
  detail::write_le<std::uint32_t>(
      out, rows.empty() ? 0u : static_cast<std::uint32_t>(rows.front().size()));
  for (const Vector& row : rows)
    for (Eigen::Index c = 0; c < row.size(); ++c)
      detail::write_le<float>(out, static_cast<float>(row(c)));
  if (!out) throw ConfigError("short write: " + path);
}

inline void save_embeddings_csv(const std::string& path,
                                const std::vector<Vector>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out.precision(9);
  for (const Vector& row : rows) {
    for (Eigen::Index c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row(c);
    }
    out << '\n';
  }
}

inline void save_embeddings(const std::string& path,
                            const std::vector<Vector>& rows) {
  if (detail::has_csv_extension(path))
    save_embeddings_csv(path, rows);
  else
    save_embeddings_binary(path, rows);
}

inline std::vector<Vector> load_embeddings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);
  std::vector<Vector> rows;
  std::string line;
  long row_index = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw NaNFound("unparseable number at row " + std::to_string(row_index) +
                       " in " + path);
      }
      if (!std::isfinite(v))
        throw NaNFound("NaN or Inf at row " + std::to_string(row_index) +
                       " in " + path);
      values.push_back(v);
    }
    if (dim < 0) dim = static_cast<Eigen::Index>(values.size());
    if (static_cast<Eigen::Index>(values.size()) != dim)
      throw DimMismatch("row " + std::to_string(row_index) + " has " +
                        std::to_string(values.size()) + " columns, expected " +
                        std::to_string(dim));
    rows.push_back(Eigen::Map<Vector>(values.data(), dim));
    ++row_index;
  }
  if (rows.empty()) throw EmptyInput("no samples in " + path);
  return rows;
}

inline std::vector<Vector> load_embeddings_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kEmbeddingMagic, 4) != 0)
    throw BadMagic("bad magic at byte 0 in " + path);
  const auto version = detail::read_le<std::uint32_t>(in);
  if (version != kEmbeddingVersion)
    throw BadMagic("unsupported version " + std::to_string(version) + " in " +
                   path);
  const auto count = detail::read_le<std::uint64_t>(in);
  const auto dim = detail::read_le<std::uint32_t>(in);
  if (!in) throw BadMagic("truncated header in " + path);
  if (count == 0) throw EmptyInput("no samples in " + path);
  if (dim == 0) throw DimMismatch("zero dimension in " + path);

  std::vector<Vector> rows;
  rows.reserve(count);
  std::vector<float> buffer(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    in.read(reinterpret_cast<char*>(buffer.data()),
            static_cast<std::streamsize>(sizeof(float) * dim));
    if (!in) {
      const std::uint64_t offset = 20 + sizeof(float) * dim * r;
      throw DimMismatch("file shorter than header claims, at byte " +
                        std::to_string(offset) + " in " + path);
    }
    Vector row(dim);
    for (std::uint32_t c = 0; c < dim; ++c) {
      if (!std::isfinite(buffer[c])) {
        const std::uint64_t offset = 20 + sizeof(float) * (dim * r + c);
        throw NaNFound("NaN or Inf at byte " + std::to_string(offset) +
                       " (row " + std::to_string(r) + ") in " + path);
      }
      row(c) = buffer[c];
    }
    rows.push_back(std::move(row));
  }
  // Trailing bytes mean the header lied about the count.
  in.peek();
  if (!in.eof())
    throw DimMismatch("file longer than header claims in " + path);
  return rows;
}

inline std::vector<Vector> load_embeddings(const std::string& path) {
  return detail::has_csv_extension(path) ? load_embeddings_csv(path)
                                         : load_embeddings_binary(path);
}

}  // namespace mixsel
