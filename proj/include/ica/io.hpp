#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ica/error.hpp"
#include "ica/types.hpp"

namespace ica {

namespace detail {

// Little-endian encoding is fixed in the format regardless of host order.
inline void put_u64_le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void put_f64_le(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  put_u64_le(out, bits);
}

inline double get_f64_le(const unsigned char* p) {
  const std::uint64_t bits = get_u64_le(p);
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail

inline constexpr char kBinaryMagic[5] = {'I', 'C', 'A', 'B', '1'};

// CSV: one line per channel, samples comma separated, no header, %.17g
// formatting so values round-trip exactly through text.
inline void save_matrix_csv(const MatrixXd& X, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot open '" + path + "' for writing");
  char buf[32];
  std::string line;
  for (Index i = 0; i < X.rows(); ++i) {
    line.clear();
    for (Index j = 0; j < X.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
      if (j > 0) line.push_back(',');
      line += buf;
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw format_error("short write to '" + path + "'");
}

inline MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open '" + path + "' for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string token =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      char* end = nullptr;
      const double value = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        throw format_error("'" + path + "': line " + std::to_string(line_no) +
                           ": bad numeric token '" + token + "'");
      }
      row.push_back(value);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw format_error("'" + path + "': line " + std::to_string(line_no) + ": expected " +
                         std::to_string(rows.front().size()) + " columns, got " +
                         std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw format_error("'" + path + "': empty file");
  MatrixXd X(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j) X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return X;
}

// Binary: magic "ICAB1", then N and T as little-endian u64, then N*T
// doubles little-endian in row-major order.  Bit-exact round trip.
inline void save_matrix_binary(const MatrixXd& X, const std::string& path) {
  std::string blob;
  blob.reserve(5 + 16 + static_cast<std::size_t>(X.size()) * 8);
  blob.append(kBinaryMagic, 5);
  detail::put_u64_le(blob, static_cast<std::uint64_t>(X.rows()));
  detail::put_u64_le(blob, static_cast<std::uint64_t>(X.cols()));
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j) detail::put_f64_le(blob, X(i, j));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot open '" + path + "' for writing");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw format_error("short write to '" + path + "'");
}

inline MatrixXd load_matrix_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open '" + path + "' for reading");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < 5 || std::memcmp(blob.data(), kBinaryMagic, 5) != 0) {
    throw format_error("'" + path + "': byte 0: bad magic, not an ICAB1 file");
  }
  if (blob.size() < 21) {
    throw format_error("'" + path + "': byte " + std::to_string(blob.size()) +
                       ": truncated header");
  }
  const std::uint64_t n = detail::get_u64_le(p + 5);
  const std::uint64_t t = detail::get_u64_le(p + 13);
  const std::uint64_t expected = 21 + n * t * 8;
  if (n == 0 || t == 0 || n > (1u << 20) || t > (1ull << 40) || blob.size() != expected) {
    throw format_error("'" + path + "': byte " + std::to_string(blob.size()) +
                       ": expected " + std::to_string(expected) + " bytes for " +
                       std::to_string(n) + " x " + std::to_string(t) + " matrix");
  }
  MatrixXd X(static_cast<Index>(n), static_cast<Index>(t));
  std::size_t offset = 21;
  for (Index i = 0; i < X.rows(); ++i)
    for (Index j = 0; j < X.cols(); ++j, offset += 8) X(i, j) = detail::get_f64_le(p + offset);
  return X;
}

// Dispatch on extension: .csv text, .icab binary.
inline void save_matrix(const MatrixXd& X, const std::string& path) {
  if (detail::has_suffix(path, ".csv")) return save_matrix_csv(X, path);
  if (detail::has_suffix(path, ".icab")) return save_matrix_binary(X, path);
  throw format_error("'" + path + "': unknown extension, expected .csv or .icab");
}

inline MatrixXd load_matrix(const std::string& path) {
  if (detail::has_suffix(path, ".csv")) return load_matrix_csv(path);
  if (detail::has_suffix(path, ".icab")) return load_matrix_binary(path);
  throw format_error("'" + path + "': unknown extension, expected .csv or .icab");
}

}  // namespace ica
