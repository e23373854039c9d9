#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sthm/numerics/errors.hpp"

namespace sthm::io {

// Raw array container: "STHM1\n", one header line, then packed little-endian row-major data.
inline constexpr const char* kMagic = "STHM1\n";

enum class DType { f8, c16 };

inline const char* dtype_tag(DType t) { return t == DType::f8 ? "f8" : "c16"; }

struct RawArray {
  DType dtype = DType::f8;
  std::vector<std::size_t> shape;
  std::vector<double> real;
  std::vector<std::complex<double>> complex;

  std::size_t count() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
  }
};

namespace detail {

inline void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

inline double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

inline std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

inline std::string header(DType t, const std::vector<std::size_t>& shape) {
  std::string h = std::string(kMagic) + "dtype=" + dtype_tag(t) + " shape=";
  for (std::size_t i = 0; i < shape.size(); ++i) h += (i ? "," : "") + std::to_string(shape[i]);
  return h + " order=row-major endian=little\n";
}

inline void check_shape(std::size_t n, const std::vector<std::size_t>& shape) {
  if (shape.empty() || product(shape) != n) throw ConsistencyError("array shape does not match value count");
}

}  // namespace detail

inline std::string encode_array(const std::vector<double>& v, const std::vector<std::size_t>& shape) {
  detail::check_shape(v.size(), shape);
  std::string out = detail::header(DType::f8, shape);
  out.reserve(out.size() + 8 * v.size());
  for (double x : v) {
    if (!std::isfinite(x)) throw PoisonedOutput("non-finite value in array output");
    detail::put_le(out, x);
  }
  return out;
}

inline std::string encode_array(const std::vector<std::complex<double>>& v, const std::vector<std::size_t>& shape) {
  detail::check_shape(v.size(), shape);
  std::string out = detail::header(DType::c16, shape);
  out.reserve(out.size() + 16 * v.size());
  for (const auto& z : v) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw PoisonedOutput("non-finite value in array output");
    detail::put_le(out, z.real());
    detail::put_le(out, z.imag());
  }
  return out;
}

inline RawArray decode_array(const std::string& bytes) {
  const std::string magic(kMagic);
  if (bytes.compare(0, magic.size(), magic) != 0) throw FormatError("missing STHM1 magic");
  const std::size_t eol = bytes.find('\n', magic.size());
  if (eol == std::string::npos) throw FormatError("unterminated array header");
  std::istringstream line(bytes.substr(magic.size(), eol - magic.size()));
  RawArray a;
  std::string tok;
  bool have_dtype = false, have_shape = false, have_order = false, have_endian = false;
  while (line >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "dtype") {
      if (val == "f8") a.dtype = DType::f8;
      else if (val == "c16") a.dtype = DType::c16;
      else throw FormatError("unknown dtype tag '" + val + "'");
      have_dtype = true;
    } else if (key == "shape") {
      std::istringstream dims(val);
      std::string d;
      while (std::getline(dims, d, ',')) {
        if (d.empty() || d.find_first_not_of("0123456789") != std::string::npos)
          throw FormatError("malformed shape '" + val + "'");
        a.shape.push_back(std::stoull(d));
      }
      have_shape = !a.shape.empty();
    } else if (key == "order") {
      if (val != "row-major") throw FormatError("unsupported order '" + val + "'");
      have_order = true;
    } else if (key == "endian") {
      if (val != "little") throw FormatError("unsupported endianness '" + val + "'");
      have_endian = true;
    } else {
      throw FormatError("unknown header key '" + key + "'");
    }
  }
  if (!(have_dtype && have_shape && have_order && have_endian)) throw FormatError("incomplete array header");
  const std::size_t n = a.count();
  const std::size_t width = a.dtype == DType::f8 ? 8 : 16;
  if (bytes.size() - eol - 1 != n * width) throw FormatError("payload size does not match header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + eol + 1;
  if (a.dtype == DType::f8) {
    a.real.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.real[i] = detail::get_le(p + 8 * i);
  } else {
    a.complex.resize(n);
    for (std::size_t i = 0; i < n; ++i) a.complex[i] = {detail::get_le(p + 16 * i), detail::get_le(p + 16 * i + 8)};
  }
  return a;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LookupError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("output", "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("output", "short write to " + path);
}

template <typename T>
void emit_array(const std::string& path, const std::vector<T>& values, const std::vector<std::size_t>& shape) {
  write_file(path, encode_array(values, shape));
}

inline RawArray read_array(const std::string& path) { return decode_array(read_file(path)); }

}  // namespace sthm::io
