#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "wvstack/core/error.hpp"

namespace wvstack {

using cfloat = std::complex<float>;
using cdouble = std::complex<double>;

/// Dense row-major 2-D array.
template <class T>
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::vector<T>& values() noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Mask = Raster<std::uint8_t>;

namespace detail {

static_assert(std::endian::native == std::endian::little, "flat-binary IO assumes a little-endian host");

inline std::vector<char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto n = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<char> buf(n);
  in.read(buf.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error(Errc::Io, "short read on " + path.string());
  return buf;
}

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t n) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw Error(Errc::Io, "write failed on " + path.string());
}

}  // namespace detail

/// Interleaved (re, im) float32 little-endian, line-major.
inline void write_complex_raster(const std::filesystem::path& path, const Raster<cfloat>& r) {
  detail::write_bytes(path, r.data(), r.size() * sizeof(cfloat));
}

inline Raster<cfloat> read_complex_raster(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  const auto bytes = detail::read_bytes(path);
  if (bytes.size() != rows * cols * sizeof(cfloat))
    throw Error(Errc::Io, path.string() + ": size " + std::to_string(bytes.size()) + " does not match " +
                              std::to_string(rows) + "x" + std::to_string(cols) + " complex samples");
  Raster<cfloat> r(rows, cols);
  std::memcpy(r.data(), bytes.data(), bytes.size());
  return r;
}

/// One byte per cell, 1 = valid.
inline void write_mask(const std::filesystem::path& path, const Mask& m) { detail::write_bytes(path, m.data(), m.size()); }

inline Mask read_mask(const std::filesystem::path& path, std::size_t rows, std::size_t cols) {
  const auto bytes = detail::read_bytes(path);
  if (bytes.size() != rows * cols) throw Error(Errc::Io, path.string() + ": mask size mismatch");
  Mask m(rows, cols);
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

}  // namespace wvstack
