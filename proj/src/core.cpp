#include "lps/core.hpp"

#include "binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace lps {

std::string to_string(const Dims& d) {
  return std::to_string(d.nx) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nz);
}

bool all_finite(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

DynamicVolume::DynamicVolume(Dims dims)
    : DynamicVolume(dims, CMatrix::Zero(static_cast<Eigen::Index>(dims.pixels()),
                                        static_cast<Eigen::Index>(dims.nz))) {}

DynamicVolume::DynamicVolume(Dims dims, CMatrix data) : dims_(dims), data_(std::move(data)) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0)
    throw ValidationError("volume dimensions must be positive, got " + to_string(dims_));
  if (static_cast<std::size_t>(data_.rows()) != dims_.pixels() ||
      static_cast<std::size_t>(data_.cols()) != dims_.nz)
    throw ValidationError("Casorati matrix is " + std::to_string(data_.rows()) + "x" +
                          std::to_string(data_.cols()) + ", dims " + to_string(dims_) +
                          " require " + std::to_string(dims_.pixels()) + "x" +
                          std::to_string(dims_.nz));
  if (!all_finite(data_)) throw ValidationError("volume contains non-finite values");
}

Eigen::Map<const CMatrix> DynamicVolume::slice(std::size_t z) const {
  if (z >= dims_.nz) throw ValidationError("slice index out of range");
  return {data_.col(static_cast<Eigen::Index>(z)).data(), static_cast<Eigen::Index>(dims_.nx),
          static_cast<Eigen::Index>(dims_.ny)};
}

// ---------------------------------------------------------------------------

SupportSet::SupportSet(std::vector<MatrixIndex> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool SupportSet::contains(MatrixIndex idx) const {
  return std::binary_search(indices_.begin(), indices_.end(), idx);
}

void SupportSet::check_bounds(std::size_t rows, std::size_t cols) const {
  for (const auto& idx : indices_) {
    if (idx.row >= rows || idx.col >= cols)
      throw ValidationError("support index (" + std::to_string(idx.row) + ", " +
                            std::to_string(idx.col) + ") outside " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " matrix");
  }
}

std::size_t SupportSet::symmetric_difference(const SupportSet& a, const SupportSet& b) {
  std::vector<MatrixIndex> diff;
  std::set_symmetric_difference(a.indices_.begin(), a.indices_.end(), b.indices_.begin(),
                                b.indices_.end(), std::back_inserter(diff));
  return diff.size();
}

void Prior::validate() const {
  for (Eigen::Index i = 0; i < sigma_prev.size(); ++i) {
    if (!std::isfinite(sigma_prev[i]) || sigma_prev[i] < 0.0)
      throw ValidationError("prior singular values must be finite and non-negative");
    if (i > 0 && sigma_prev[i] > sigma_prev[i - 1])
      throw ValidationError("prior singular values must be sorted in descending order");
  }
}

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError(std::string(name) + " must be finite and > 0");
  };
  positive(lambda_L, "lambda_L");
  positive(lambda_S, "lambda_S");
  positive(tol, "tol");
  if (!(lambda_p >= 0.0 && lambda_p <= 1.0)) throw ValidationError("lambda_p must lie in [0, 1]");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(support_eps > 0.0 && support_eps < 1.0))
    throw ValidationError("support_eps must lie in (0, 1)");
}

// ---------------------------------------------------------------------------

Complex soft_threshold(Complex x, double lambda) {
  const double mag = std::abs(x);
  if (mag <= lambda) return {0.0, 0.0};
  return x * ((mag - lambda) / mag);
}

CMatrix soft_threshold_matrix(const CMatrix& m, double lambda) {
  if (!(lambda >= 0.0)) throw ValidationError("threshold must be >= 0");
  return m.unaryExpr([lambda](Complex v) { return soft_threshold(v, lambda); });
}

CMatrix soft_threshold_restricted(const CMatrix& m, double lambda, const SupportSet& keep) {
  keep.check_bounds(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  CMatrix out = soft_threshold_matrix(m, lambda);
  for (const auto& idx : keep.indices()) {
    const auto r = static_cast<Eigen::Index>(idx.row);
    const auto c = static_cast<Eigen::Index>(idx.col);
    out(r, c) = m(r, c);
  }
  return out;
}

double relative_change(const CMatrix& x_new, const CMatrix& x_old) {
  if (x_new.rows() != x_old.rows() || x_new.cols() != x_old.cols())
    throw ValidationError("relative_change: shape mismatch");
  const double denom = x_old.norm();
  const double num = (x_new - x_old).norm();
  return denom > 0.0 ? num / denom : x_new.norm();
}

// ---------------------------------------------------------------------------

void save_volume(const std::filesystem::path& path, const DynamicVolume& v) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  detail::write_header(os, detail::kVolumeMagic, v.dims());
  const CMatrix& d = v.data();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    detail::write_f64(os, d.data()[i].real());
    detail::write_f64(os, d.data()[i].imag());
  }
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

DynamicVolume load_volume(const std::filesystem::path& path) {
  Dims dims;
  auto is = detail::open_container(path, detail::kVolumeMagic, dims);
  const std::uintmax_t bytes = static_cast<std::uintmax_t>(dims.elements()) * 16u;
  detail::require_payload(is, path, bytes);

  std::vector<unsigned char> raw(bytes);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (is.gcount() != static_cast<std::streamsize>(bytes))
    throw TruncationError("'" + path.string() + "': short read of payload");
  if (is.peek() != std::char_traits<char>::eof())
    throw FormatError("'" + path.string() + "': trailing bytes after payload");

  CMatrix data(static_cast<Eigen::Index>(dims.pixels()), static_cast<Eigen::Index>(dims.nz));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const unsigned char* p = raw.data() + 16 * i;
    data.data()[i] = Complex(detail::decode_f64(p), detail::decode_f64(p + 8));
  }
  try {
    return DynamicVolume(dims, std::move(data));
  } catch (const ValidationError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

DynamicVolume load_volume(const std::filesystem::path& path, const Dims& expected) {
  Dims dims;
  detail::open_container(path, detail::kVolumeMagic, dims);
  if (!(dims == expected))
    throw DimensionError("'" + path.string() + "' holds a " + to_string(dims) +
                         " volume, expected " + to_string(expected));
  return load_volume(path);
}

}  // namespace lps
