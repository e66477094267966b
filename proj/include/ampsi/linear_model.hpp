#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "ampsi/prior_models.hpp"

namespace ampsi {

/// Raised when an instance is too large to allocate.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A v. Each output entry is a left-to-right sum, so results do not depend on
/// threading.
std::vector<double> forward(const DenseMatrix& A, std::span<const double> v);
/// A^T u, accumulated row by row in index order.
std::vector<double> adjoint(const DenseMatrix& A, std::span<const double> u);

struct ModelConfig {
  std::size_t n = 0;
  std::size_t m = 0;
  double sigma_w2 = 0.0;
  PriorModel prior = PriorModel::gaussian(1.0, 0.0);
  std::uint64_t seed = 0;

  double delta() const { return static_cast<double>(m) / static_cast<double>(n); }
  void validate() const;
};

/// One draw of y = A x + w together with the SI x~.
struct ProblemInstance {
  DenseMatrix A;
  std::vector<double> x;
  std::vector<double> x_tilde;
  std::vector<double> w;
  std::vector<double> y;
  ModelConfig config;

  std::size_t n() const { return config.n; }
  std::size_t m() const { return config.m; }
  double delta() const { return config.delta(); }
};

/// Deterministic in config.seed. The single stream is consumed in the order:
/// A (row-major, N(0, 1/m)), then (x, x~) pairs, then w ~ N(0, sigma_w2).
ProblemInstance generate_instance(const ModelConfig& config);

/// Builds an instance from explicit parts; y is recomputed as A x + w.
ProblemInstance assemble_instance(const ModelConfig& config, DenseMatrix A,
                                  std::vector<double> x, std::vector<double> x_tilde,
                                  std::vector<double> w);

/// Binary fixture container. Layout (all little-endian):
///   8 bytes  magic "AMPSIIN1"
///   u64 n, u64 m, u64 seed
///   u8  prior tag (0 = gg, 1 = bg)
///   f64 prior p1 (sigma_x2 or epsilon), f64 sigma_si2, f64 sigma_w2
///   f64[m*n] A row-major, f64[n] x, f64[n] x_tilde, f64[m] w, f64[m] y
void save_instance(const ProblemInstance& inst, const std::filesystem::path& path);
ProblemInstance load_instance(const std::filesystem::path& path);

}  // namespace ampsi
