#include "ampsi/linear_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <string>

namespace ampsi {

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'M', 'P', 'S', 'I', 'I', 'N', '1'};

void require_dims(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw std::invalid_argument(std::string("dimension mismatch in ") + what + ": got " +
                                std::to_string(got) + ", expected " + std::to_string(want));
}

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  template <class T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_all(std::span<const double> xs) {
    for (double x : xs) put(x);
  }
  void raw(const char* p, std::size_t k) { out_.write(p, static_cast<std::streamsize>(k)); }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed for " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open " + path.string() + " for reading");
  }
  template <class T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw std::runtime_error("truncated instance file " + path_.string());
    return to_little(v);
  }
  std::vector<double> get_all(std::size_t k) {
    std::vector<double> out(k);
    for (auto& x : out) x = get<double>();
    return out;
  }
  void raw(char* p, std::size_t k) {
    in_.read(p, static_cast<std::streamsize>(k));
    if (!in_) throw std::runtime_error("truncated instance file " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
  if (cols != 0 && rows > std::numeric_limits<std::size_t>::max() / sizeof(double) / cols)
    throw ResourceError("matrix of " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " entries overflows the address space");
  try {
    data_.assign(rows * cols, 0.0);
  } catch (const std::bad_alloc&) {
    throw ResourceError("cannot allocate a " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " matrix");
  }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_dims(data_.size(), rows * cols, "DenseMatrix data");
}

std::vector<double> forward(const DenseMatrix& A, std::span<const double> v) {
  require_dims(v.size(), A.cols(), "forward");
  std::vector<double> out(A.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto r = A.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * v[j];
    out[i] = acc;
  }
  return out;
}

std::vector<double> adjoint(const DenseMatrix& A, std::span<const double> u) {
  require_dims(u.size(), A.rows(), "adjoint");
  std::vector<double> out(A.cols(), 0.0);
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const auto r = A.row(i);
    const double ui = u[i];
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * ui;
  }
  return out;
}

void ModelConfig::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(sigma_w2 >= 0.0) || !std::isfinite(sigma_w2))
    throw std::invalid_argument("sigma_w2 must be finite and >= 0");
}

ProblemInstance generate_instance(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  DenseMatrix A(config.m, config.n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.m));
  for (double& a : A.data()) a = scale * normal(rng);

  auto joint = sample_joint(config.prior, config.n, rng);

  std::vector<double> w(config.m);
  const double sw = std::sqrt(config.sigma_w2);
  for (double& wi : w) wi = sw * normal(rng);

  return assemble_instance(config, std::move(A), std::move(joint.signal), std::move(joint.si),
                           std::move(w));
}

ProblemInstance assemble_instance(const ModelConfig& config, DenseMatrix A,
                                  std::vector<double> x, std::vector<double> x_tilde,
                                  std::vector<double> w) {
  config.validate();
  require_dims(A.rows(), config.m, "A rows");
  require_dims(A.cols(), config.n, "A cols");
  require_dims(x.size(), config.n, "x");
  require_dims(x_tilde.size(), config.n, "x_tilde");
  require_dims(w.size(), config.m, "w");
  ProblemInstance inst{std::move(A), std::move(x), std::move(x_tilde), std::move(w), {}, config};
  inst.y = forward(inst.A, inst.x);
  for (std::size_t i = 0; i < inst.y.size(); ++i) inst.y[i] += inst.w[i];
  return inst;
}

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
  Writer out(path);
  out.raw(kMagic.data(), kMagic.size());
  out.put<std::uint64_t>(inst.config.n);
  out.put<std::uint64_t>(inst.config.m);
  out.put<std::uint64_t>(inst.config.seed);
  const auto& prior = inst.config.prior;
  out.put<std::uint8_t>(prior.is_gg() ? 0 : 1);
  out.put<double>(prior.is_gg() ? prior.gg().sigma_x2 : prior.bg().epsilon);
  out.put<double>(prior.si_noise_variance());
  out.put<double>(inst.config.sigma_w2);
  out.put_all(inst.A.data());
  out.put_all(inst.x);
  out.put_all(inst.x_tilde);
  out.put_all(inst.w);
  out.put_all(inst.y);
  out.finish();
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  Reader in(path);
  std::array<char, 8> magic{};
  in.raw(magic.data(), magic.size());
  if (magic != kMagic) throw std::runtime_error("bad magic in instance file " + path.string());
  ModelConfig config;
  config.n = in.get<std::uint64_t>();
  config.m = in.get<std::uint64_t>();
  config.seed = in.get<std::uint64_t>();
  const auto tag = in.get<std::uint8_t>();
  const double p1 = in.get<double>();
  const double sigma_si2 = in.get<double>();
  config.sigma_w2 = in.get<double>();
  if (tag == 0)
    config.prior = PriorModel::gaussian(p1, sigma_si2);
  else if (tag == 1)
    config.prior = PriorModel::bernoulli_gaussian(p1, sigma_si2);
  else
    throw std::runtime_error("unknown prior tag in " + path.string());
  config.validate();

  DenseMatrix A(config.m, config.n, in.get_all(config.m * config.n));
  auto x = in.get_all(config.n);
  auto xt = in.get_all(config.n);
  auto w = in.get_all(config.m);
  auto y = in.get_all(config.m);
  ProblemInstance inst{std::move(A), std::move(x), std::move(xt), std::move(w), std::move(y),
                       config};
  return inst;
}

}  // namespace ampsi
