#include "proxrate/instances.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "proxrate/analysis.hpp"
#include "proxrate/rng.hpp"
#include "proxrate/solvers.hpp"

namespace proxrate {

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

LassoInstance gen_random_lasso(int m, int d, int sparsity, double noise_sigma,
                               double lambda, std::uint64_t seed) {
  if (m < 1 || d < 1)
    throw ParameterError("gen_random_lasso: m and d must be >= 1");
  if (sparsity < 1 || sparsity > d)
    throw ParameterError("gen_random_lasso: need 1 <= sparsity <= d");
  if (lambda <= 0.0) throw ParameterError("gen_random_lasso: lambda must be > 0");
  if (noise_sigma < 0.0)
    throw ParameterError("gen_random_lasso: noise_sigma must be >= 0");

  CounterRng rng(seed);
  LassoInstance inst;
  inst.lambda = lambda;
  // Draw order is part of the format: A row-major, then the support
  // permutation, then the signs, then the noise vector.
  inst.A.resize(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) inst.A(i, j) = rng.normal();
  inst.A /= std::sqrt(static_cast<double>(m));

  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < sparsity; ++i) {
    const int j = i + static_cast<int>(rng.below(
                          static_cast<std::uint64_t>(d - i)));
    std::swap(idx[i], idx[j]);
  }
  inst.planted = Vec::Zero(d);
  for (int i = 0; i < sparsity; ++i) inst.planted[idx[i]] = rng.sign();

  Vec noise(m);
  for (int i = 0; i < m; ++i) noise[i] = rng.normal();
  inst.b = inst.A * inst.planted + noise_sigma * noise;

  const Mat AtA = inst.A.transpose() * inst.A;
  const double tol = 1e-10;
  const double est = lipschitz_estimate(
      [&AtA](const Vec& v) { return Vec(AtA * v); }, d, tol, 200000);
  inst.L = est * (1.0 + 10.0 * tol);
  return inst;
}

Image make_synthetic_image(int height, int width, std::uint64_t seed) {
  if (height < 16 || width < 16)
    throw ParameterError("make_synthetic_image: image must be at least 16x16");
  CounterRng rng(seed);
  Image img;
  img.height = height;
  img.width = width;
  img.pixels = Vec::Constant(static_cast<Eigen::Index>(height) * width, 0.2);
  for (int rect = 0; rect < 6; ++rect) {
    const int r0 = static_cast<int>(rng.below(height - 8));
    const int c0 = static_cast<int>(rng.below(width - 8));
    const int h = 4 + static_cast<int>(rng.below(20));
    const int w = 4 + static_cast<int>(rng.below(20));
    const double val = 0.15 + 0.8 * rng.uniform();
    for (int r = r0; r < std::min(height, r0 + h); ++r)
      for (int c = c0; c < std::min(width, c0 + w); ++c)
        img.pixels[r * width + c] = val;
  }
  for (Eigen::Index i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = std::clamp(img.pixels[i], 0.0, 1.0);
  return img;
}

BlurOperator::BlurOperator(int height, int width, double kernel_sigma)
    : height_(height), width_(width) {
  if (height < 1 || width < 1)
    throw ParameterError("BlurOperator: empty image shape");
  if (kernel_sigma <= 0.0)
    throw ParameterError("BlurOperator: kernel_sigma must be > 0");
  radius_ = static_cast<int>(std::floor(4.0 * kernel_sigma));
  kernel_.resize(2 * radius_ + 1);
  double sum = 0.0;
  for (int t = -radius_; t <= radius_; ++t) {
    const double u = static_cast<double>(t) / kernel_sigma;
    kernel_[t + radius_] = std::exp(-0.5 * u * u);
    sum += kernel_[t + radius_];
  }
  for (double& w : kernel_) w /= sum;
}

namespace {

// Half-sample symmetric boundary: index -1 maps to 0, n to n-1, and so on.
inline int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

Vec BlurOperator::apply(const Vec& img) const {
  if (img.size() != static_cast<Eigen::Index>(height_) * width_)
    throw DimensionError("BlurOperator::apply: image size mismatch");
  Vec tmp = Vec::Zero(img.size());
  // Vertical pass (convolve along the row index), then horizontal.
  for (int t = -radius_; t <= radius_; ++t) {
    const double w = kernel_[t + radius_];
    for (int r = 0; r < height_; ++r) {
      const int rs = reflect(r + t, height_);
      for (int c = 0; c < width_; ++c)
        tmp[r * width_ + c] += w * img[rs * width_ + c];
    }
  }
  Vec out = Vec::Zero(img.size());
  for (int t = -radius_; t <= radius_; ++t) {
    const double w = kernel_[t + radius_];
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) {
        const int cs = reflect(c + t, width_);
        out[r * width_ + c] += w * tmp[r * width_ + cs];
      }
    }
  }
  return out;
}

DeblurInstance gen_deblur(const Image& clean, double kernel_sigma,
                          double noise_sigma, double lambda,
                          std::uint64_t seed) {
  if (clean.pixels.size() !=
      static_cast<Eigen::Index>(clean.height) * clean.width)
    throw DimensionError("gen_deblur: image buffer does not match its shape");
  if (clean.pixels.minCoeff() < 0.0 || clean.pixels.maxCoeff() > 1.0)
    throw ParameterError("gen_deblur: clean image values must lie in [0, 1]");
  if (lambda <= 0.0) throw ParameterError("gen_deblur: lambda must be > 0");
  if (noise_sigma < 0.0)
    throw ParameterError("gen_deblur: noise_sigma must be >= 0");
  DeblurInstance inst;
  inst.height = clean.height;
  inst.width = clean.width;
  inst.kernel_sigma = kernel_sigma;
  inst.lambda = lambda;
  inst.clean = clean.pixels;
  inst.blur =
      std::make_shared<BlurOperator>(clean.height, clean.width, kernel_sigma);
  CounterRng rng(seed);
  Vec noise(clean.pixels.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  inst.observed = inst.blur->apply(clean.pixels) + noise_sigma * noise;
  // The kernel is nonnegative with rows summing to exactly 1 and the operator
  // is symmetric, so its spectral norm is 1.
  inst.L = 1.0;
  return inst;
}

// ---------------------------------------------------------------------------
// Lipschitz estimation and reference solve
// ---------------------------------------------------------------------------

double lipschitz_estimate(const std::function<Vec(const Vec&)>& sym_op,
                          Eigen::Index d, double tol, long max_iters,
                          long confirm, std::uint64_t seed) {
  if (tol <= 0.0) throw ParameterError("lipschitz_estimate: tol must be > 0");
  if (d < 1) throw ParameterError("lipschitz_estimate: d must be >= 1");
  CounterRng rng(seed);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
  v /= v.norm();
  double prev = 0.0;
  double est = 0.0;
  long streak = 0;
  for (long it = 1; it <= max_iters; ++it) {
    const Vec w = sym_op(v);
    est = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;  // operator annihilated the iterate: zero map
    v = w / wn;
    if (it > 1 && std::abs(est - prev) <= tol * std::abs(prev)) {
      if (++streak >= confirm) return est;
    } else {
      streak = 0;
    }
    prev = est;
  }
  throw EstimationError(
      "lipschitz_estimate: no convergence within " + std::to_string(max_iters) +
          " iterations",
      est);
}

Reference solve_reference(const CompositeProblem& problem, double target_eps,
                          long max_iters) {
  if (target_eps <= 0.0)
    throw ParameterError("solve_reference: target_eps must be > 0");
  const double s = 0.9 / problem.smooth->lipschitz();
  const double r = 4.0;

  Reference ref;
  ref.certified_eps = std::numeric_limits<double>::infinity();
  bool done = false;
  // Manual accelerated loop rather than a driver so the stop test sees
  // ||G_s(x_k)|| at the position iterate, not at the extrapolated point.
  Vec x = Vec::Zero(problem.dimension);
  Vec y = x;
  for (long k = 1; k <= max_iters; ++k) {
    const Vec xk = proximal_step(problem, s, y);
    const double gnorm = proximal_subgradient(problem, s, xk).norm();
    if (gnorm <= target_eps) {
      ref.x_star = xk;
      ref.certified_eps = gnorm;
      done = true;
      break;
    }
    const double c =
        (static_cast<double>(k) - 1.0) / (static_cast<double>(k) + r);
    y = xk + c * (xk - x);
    x = xk;
  }
  if (!done) {
    ref.x_star = x;
    ref.certified_eps = proximal_subgradient(problem, s, x).norm();
  }
  ref.phi_star = objective(problem, ref.x_star);
  return ref;
}

CompositeProblem make_problem(const LassoInstance& inst) {
  CompositeProblem p;
  p.smooth = std::make_shared<LeastSquaresOracle>(inst.A, inst.b, inst.L);
  p.nonsmooth = std::make_shared<L1Norm>(inst.lambda);
  p.dimension = inst.A.cols();
  return p;
}

CompositeProblem make_problem(const DeblurInstance& inst) {
  if (!inst.blur)
    throw ParameterError("make_problem: deblur instance has no operator");
  CompositeProblem p;
  p.smooth = std::make_shared<OperatorLeastSquaresOracle>(inst.blur,
                                                          inst.observed,
                                                          inst.L);
  p.nonsmooth = std::make_shared<L1Norm>(inst.lambda);
  p.dimension = inst.observed.size();
  return p;
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little,
              "container writer assumes a little-endian host");

void put_u8(std::ostream& out, std::uint8_t v) {
  out.put(static_cast<char>(v));
}

void put_i64(std::ostream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

void put_f64(std::ostream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}

void put_vec(std::ostream& out, const Vec& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size()) * 8);
}

void put_reference(std::ostream& out, const std::optional<Reference>& ref) {
  put_u8(out, ref ? 1 : 0);
  if (ref) {
    put_vec(out, ref->x_star);
    put_f64(out, ref->phi_star);
    put_f64(out, ref->certified_eps);
  }
}

class Cursor {
 public:
  Cursor(std::string data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  std::size_t offset() const { return pos_; }

  void expect_magic() {
    need(kInstanceMagic.size(), "magic header");
    if (std::string_view(data_.data(), kInstanceMagic.size()) != kInstanceMagic)
      throw FormatError(path_ + ": bad magic at byte offset 0");
    pos_ = kInstanceMagic.size();
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  std::int64_t i64(const char* what) {
    need(8, what);
    std::int64_t v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  double f64(const char* what) {
    need(8, what);
    double v;
    std::memcpy(&v, data_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  Vec vec(Eigen::Index n, const char* what) {
    need(static_cast<std::size_t>(n) * 8, what);
    Vec v(n);
    std::memcpy(v.data(), data_.data() + pos_, static_cast<std::size_t>(n) * 8);
    pos_ += static_cast<std::size_t>(n) * 8;
    return v;
  }

  std::optional<Reference> reference(Eigen::Index d) {
    if (u8("reference flag") == 0) return std::nullopt;
    Reference ref;
    ref.x_star = vec(d, "reference x*");
    ref.phi_star = f64("reference objective");
    ref.certified_eps = f64("reference certified eps");
    return ref;
  }

  void expect_end() {
    if (pos_ != data_.size())
      throw FormatError(path_ + ": trailing data at byte offset " +
                        std::to_string(pos_));
  }

 private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > data_.size())
      throw FormatError(path_ + ": truncated while reading " +
                        std::string(what) + " at byte offset " +
                        std::to_string(pos_) + " (need " + std::to_string(n) +
                        " bytes, " + std::to_string(data_.size() - pos_) +
                        " left)");
  }

  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

constexpr std::uint8_t kKindLasso = 0;
constexpr std::uint8_t kKindDeblur = 1;

}  // namespace

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kInstanceMagic.data(),
            static_cast<std::streamsize>(kInstanceMagic.size()));
  if (const auto* lasso = std::get_if<LassoInstance>(&inst)) {
    put_u8(out, kKindLasso);
    put_i64(out, lasso->A.rows());
    put_i64(out, lasso->A.cols());
    put_f64(out, lasso->lambda);
    put_f64(out, lasso->L);
    for (Eigen::Index i = 0; i < lasso->A.rows(); ++i)
      for (Eigen::Index j = 0; j < lasso->A.cols(); ++j)
        put_f64(out, lasso->A(i, j));
    put_vec(out, lasso->b);
    put_u8(out, lasso->planted.size() > 0 ? 1 : 0);
    if (lasso->planted.size() > 0) put_vec(out, lasso->planted);
    put_reference(out, lasso->reference);
  } else {
    const auto& deblur = std::get<DeblurInstance>(inst);
    put_u8(out, kKindDeblur);
    put_i64(out, deblur.height);
    put_i64(out, deblur.width);
    put_f64(out, deblur.kernel_sigma);
    put_f64(out, deblur.lambda);
    put_f64(out, deblur.L);
    put_vec(out, deblur.observed);
    put_u8(out, deblur.clean.size() > 0 ? 1 : 0);
    if (deblur.clean.size() > 0) put_vec(out, deblur.clean);
    put_reference(out, deblur.reference);
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof()) throw IoError("read failed: " + path);
  Cursor cur(std::move(data), path);
  cur.expect_magic();
  const std::uint8_t kind = cur.u8("instance kind");
  if (kind == kKindLasso) {
    LassoInstance inst;
    const std::int64_t m = cur.i64("row count");
    const std::int64_t d = cur.i64("column count");
    if (m < 1 || d < 1)
      throw FormatError(path + ": invalid shape " + std::to_string(m) + "x" +
                        std::to_string(d) + " at byte offset " +
                        std::to_string(cur.offset()));
    inst.lambda = cur.f64("lambda");
    inst.L = cur.f64("Lipschitz constant");
    inst.A.resize(m, d);
    for (std::int64_t i = 0; i < m; ++i)
      for (std::int64_t j = 0; j < d; ++j)
        inst.A(i, j) = cur.f64("design matrix entry");
    inst.b = cur.vec(m, "observation vector");
    if (cur.u8("planted flag") != 0) inst.planted = cur.vec(d, "planted vector");
    inst.reference = cur.reference(d);
    cur.expect_end();
    return inst;
  }
  if (kind == kKindDeblur) {
    DeblurInstance inst;
    const std::int64_t h = cur.i64("height");
    const std::int64_t w = cur.i64("width");
    if (h < 1 || w < 1)
      throw FormatError(path + ": invalid shape " + std::to_string(h) + "x" +
                        std::to_string(w) + " at byte offset " +
                        std::to_string(cur.offset()));
    inst.height = static_cast<int>(h);
    inst.width = static_cast<int>(w);
    inst.kernel_sigma = cur.f64("kernel sigma");
    inst.lambda = cur.f64("lambda");
    inst.L = cur.f64("Lipschitz constant");
    const Eigen::Index n = static_cast<Eigen::Index>(h) * w;
    inst.observed = cur.vec(n, "observed image");
    if (cur.u8("clean flag") != 0) inst.clean = cur.vec(n, "clean image");
    inst.reference = cur.reference(n);
    cur.expect_end();
    inst.blur = std::make_shared<BlurOperator>(inst.height, inst.width,
                                               inst.kernel_sigma);
    return inst;
  }
  throw FormatError(path + ": unknown instance kind " + std::to_string(kind) +
                    " at byte offset " +
                    std::to_string(kInstanceMagic.size()));
}

}  // namespace proxrate
