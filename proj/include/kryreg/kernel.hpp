#pragma once

#include "kryreg/dataset.hpp"
#include "kryreg/error.hpp"
#include "kryreg/parallel.hpp"
#include "kryreg/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace kryreg {

enum class KernelFamily { Gaussian, Matern32 };

inline constexpr std::string_view to_string(KernelFamily f) {
  return f == KernelFamily::Gaussian ? "gaussian" : "matern32";
}

inline KernelFamily parse_kernel_family(std::string_view s) {
  if (s == "gaussian") return KernelFamily::Gaussian;
  if (s == "matern32" || s == "matern") return KernelFamily::Matern32;
  throw InvalidInput("unknown kernel family '" + std::string(s) + "'");
}

/// Kernel family with its bandwidth (sigma for Gaussian, h for Matern32) and
/// the diagonal regularizer gamma.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;
  double regularizer = 0.0;

  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
      throw InvalidInput("KernelSpec: bandwidth must be positive");
    if (!(regularizer >= 0.0) || !std::isfinite(regularizer))
      throw InvalidInput("KernelSpec: regularizer must be non-negative");
  }
};

inline constexpr Index kDefaultDenseCap = 10000;
inline constexpr Index kDefaultMvpBlock = 256;

namespace detail {

// Kernel value as a function of the squared distance. Every code path that
// produces kernel entries goes through here so dense and matrix-free agree.
template <KernelFamily F, class T>
inline T kernel_from_sqdist(T r2, T bandwidth) {
  if constexpr (F == KernelFamily::Gaussian) {
    return std::exp(-r2 / (T(2) * bandwidth * bandwidth));
  } else {
    const T s = std::sqrt(T(3)) * (std::sqrt(r2) / bandwidth);
    return (T(1) + s) * std::exp(-s);
  }
}

template <class T>
inline T sqdist(const T* a, const T* b, Index d) {
  T r2 = 0;
  for (Index k = 0; k < d; ++k) {
    const T diff = a[k] - b[k];
    r2 += diff * diff;
  }
  return r2;
}

template <class Fn>
inline decltype(auto) dispatch_family(KernelFamily f, Fn&& fn) {
  if (f == KernelFamily::Gaussian)
    return fn.template operator()<KernelFamily::Gaussian>();
  return fn.template operator()<KernelFamily::Matern32>();
}

}  // namespace detail

/// k(xi, xj) without the regularizer.
inline double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& xi,
                          const Eigen::Ref<const Vector>& xj) {
  if (xi.size() != xj.size())
    throw InvalidInput("eval_kernel: dimension mismatch (" + std::to_string(xi.size()) +
                       " vs " + std::to_string(xj.size()) + ")");
  spec.validate();
  const double r2 = detail::sqdist(xi.data(), xj.data(), xi.size());
  return detail::dispatch_family(spec.family, [&]<KernelFamily F>() {
    return detail::kernel_from_sqdist<F>(r2, spec.bandwidth);
  });
}

/// Explicit K = Khat + gamma*I. Upper triangle is evaluated and mirrored, so
/// the result is exactly symmetric.
inline Matrix build_dense_kernel(const Dataset& data, const KernelSpec& spec,
                                 Index dense_cap = kDefaultDenseCap) {
  spec.validate();
  const Index n = data.n();
  if (n > dense_cap)
    throw ResourceLimit("build_dense_kernel: N=" + std::to_string(n) +
                        " exceeds dense cap " + std::to_string(dense_cap));
  Matrix k(n, n);
  const double* p = data.points().data();
  const Index d = data.d();
  detail::dispatch_family(spec.family, [&]<KernelFamily F>() {
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i <= j; ++i) {
        const double v =
            detail::kernel_from_sqdist<F>(detail::sqdist(p + i * d, p + j * d, d), spec.bandwidth);
        k(i, j) = v;
        k(j, i) = v;
      }
    }
  });
  k.diagonal().array() += spec.regularizer;
  return k;
}

/// Matrix-free view of the regularized kernel matrix K = Khat + shift*I.
///
/// Only the point coordinates are stored (O(N*d)); kernel entries are
/// regenerated on the fly in row blocks. Copies and derived views
/// (`with_precision`, `with_extra_shift`) share the coordinates and one
/// atomic product counter, so a preconditioner built from an operator
/// reports its products into the same tally. Safe for concurrent read-only
/// use.
class KernelOperator {
 public:
  KernelOperator(const Dataset& data, const KernelSpec& spec,
                 Precision precision = Precision::Full, Index block = kDefaultMvpBlock)
      : shared_(std::make_shared<Shared>()),
        spec_(spec),
        shift_(spec.regularizer),
        precision_(precision),
        block_(block) {
    spec.validate();
    if (block < 1) throw InvalidInput("KernelOperator: block size must be >= 1");
    if (data.n() < 1) throw InvalidInput("KernelOperator: empty dataset");
    shared_->points = data.points();
    shared_->coords = data.points().transpose();
    shared_->coords_f = shared_->coords.cast<float>();
  }

  Index size() const { return shared_->points.cols(); }
  Index dim() const { return shared_->points.rows(); }
  const KernelSpec& spec() const { return spec_; }
  double diagonal_shift() const { return shift_; }
  Precision precision() const { return precision_; }
  Index block_size() const { return block_; }
  /// Coordinates, one column per point.
  const Matrix& points() const { return shared_->points; }

  /// Same kernel and points, different arithmetic.
  KernelOperator with_precision(Precision p) const {
    KernelOperator op = *this;
    op.precision_ = p;
    return op;
  }

  /// Khat + (gamma + delta) I, sharing storage and counters.
  KernelOperator with_extra_shift(double delta) const {
    KernelOperator op = *this;
    op.shift_ += delta;
    return op;
  }

  MvpCounts counts() const {
    return {shared_->full.load(std::memory_order_relaxed),
            shared_->reduced.load(std::memory_order_relaxed)};
  }
  void reset_counts() const {
    shared_->full.store(0);
    shared_->reduced.store(0);
  }

  /// out = (Khat + shift I) q.
  void apply(const Vector& q, Vector& out) const {
    const Index n = size();
    if (q.size() != n)
      throw InvalidInput("kernel_mvp: vector length " + std::to_string(q.size()) +
                         " does not match N=" + std::to_string(n));
    out.resize(n);
    if (precision_ == Precision::Full) {
      product<double>(shared_->coords, q.data(), out.data());
      shared_->full.fetch_add(1, std::memory_order_relaxed);
    } else {
      std::vector<float> qf(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i) qf[static_cast<std::size_t>(i)] = static_cast<float>(q(i));
      product<float>(shared_->coords_f, qf.data(), out.data());
      shared_->reduced.fetch_add(1, std::memory_order_relaxed);
    }
  }

  Vector apply(const Vector& q) const {
    Vector out;
    apply(q, out);
    return out;
  }

 private:
  struct Shared {
    Matrix points;
    /// N x d copies in both precisions.
    Matrix coords;
    Eigen::MatrixXf coords_f;
    std::atomic<std::uint64_t> full{0};
    std::atomic<std::uint64_t> reduced{0};
  };

  // Each row is accumulated by a single worker with a fixed reduction order,
  // so results do not depend on the worker count. Coordinates are read from
  // the transposed copy so every dimension is a contiguous column and the
  // kernel evaluation vectorizes.
  template <class T>
  void product(const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>& coords, const T* q,
               double* out) const {
    using Arr = Eigen::Array<T, Eigen::Dynamic, 1>;
    const Index n = size();
    const Index d = dim();
    const Index nblocks = (n + block_ - 1) / block_;
    const T bw = static_cast<T>(spec_.bandwidth);
    const T shift = static_cast<T>(shift_);
    const Eigen::Map<const Arr> qa(q, n);
    detail::dispatch_family(spec_.family, [&]<KernelFamily F>() {
#pragma omp parallel num_threads(worker_count())
      {
        Arr r2(n);
        Arr v(n);
#pragma omp for schedule(dynamic, 1)
        for (Index b = 0; b < nblocks; ++b) {
          const Index i0 = b * block_;
          const Index i1 = std::min(n, i0 + block_);
          for (Index i = i0; i < i1; ++i) {
            r2 = (coords.col(0).array() - coords(i, 0)).square();
            for (Index k = 1; k < d; ++k) r2 += (coords.col(k).array() - coords(i, k)).square();
            if constexpr (F == KernelFamily::Gaussian) {
              v = (r2 * (T(-1) / (T(2) * bw * bw))).exp();
            } else {
              v = r2.sqrt() * (std::sqrt(T(3)) / bw);
              v = (T(1) + v) * (-v).exp();
            }
            out[i] = static_cast<double>((v * qa).sum() + shift * q[i]);
          }
        }
      }
    });
  }

  std::shared_ptr<Shared> shared_;
  KernelSpec spec_;
  double shift_;
  Precision precision_;
  Index block_;
};

/// kernel_mvp as a free function.
inline Vector kernel_mvp(const KernelOperator& op, const Vector& q) { return op.apply(q); }

/// out_t = sum_i weights_i k(x_i, x*_t): the cross-kernel product between a
/// training set and test points, without the regularizer.
inline Vector cross_kernel_product(const Dataset& train, const KernelSpec& spec,
                                   const Dataset& test, const Vector& weights) {
  spec.validate();
  if (test.n() > 0 && test.d() != train.d())
    throw InvalidInput("cross_kernel_product: test dimension " + std::to_string(test.d()) +
                       " does not match training dimension " + std::to_string(train.d()));
  if (weights.size() != train.n())
    throw InvalidInput("cross_kernel_product: weight length mismatch");
  const Index nt = test.n();
  const Index n = train.n();
  const Index d = train.d();
  Vector out(nt);
  const double* xp = train.points().data();
  const double* tp = test.points().data();
  detail::dispatch_family(spec.family, [&]<KernelFamily F>() {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (Index t = 0; t < nt; ++t) {
      double acc = 0.0;
      for (Index i = 0; i < n; ++i)
        acc += weights(i) *
               detail::kernel_from_sqdist<F>(detail::sqdist(xp + i * d, tp + t * d, d), spec.bandwidth);
      out(t) = acc;
    }
  });
  return out;
}

/// k(x*) = [k(x_1, x*), ..., k(x_N, x*)].
inline Vector cross_kernel_column(const Dataset& train, const KernelSpec& spec,
                                  const Eigen::Ref<const Vector>& x_star) {
  if (x_star.size() != train.d())
    throw InvalidInput("cross_kernel_column: dimension mismatch");
  const Index n = train.n();
  const Index d = train.d();
  Vector out(n);
  const double* xp = train.points().data();
  detail::dispatch_family(spec.family, [&]<KernelFamily F>() {
    for (Index i = 0; i < n; ++i)
      out(i) = detail::kernel_from_sqdist<F>(detail::sqdist(xp + i * d, x_star.data(), d),
                                             spec.bandwidth);
  });
  return out;
}

}  // namespace kryreg
