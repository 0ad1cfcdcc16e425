#pragma once

#include <Eigen/Core>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace chac {

/// Precomputed plan for the even cosine transform on n midpoint nodes
/// x_j = pi (j + 1/2) / n.  dct2 computes X_k = sum_j x_j cos(pi k (2j+1)/(2n));
/// dct3 is its exact inverse, x_j = (1/n) [X_0 + 2 sum_{k>=1} X_k cos(...)].
/// Power-of-two sizes run through a radix-2 FFT; other sizes fall back to a
/// precomputed cosine matrix.  Plans are immutable after construction.
template <typename Scalar>
class CosinePlan {
 public:
  explicit CosinePlan(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("CosinePlan: size must be >= 1");
    pow2_ = (n & (n - 1)) == 0 && n >= 2;
    const Scalar pi = std::numbers::pi_v<Scalar>;
    twist_re_.resize(n_);
    twist_im_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      const Scalar th = pi * Scalar(k) / Scalar(2 * n_);
      twist_re_[k] = std::cos(th);
      twist_im_[k] = std::sin(th);
    }
    if (pow2_) {
      wre_.resize(n_ / 2);
      wim_.resize(n_ / 2);
      for (int j = 0; j < n_ / 2; ++j) {
        const Scalar th = Scalar(2) * pi * Scalar(j) / Scalar(n_);
        wre_[j] = std::cos(th);
        wim_[j] = -std::sin(th);
      }
      rev_.resize(n_);
      int logn = 0;
      while ((1 << logn) < n_) ++logn;
      for (int i = 0; i < n_; ++i) {
        int r = 0;
        for (int b = 0; b < logn; ++b)
          if (i & (1 << b)) r |= 1 << (logn - 1 - b);
        rev_[i] = r;
      }
    } else {
      fwd_.resize(n_, n_);
      inv_.resize(n_, n_);
      for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j) {
          const Scalar c = std::cos(pi * Scalar(k) * Scalar(2 * j + 1) / Scalar(2 * n_));
          fwd_(k, j) = c;
          inv_(j, k) = (k == 0 ? Scalar(1) : Scalar(2)) * c / Scalar(n_);
        }
    }
  }

  int size() const { return n_; }

  void dct2(Scalar* data) const {
    if (n_ == 1) return;
    if (!pow2_) {
      Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> v(data, n_);
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = fwd_ * v;
      v = out;
      return;
    }
    auto& ws = scratch();
    Scalar* re = ws.re.data();
    Scalar* im = ws.im.data();
    const int h = n_ / 2;
    for (int j = 0; j < h; ++j) {
      re[j] = data[2 * j];
      re[n_ - 1 - j] = data[2 * j + 1];
    }
    std::fill(im, im + n_, Scalar(0));
    fft(re, im);
    data[0] = re[0];
    for (int k = 1; k < n_; ++k)
      data[k] = twist_re_[k] * re[k] + twist_im_[k] * im[k];
  }

  void dct3(Scalar* data) const {
    if (n_ == 1) return;
    if (!pow2_) {
      Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> v(data, n_);
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = inv_ * v;
      v = out;
      return;
    }
    auto& ws = scratch();
    Scalar* re = ws.re.data();
    Scalar* im = ws.im.data();
    re[0] = data[0];
    im[0] = Scalar(0);
    for (int k = 1; k < n_; ++k) {
      const Scalar xk = data[k], xr = data[n_ - k];
      // V_k = e^{+i pi k/(2n)} (X_k - i X_{n-k}); conj stored for the inverse DFT
      re[k] = twist_re_[k] * xk + twist_im_[k] * xr;
      im[k] = -(twist_im_[k] * xk - twist_re_[k] * xr);
    }
    fft(re, im);
    const Scalar s = Scalar(1) / Scalar(n_);
    const int h = n_ / 2;
    for (int j = 0; j < h; ++j) {
      data[2 * j] = s * re[j];
      data[2 * j + 1] = s * re[n_ - 1 - j];
    }
  }

 private:
  struct Workspace {
    std::vector<Scalar> re, im;
  };

  Workspace& scratch() const {
    thread_local std::unordered_map<int, Workspace> pool;
    Workspace& ws = pool[n_];
    if (int(ws.re.size()) < n_) {
      ws.re.resize(n_);
      ws.im.resize(n_);
    }
    return ws;
  }

  void fft(Scalar* re, Scalar* im) const {
    for (int i = 0; i < n_; ++i) {
      const int r = rev_[i];
      if (r > i) {
        std::swap(re[i], re[r]);
        std::swap(im[i], im[r]);
      }
    }
    for (int len = 2; len <= n_; len <<= 1) {
      const int half = len / 2;
      const int step = n_ / len;
      for (int start = 0; start < n_; start += len) {
        for (int j = 0; j < half; ++j) {
          const Scalar wr = wre_[j * step], wi = wim_[j * step];
          const int a = start + j, b = a + half;
          const Scalar tr = wr * re[b] - wi * im[b];
          const Scalar ti = wr * im[b] + wi * re[b];
          re[b] = re[a] - tr;
          im[b] = im[a] - ti;
          re[a] += tr;
          im[a] += ti;
        }
      }
    }
  }

  int n_;
  bool pow2_ = false;
  std::vector<Scalar> twist_re_, twist_im_;
  std::vector<Scalar> wre_, wim_;
  std::vector<int> rev_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> fwd_, inv_;
};

/// Shared plan cache; plans are immutable so handing out shared_ptr is safe.
template <typename Scalar>
std::shared_ptr<const CosinePlan<Scalar>> cosine_plan(int n) {
  static std::mutex mu;
  static std::unordered_map<int, std::shared_ptr<const CosinePlan<Scalar>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto plan = std::make_shared<const CosinePlan<Scalar>>(n);
  cache.emplace(n, plan);
  return plan;
}

}  // namespace chac
