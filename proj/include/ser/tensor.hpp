#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace ser {

using i64 = std::int64_t;

/// Dense row-major tensor of doubles. All training math runs in double
/// precision; shapes are checked at operation boundaries, not per access.
class Tensor {
public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(count(shape_)), 0.0);
  }
  Tensor(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<i64>(data_.size()) != count(shape_))
      throw std::invalid_argument("Tensor: data length does not match shape");
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
  }
  static Tensor zeros_like(const Tensor& o) { return Tensor(o.shape_); }

  int ndim() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  i64 numel() const { return static_cast<i64>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](i64 i) { return data_[static_cast<size_t>(i)]; }
  double operator[](i64 i) const { return data_[static_cast<size_t>(i)]; }

  double& at2(int i, int j) { return data_[static_cast<size_t>(i64(i) * shape_[1] + j)]; }
  double at2(int i, int j) const { return data_[static_cast<size_t>(i64(i) * shape_[1] + j)]; }
  double& at3(int i, int j, int k) {
    return data_[static_cast<size_t>((i64(i) * shape_[1] + j) * shape_[2] + k)];
  }
  double at3(int i, int j, int k) const {
    return data_[static_cast<size_t>((i64(i) * shape_[1] + j) * shape_[2] + k)];
  }
  double& at4(int i, int j, int k, int l) {
    return data_[static_cast<size_t>(((i64(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }
  double at4(int i, int j, int k, int l) const {
    return data_[static_cast<size_t>(((i64(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l)];
  }

  void fill(double v) {
    for (auto& x : data_) x = v;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  /// Same data, new shape; element count must match.
  Tensor reshaped(std::vector<int> shape) const {
    if (count(shape) != numel()) throw std::invalid_argument("Tensor: reshape element count mismatch");
    return Tensor(std::move(shape), data_);
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  static i64 count(const std::vector<int>& shape) {
    i64 n = 1;
    for (int d : shape) {
      if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
      n *= d;
    }
    return n;
  }

private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

/// Seedable RNG with explicit value mappings so streams are identical on any
/// platform (std distributions are implementation-defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (one value per call, no cache).
  double gaussian() {
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform integer in [0, n).
  i64 below(i64 n) { return static_cast<i64>(next_u64() % static_cast<std::uint64_t>(n)); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (i64 i = static_cast<i64>(v.size()) - 1; i > 0; --i) {
      i64 j = below(i + 1);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

private:
  std::uint64_t s_;
};

/// FNV-1a over bytes; used for config and architecture fingerprints.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ser
