#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace roadnav::nn {

// Dense N x C x H x W tensor of doubles, row-major. Lower-rank data uses unit
// trailing extents (a dense activation is N x F x 1 x 1).
struct Tensor {
  std::array<int, 4> shape{0, 0, 0, 0};
  std::vector<double> data;

  Tensor() = default;
  Tensor(int n, int c, int h, int w, double fill = 0.0);
  explicit Tensor(std::array<int, 4> s, double fill = 0.0) : Tensor(s[0], s[1], s[2], s[3], fill) {}

  int n() const { return shape[0]; }
  int c() const { return shape[1]; }
  int h() const { return shape[2]; }
  int w() const { return shape[3]; }
  std::size_t size() const { return data.size(); }
  std::size_t sample_size() const { return static_cast<std::size_t>(shape[1]) * shape[2] * shape[3]; }

  double& at(int n_, int c_, int h_, int w_) { return data[index(n_, c_, h_, w_)]; }
  double at(int n_, int c_, int h_, int w_) const { return data[index(n_, c_, h_, w_)]; }
  double* sample(int i) { return data.data() + i * sample_size(); }
  const double* sample(int i) const { return data.data() + i * sample_size(); }

  std::size_t index(int n_, int c_, int h_, int w_) const {
    return ((static_cast<std::size_t>(n_) * shape[1] + c_) * shape[2] + h_) * shape[3] + w_;
  }

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Samples [begin, end) as a new tensor.
Tensor slice_batch(const Tensor& t, int begin, int end);

// Copies `part` into samples starting at `offset`; extents other than N must match.
void write_batch(Tensor& dst, const Tensor& part, int offset);

}  // namespace roadnav::nn
