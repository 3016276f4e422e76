#include "roadnav/nn/tensor.h"

#include <algorithm>
#include <cmath>

#include "roadnav/common/error.h"

namespace roadnav::nn {

Tensor::Tensor(int n_, int c_, int h_, int w_, double fill) : shape{n_, c_, h_, w_} {
  if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw InvalidShape("tensor: negative extent");
  data.assign(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill);
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

Tensor slice_batch(const Tensor& t, int begin, int end) {
  if (begin < 0 || end > t.n() || begin > end) throw InvalidShape("slice_batch: bad range");
  Tensor out(end - begin, t.c(), t.h(), t.w());
  std::copy(t.sample(begin), t.sample(begin) + out.size(), out.data.begin());
  return out;
}

void write_batch(Tensor& dst, const Tensor& part, int offset) {
  if (part.c() != dst.c() || part.h() != dst.h() || part.w() != dst.w() ||
      offset < 0 || offset + part.n() > dst.n()) {
    throw InvalidShape("write_batch: shape mismatch");
  }
  std::copy(part.data.begin(), part.data.end(), dst.sample(offset));
}

}  // namespace roadnav::nn
