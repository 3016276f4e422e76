#include <fftw3.h>

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "roadnav/common/error.h"
#include "roadnav/tomography/tomography.h"

namespace roadnav::tomo {
namespace {

// FFTW planning is not thread-safe; execution on fresh aligned buffers is.
// FFTW_ESTIMATE keeps the chosen algorithm (and so the bits) reproducible.
struct RealPlans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

const RealPlans& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, RealPlans> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* re = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(n / 2 + 1);
  RealPlans p;
  p.forward = fftw_plan_dft_r2c_1d(n, re, spec, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, spec, re, FFTW_ESTIMATE);
  fftw_free(re);
  fftw_free(spec);
  return cache.emplace(n, p).first->second;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

Sinogram ramp_filter(const Sinogram& sino) {
  if (sino.offset_count < 3) throw InvalidInput("ramp_filter: need at least 3 offsets");
  const int n = sino.offset_count;
  const int padded = static_cast<int>(std::bit_ceil(static_cast<unsigned>(2 * n)));
  const RealPlans& plans = plans_for(padded);
  const int bins = padded / 2 + 1;

  // |omega_k| in cycles per unit offset; the 1/padded undoes FFTW's unnormalized inverse.
  std::vector<double> response(bins);
  for (int k = 0; k < bins; ++k) {
    response[k] = k / (padded * sino.offset_spacing) / padded;
  }

  Sinogram out = sino;
#pragma omp parallel
  {
    std::unique_ptr<double, FftwDeleter> buf(fftw_alloc_real(padded));
    std::unique_ptr<fftw_complex, FftwDeleter> spec(fftw_alloc_complex(bins));
#pragma omp for schedule(static)
    for (int i = 0; i < sino.num_angles(); ++i) {
      double* b = buf.get();
      for (int j = 0; j < padded; ++j) b[j] = j < n ? sino.at(i, j) : 0.0;
      fftw_execute_dft_r2c(plans.forward, b, spec.get());
      for (int k = 0; k < bins; ++k) {
        spec.get()[k][0] *= response[k];
        spec.get()[k][1] *= response[k];
      }
      fftw_execute_dft_c2r(plans.inverse, spec.get(), b);
      for (int j = 0; j < n; ++j) out.at(i, j) = b[j];
    }
  }
  return out;
}

}  // namespace roadnav::tomo
