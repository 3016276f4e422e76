#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "generators.h"
#include "roadnav/tomography/phantom.h"

namespace roadnav::testing {

using tomo::Image;
using tomo::Sinogram;
using tomo::TomoConfig;

double mass_conservation_worst(int images, int side, int angles, std::uint64_t seed) {
  Rng rng(seed);
  TomoConfig cfg;
  cfg.num_angles = angles;
  double worst = 0.0;
  for (int t = 0; t < images; ++t) {
    const Image img = random_image(rng, side, side);
    double mass = 0.0;
    for (double v : img.data) mass += v;  // unit pixel area
    const Sinogram s = tomo::radon(img, cfg);
    for (int i = 0; i < s.num_angles(); ++i) {
      double row = 0.0;
      for (int j = 0; j < s.offset_count; ++j) row += s.at(i, j) * s.offset_spacing;
      worst = std::max(worst, std::abs(row - mass) / mass);
    }
  }
  return worst;
}

DiscCheck disc_projection_check(int side, double radius, int angles) {
  TomoConfig cfg;
  cfg.num_angles = angles;
  const Sinogram s = tomo::radon(tomo::disc(side, radius), cfg);
  DiscCheck out;
  for (int i = 0; i < s.num_angles(); ++i) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < s.offset_count; ++j) {
      out.angle_deviation = std::max(out.angle_deviation, std::abs(s.at(i, j) - s.at(0, j)));
      const double o = s.offset(j);
      if (std::abs(o) >= radius) continue;  // the chord formula covers |s| < rho
      const double chord = 2.0 * std::sqrt(radius * radius - o * o);
      num += (s.at(i, j) - chord) * (s.at(i, j) - chord);
      den += chord * chord;
    }
    out.worst_chord_rel_l2 = std::max(out.worst_chord_rel_l2, std::sqrt(num / den));
  }
  return out;
}

double shepp_logan_rmse(int side, int angles) {
  TomoConfig cfg;
  cfg.num_angles = angles;
  const Image phantom = tomo::shepp_logan(side);
  const Image rec = tomo::fbp(tomo::radon(phantom, cfg), side);
  // Independent min-max normalization of the reference.
  const auto [lo, hi] = std::minmax_element(phantom.data.begin(), phantom.data.end());
  double se = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double ref = (phantom.data[k] - *lo) / (*hi - *lo);
    se += (rec.data[k] - ref) * (rec.data[k] - ref);
  }
  return std::sqrt(se / static_cast<double>(rec.size()));
}

double fourier_slice_worst(int angles, double band) {
  // Off-center Gaussian blob: effectively band-limited and asymmetric, so a
  // sign or orientation slip in the projection geometry shows up as phase error.
  const int n = 64;
  const double c = 0.5 * (n - 1);
  Image g(n, n);
  for (int r = 0; r < n; ++r) {
    for (int q = 0; q < n; ++q) {
      const double x = q - c + 3.0, y = c - r - 5.0;
      g.at(r, q) = std::exp(-(x * x + y * y) / (2.0 * 36.0));
    }
  }
  TomoConfig cfg;
  cfg.num_angles = angles;
  const Sinogram s = tomo::radon(g, cfg);
  const int steps = 20;
  double worst = 0.0;
  for (int i = 0; i < s.num_angles(); ++i) {
    const double ca = std::cos(s.angles[i]), sa = std::sin(s.angles[i]);
    double num = 0.0, den = 0.0;
    for (int k = -steps; k <= steps; ++k) {
      const double w = band * k / steps;
      std::complex<double> proj = 0.0, slice = 0.0;
      for (int j = 0; j < s.offset_count; ++j) {
        proj += s.at(i, j) * std::polar(1.0, -2.0 * std::numbers::pi * w * s.offset(j));
      }
      for (int r = 0; r < n; ++r) {
        for (int q = 0; q < n; ++q) {
          const double t = (q - c) * ca + (c - r) * sa;
          slice += g.at(r, q) * std::polar(1.0, -2.0 * std::numbers::pi * w * t);
        }
      }
      num += std::norm(proj - slice);
      den += std::norm(slice);
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  return worst;
}

double adjoint_rel_error(int side, int angles, std::uint64_t seed) {
  Rng rng(seed);
  TomoConfig cfg;
  cfg.num_angles = angles;
  const Image g = random_image(rng, side, side);
  const Sinogram rg = tomo::radon(g, cfg);
  const Sinogram t = random_sinogram(rng, angles, rg.offset_count);
  double lhs = 0.0;
  for (std::size_t k = 0; k < rg.data.size(); ++k) lhs += rg.data[k] * t.data[k];
  lhs *= std::numbers::pi / angles;  // angular quadrature weight of the adjoint
  const Image bt = tomo::backproject(t, side);
  double rhs = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) rhs += g.data[k] * bt.data[k];
  return std::abs(lhs - rhs) / std::abs(rhs);
}

std::vector<double> ramp_filter_oracle(const std::vector<double>& x, int padded) {
  using cd = std::complex<double>;
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<cd> spec(padded);
  for (int k = 0; k < padded; ++k) {
    cd acc = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) acc += x[m] * std::polar(1.0, -two_pi * k * m / padded);
    const double omega = std::min(k, padded - k) / static_cast<double>(padded);
    spec[k] = acc * omega;
  }
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    cd acc = 0.0;
    for (int k = 0; k < padded; ++k) acc += spec[k] * std::polar(1.0, two_pi * k * j / padded);
    out[j] = acc.real() / padded;
  }
  return out;
}

GradientCheck finite_difference_check(nn::Network& net, int batch, double eps, std::uint64_t seed,
                                      std::size_t stride, double floor) {
  Rng rng(seed);
  const nn::NetworkSpec& spec = net.spec();
  nn::Tensor x(batch, spec.input_channels, spec.input_size, spec.input_size);
  for (double& v : x.data) v = rng.uniform();
  nn::Tensor y(batch, nn::kNumHeads, 1, 1);
  for (double& v : y.data) v = rng.coin() ? 1.0 : 0.0;

  const nn::BatchGradient g = nn::backward(net, x, y);
  // With batchnorm the training objective uses batch statistics, which only
  // the training pass computes; its reported loss is the function to difference.
  const bool bn = spec.has_batchnorm();
  auto loss = [&] { return bn ? nn::backward(net, x, y).loss : nn::evaluate_loss(net, x, y); };
  GradientCheck out;
  for (std::size_t s = 0; s < net.params().size(); ++s) {
    for (int which = 0; which < 2; ++which) {
      nn::Tensor& p = which == 0 ? net.params()[s].weights : net.params()[s].bias;
      const nn::Tensor& grad = which == 0 ? g.grads.layers[s].weights : g.grads.layers[s].bias;
      out.total_params += p.size();
      for (std::size_t i = 0; i < p.size(); i += stride) {
        const double orig = p.data[i];
        p.data[i] = orig + eps;
        const double up = loss();
        p.data[i] = orig - eps;
        const double down = loss();
        p.data[i] = orig;
        const double fd = (up - down) / (2.0 * eps);
        const double an = grad.data[i];
        // Floor keeps exactly-zero gradients (inactive ReLU paths) from
        // dividing roundoff by zero.
        const double scale = std::max({std::abs(fd), std::abs(an), floor});
        const double rel = std::abs(fd - an) / scale;
        if (rel > out.worst_rel) {
          out.worst_rel = rel;
          out.worst_scale = std::max(std::abs(fd), std::abs(an));
        }
        ++out.checked;
      }
    }
  }
  return out;
}

int scan_registrations(const std::vector<bool>& flags, int rise, int rearm) {
  int count = 0;
  bool armed = true;
  std::size_t i = 0;
  while (i < flags.size()) {
    std::size_t j = i;
    while (j < flags.size() && flags[j] == flags[i]) ++j;
    const int len = static_cast<int>(j - i);
    if (flags[i] && armed && len >= rise) {
      ++count;
      armed = false;
    } else if (!flags[i] && !armed && len >= rearm) {
      armed = true;
    }
    i = j;
  }
  return count;
}

int count_plateaus(const std::vector<bool>& flags) {
  int n = 0;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && (i == 0 || !flags[i - 1])) ++n;
  }
  return n;
}

}  // namespace roadnav::testing
