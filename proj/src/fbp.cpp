#include "mcst/fbp.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include "mcst/errors.hpp"

namespace mcst::ct {

namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

int padded_length(int detectors) {
  int p = 1;
  while (p < 2 * detectors) p <<= 1;
  return p;
}

}  // namespace

Vector fbp_filter(int padded, double detector_mm, double cutoff) {
  // Spatial Ram-Lak kernel sampled at the detector pitch, transformed exactly,
  // so the DC term stays consistent with a linear (non-circular) convolution.
  const double tau = detector_mm;
  std::unique_ptr<double, FftwFree> kernel(static_cast<double*>(fftw_malloc(sizeof(double) * padded)));
  std::unique_ptr<fftw_complex, FftwFree> spectrum(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (padded / 2 + 1))));
  double* h = kernel.get();
  for (int i = 0; i < padded; ++i) {
    const int n = i <= padded / 2 ? i : i - padded;
    if (n == 0) {
      h[i] = 1.0 / (4.0 * tau * tau);
    } else if (n % 2 != 0) {
      h[i] = -1.0 / (std::numbers::pi * std::numbers::pi * n * n * tau * tau);
    } else {
      h[i] = 0.0;
    }
  }
  Plan plan(fftw_plan_dft_r2c_1d(padded, h, spectrum.get(), FFTW_ESTIMATE));
  fftw_execute(plan.get());

  Vector response(padded / 2 + 1);
  for (int k = 0; k <= padded / 2; ++k) {
    const double u = static_cast<double>(k) / (padded / 2);  // fraction of Nyquist
    const double window = u <= cutoff ? 0.5 * (1.0 + std::cos(std::numbers::pi * u / cutoff)) : 0.0;
    response(k) = tau * spectrum.get()[k][0] * window;
  }
  return response;
}

Image fbp(const Vector& sinogram, const ScanGeometry& geom, const FbpOptions& opts) {
  geom.validate();
  if (sinogram.size() != geom.rays()) throw InvalidGeometry("fbp: sinogram size mismatch");
  if (!(opts.cutoff > 0.0 && opts.cutoff <= 1.0)) throw ConfigError("fbp: cutoff must be in (0, 1]");

  const int nb = geom.detectors;
  const int padded = padded_length(nb);
  const Vector response = fbp_filter(padded, geom.detector_mm, opts.cutoff);

  std::unique_ptr<double, FftwFree> line(static_cast<double*>(fftw_malloc(sizeof(double) * padded)));
  std::unique_ptr<fftw_complex, FftwFree> spec(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (padded / 2 + 1))));
  Plan fwd(fftw_plan_dft_r2c_1d(padded, line.get(), spec.get(), FFTW_ESTIMATE));
  Plan inv(fftw_plan_dft_c2r_1d(padded, spec.get(), line.get(), FFTW_ESTIMATE));

  Matrix filtered(geom.views, nb);
  for (int v = 0; v < geom.views; ++v) {
    double* buf = line.get();
    for (int b = 0; b < padded; ++b) buf[b] = b < nb ? sinogram(v * nb + b) : 0.0;
    fftw_execute(fwd.get());
    for (int k = 0; k <= padded / 2; ++k) {
      spec.get()[k][0] *= response(k);
      spec.get()[k][1] *= response(k);
    }
    fftw_execute(inv.get());
    for (int b = 0; b < nb; ++b) filtered(v, b) = buf[b] / padded;
  }

  std::vector<double> cosines(geom.views), sines(geom.views);
  for (int v = 0; v < geom.views; ++v) {
    cosines[v] = std::cos(geom.angle(v));
    sines[v] = std::sin(geom.angle(v));
  }
  const double center = (nb - 1) / 2.0;
  const double scale = std::numbers::pi / geom.views / geom.attenuation_scale;
  Image out(geom.height, geom.width);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < geom.height; ++r) {
    const double y = ((geom.height - 1) / 2.0 - r) * geom.pixel_mm;
    for (int c = 0; c < geom.width; ++c) {
      const double x = (c - (geom.width - 1) / 2.0) * geom.pixel_mm;
      double acc = 0.0;
      for (int v = 0; v < geom.views; ++v) {
        const double u = (x * cosines[v] + y * sines[v]) / geom.detector_mm + center;
        const int b0 = static_cast<int>(std::floor(u));
        const double frac = u - b0;
        if (b0 >= 0 && b0 < nb) acc += (1.0 - frac) * filtered(v, b0);
        if (b0 + 1 >= 0 && b0 + 1 < nb) acc += frac * filtered(v, b0 + 1);
      }
      out(r, c) = acc * scale;
    }
  }
  return out;
}

}  // namespace mcst::ct
