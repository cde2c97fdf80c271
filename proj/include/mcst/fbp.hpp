#pragma once

#include "mcst/projector.hpp"
#include "mcst/types.hpp"

namespace mcst::ct {

struct FbpOptions {
  // Hann apodization of the ramp filter; zero beyond this fraction of Nyquist.
  double cutoff = 0.4;
};

// Parallel-beam filtered back-projection of a view-major sinogram of line
// integrals. Returns an image in image units (divided by attenuation_scale).
// The output is not clamped.
Image fbp(const Vector& sinogram, const ScanGeometry& geom, const FbpOptions& opts = {});

// Frequency response (per FFT bin of length `padded`) of the apodized ramp.
Vector fbp_filter(int padded, double detector_mm, double cutoff);

}  // namespace mcst::ct
