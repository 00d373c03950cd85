#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ftsweep/catalog.hpp"
#include "ftsweep/image.hpp"
#include "ftsweep/rng.hpp"

namespace ftsweep {

/// Desk-scale stand-in for the sky cutouts: three separable shape classes
/// (disc, square, triangle) rendered at random position, size, tint and
/// noise level. Class index c doubles as the label, mirroring the
/// galaxy/quasar/star mapping.
struct SyntheticSpec {
  std::size_t image_size = 64;
  std::array<std::size_t, kNumClasses> counts{150, 60, 90};  // majority share 0.5
  std::uint64_t seed = 7;
  double noise = 0.06;
};

namespace detail {

inline void render_shape(std::vector<float>& px, std::size_t n, ObjectClass cls, Rng& rng,
                         double noise) {
  const double cx = 0.3 + 0.4 * rng.uniform();
  const double cy = 0.3 + 0.4 * rng.uniform();
  const double r = (0.12 + 0.18 * rng.uniform()) * static_cast<double>(n);
  std::array<double, 3> tint{0.55 + 0.4 * rng.uniform(), 0.55 + 0.4 * rng.uniform(),
                             0.55 + 0.4 * rng.uniform()};
  const double x0 = cx * static_cast<double>(n);
  const double y0 = cy * static_cast<double>(n);

  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double dx = static_cast<double>(x) - x0;
      const double dy = static_cast<double>(y) - y0;
      bool inside = false;
      switch (cls) {
        case ObjectClass::kGalaxy:  // disc
          inside = dx * dx + dy * dy <= r * r;
          break;
        case ObjectClass::kQso:  // square
          inside = std::abs(dx) <= r * 0.85 && std::abs(dy) <= r * 0.85;
          break;
        case ObjectClass::kStar:  // upward triangle
          inside = dy <= r * 0.7 && dy >= -r * 0.9 && std::abs(dx) <= (dy + r * 0.9) * 0.6;
          break;
      }
      for (std::size_t c = 0; c < 3; ++c) {
        double v = inside ? tint[c] : 0.08;
        v += noise * rng.normal();
        px[(y * n + x) * 3 + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
}

}  // namespace detail

/// Deterministic for a given spec.
inline std::vector<ImageSample> make_synthetic_dataset(const SyntheticSpec& spec = {}) {
  std::vector<ImageSample> samples;
  std::size_t total = 0;
  for (auto c : spec.counts) total += c;
  samples.reserve(total);

  std::size_t serial = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t i = 0; i < spec.counts[c]; ++i) {
      Rng rng(mix_seed(spec.seed, serial));
      ImageSample s;
      s.object_id = "synth-" + std::to_string(serial);
      s.size = spec.image_size;
      s.label = static_cast<ObjectClass>(c);
      s.pixels.resize(spec.image_size * spec.image_size * 3);
      detail::render_shape(s.pixels, spec.image_size, s.label, rng, spec.noise);
      samples.push_back(std::move(s));
      ++serial;
    }
  }
  return samples;
}

/// Share of the most common label; the chance baseline any useful model
/// must beat.
inline double majority_class_share(const SyntheticSpec& spec) {
  std::size_t total = 0;
  std::size_t top = 0;
  for (auto c : spec.counts) {
    total += c;
    top = std::max(top, c);
  }
  return static_cast<double>(top) / static_cast<double>(total);
}

}  // namespace ftsweep
