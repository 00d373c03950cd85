#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ftsweep/catalog.hpp"
#include "ftsweep/errors.hpp"

namespace ftsweep {

/// A preprocessed image: square, RGB, floats in [0,1], row-major HWC.
struct ImageSample {
  std::string object_id;
  std::size_t size = 0;  // height == width
  std::vector<float> pixels;
  ObjectClass label = ObjectClass::kGalaxy;

  float at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * size + x) * 3 + c];
  }
};

/// Decode raw image bytes and bilinearly resize to target x target x 3,
/// values scaled to [0,1]. Deterministic for identical input bytes.
inline std::vector<float> preprocess_image(std::span<const std::uint8_t> raw,
                                           std::size_t target) {
  const cv::Mat encoded(1, static_cast<int>(raw.size()), CV_8UC1,
                        const_cast<std::uint8_t*>(raw.data()));
  cv::Mat bgr = cv::imdecode(encoded, cv::IMREAD_COLOR);
  if (bgr.empty()) throw DecodeError("bytes do not decode to an image");

  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  cv::Mat f32;
  rgb.convertTo(f32, CV_32FC3, 1.0 / 255.0);
  if (f32.rows != static_cast<int>(target) || f32.cols != static_cast<int>(target)) {
    cv::Mat resized;
    cv::resize(f32, resized, cv::Size(static_cast<int>(target), static_cast<int>(target)), 0.0,
               0.0, cv::INTER_LINEAR);
    f32 = resized;
  }

  std::vector<float> out(target * target * 3);
  for (std::size_t y = 0; y < target; ++y) {
    const float* row = f32.ptr<float>(static_cast<int>(y));
    std::copy(row, row + target * 3, out.begin() + static_cast<std::ptrdiff_t>(y * target * 3));
  }
  return out;
}

/// Encode an 8-bit RGB buffer (HWC) as JPEG. Used by tests and the
/// synthetic dataset path; the cutout service serves JPEG as well.
inline std::vector<std::uint8_t> encode_jpeg(std::span<const std::uint8_t> rgb,
                                             std::size_t height, std::size_t width,
                                             int quality = 95) {
  cv::Mat mat(static_cast<int>(height), static_cast<int>(width), CV_8UC3,
              const_cast<std::uint8_t*>(rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(mat, bgr, cv::COLOR_RGB2BGR);
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".jpg", bgr, out, {cv::IMWRITE_JPEG_QUALITY, quality})) {
    throw IoError("JPEG encoding failed");
  }
  return out;
}

}  // namespace ftsweep
