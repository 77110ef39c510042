#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dcamkl {

/// Row-major raster with 1 (gray) or 3 (RGB) interleaved channels, each
/// intensity in [0, 1].
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, int channels, std::vector<double> pixels);

  static RasterImage filled(int width, int height, int channels, double value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool is_rgb() const noexcept { return channels_ == 3; }
  const std::vector<double>& pixels() const noexcept { return pixels_; }

  double at(int x, int y, int c = 0) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double& at(int x, int y, int c = 0) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> pixels_;
};

/// Single-channel working image used by the extractors.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int w, int h, double value = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, value) {}

  double operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  double& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  /// Border-replicated access.
  double clamped(int x, int y) const;
};

/// Rec. 601 luma: 0.299 R + 0.587 G + 0.114 B.
double luminance(double r, double g, double b);

GrayImage to_gray(const RasterImage& img);

/// Bilinear resample to the given size (pixel-center aligned).
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

/// Decodes 8-bit PNG or uncompressed BMP (8/24/32-bit). Throws IoError.
RasterImage load_image(const std::filesystem::path& path);

void save_png(const RasterImage& img, const std::filesystem::path& path);

/// Baseline JPEG of an 8-bit gray image, returned as the compressed stream.
std::vector<std::uint8_t> encode_jpeg_gray(const GrayImage& img, int quality);

/// Identifies the JPEG codec build for provenance records.
std::string jpeg_codec_description();

}  // namespace dcamkl
