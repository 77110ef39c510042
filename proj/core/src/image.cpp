#include "dcamkl/image.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <png.h>

#include "dcamkl/errors.hpp"

namespace dcamkl {

RasterImage::RasterImage(int width, int height, int channels, std::vector<double> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width_ < 1 || height_ < 1) throw ValidationError("image dimensions must be positive");
  if (channels_ != 1 && channels_ != 3) throw ValidationError("image must have 1 or 3 channels");
  if (pixels_.size() != static_cast<std::size_t>(width_) * height_ * channels_) {
    throw ValidationError("image pixel buffer size does not match dimensions");
  }
  for (double v : pixels_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("image intensities must lie in [0, 1]");
  }
}

RasterImage RasterImage::filled(int width, int height, int channels, double value) {
  return RasterImage(width, height, channels,
                     std::vector<double>(static_cast<std::size_t>(width) * height * channels, value));
}

double GrayImage::clamped(int x, int y) const {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return (*this)(x, y);
}

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

GrayImage to_gray(const RasterImage& img) {
  GrayImage g(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      g(x, y) = img.is_rgb() ? luminance(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2))
                             : img.at(x, y);
    }
  }
  return g;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  GrayImage out(width, height);
  const double sx = static_cast<double>(img.width) / width;
  const double sy = static_cast<double>(img.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = img(x0, y0) + wx * (img(x1, y0) - img(x0, y0));
      const double bottom = img(x0, y1) + wx * (img(x1, y1) - img(x0, y1));
      out(x, y) = top + wy * (bottom - top);
    }
  }
  return out;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

RasterImage decode_png(const std::vector<std::uint8_t>& bytes, const std::string& label) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("cannot decode PNG " + label + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG " + label + ": " + image.message);
  }
  const int channels = gray ? 1 : 3;
  std::vector<double> px(buf.size());
  std::transform(buf.begin(), buf.end(), px.begin(), [](std::uint8_t v) { return v / 255.0; });
  return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                     std::move(px));
}

std::uint32_t le32(const std::uint8_t* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

RasterImage decode_bmp(const std::vector<std::uint8_t>& b, const std::string& label) {
  auto fail = [&](const std::string& why) { return IoError("cannot decode BMP " + label + ": " + why); };
  if (b.size() < 54) throw fail("truncated header");
  const std::uint32_t offset = le32(&b[10]);
  const std::uint32_t header_size = le32(&b[14]);
  if (header_size < 40) throw fail("unsupported header");
  const auto width = static_cast<std::int32_t>(le32(&b[18]));
  const auto raw_height = static_cast<std::int32_t>(le32(&b[22]));
  const std::uint16_t bpp = le16(&b[28]);
  const std::uint32_t compression = le32(&b[30]);
  if (compression != 0 && !(compression == 3 && bpp == 32)) throw fail("compressed BMP not supported");
  if (bpp != 8 && bpp != 24 && bpp != 32) throw fail("unsupported bit depth");
  if (width <= 0 || raw_height == 0) throw fail("bad dimensions");
  const bool bottom_up = raw_height > 0;
  const int height = bottom_up ? raw_height : -raw_height;

  std::vector<std::uint8_t> palette;
  if (bpp == 8) {
    std::uint32_t colors = le32(&b[46]);
    if (colors == 0) colors = 256;
    const std::size_t pal_at = 14 + header_size;
    if (pal_at + colors * 4 > b.size()) throw fail("truncated palette");
    palette.assign(b.begin() + static_cast<std::ptrdiff_t>(pal_at),
                   b.begin() + static_cast<std::ptrdiff_t>(pal_at + colors * 4));
  }
  const std::size_t stride = ((static_cast<std::size_t>(width) * bpp + 31) / 32) * 4;
  if (offset + stride * height > b.size()) throw fail("truncated pixel data");

  std::vector<double> px(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    const int src_row = bottom_up ? height - 1 - y : y;
    const std::uint8_t* row = &b[offset + stride * src_row];
    for (int x = 0; x < width; ++x) {
      std::uint8_t r, g, bl;
      if (bpp == 8) {
        const std::size_t idx = row[x] * 4u;
        if (idx + 2 >= palette.size()) throw fail("palette index out of range");
        bl = palette[idx];
        g = palette[idx + 1];
        r = palette[idx + 2];
      } else {
        const std::uint8_t* p = row + static_cast<std::size_t>(x) * (bpp / 8);
        bl = p[0];
        g = p[1];
        r = p[2];
      }
      double* out = &px[(static_cast<std::size_t>(y) * width + x) * 3];
      out[0] = r / 255.0;
      out[1] = g / 255.0;
      out[2] = bl / 255.0;
    }
  }
  return RasterImage(width, height, 3, std::move(px));
}

}  // namespace

RasterImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
    return decode_png(bytes, path.string());
  }
  if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') {
    return decode_bmp(bytes, path.string());
  }
  throw IoError("unrecognized image format: " + path.string());
}

void save_png(const RasterImage& img, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.is_rgb() ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), buf.begin(),
                 [](double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); });
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

namespace {

struct JpegErrorState {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
};

[[noreturn]] void on_jpeg_error(j_common_ptr cinfo) {
  auto* state = reinterpret_cast<JpegErrorState*>(cinfo->err);
  std::longjmp(state->jump, 1);
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg_gray(const GrayImage& img, int quality) {
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width));
  jpeg_compress_struct cinfo;
  JpegErrorState err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = on_jpeg_error;
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    throw IoError("JPEG encoding failed");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < img.width; ++x) {
      row[static_cast<std::size_t>(x)] =
          static_cast<std::uint8_t>(std::lround(std::clamp(img(x, y), 0.0, 1.0) * 255.0));
    }
    JSAMPROW rows[1] = {row.data()};
    jpeg_write_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(mem, mem + mem_size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return out;
}

std::string jpeg_codec_description() {
#ifdef LIBJPEG_TURBO_VERSION
#define DCAMKL_STR2(x) #x
#define DCAMKL_STR(x) DCAMKL_STR2(x)
  return std::string("libjpeg-turbo ") + DCAMKL_STR(LIBJPEG_TURBO_VERSION) + " (API " +
         std::to_string(JPEG_LIB_VERSION) + ")";
#else
  return "libjpeg (API " + std::to_string(JPEG_LIB_VERSION) + ")";
#endif
}

}  // namespace dcamkl
