#include "dcamkl/features.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <unordered_set>

#include "dcamkl/errors.hpp"

namespace dcamkl {

std::string_view to_string(Cue cue) {
  switch (cue) {
    case Cue::kUnusualness:
      return "unusualness";
    case Cue::kAesthetics:
      return "aesthetics";
    case Cue::kGeneralPreferences:
      return "general_preferences";
  }
  return "unknown";
}

Cue cue_from_string(std::string_view name) {
  for (Cue c : kAllCues) {
    if (to_string(c) == name) return c;
  }
  throw ValidationError("unknown cue '" + std::string(name) + "'");
}

const std::vector<FeatureKind>& feature_catalog() {
  static const std::vector<FeatureKind> catalog = {
      {"familiarity", Cue::kUnusualness, "familiarity"},
      {"lof", Cue::kUnusualness, "lof"},
      {"arousal", Cue::kAesthetics, "arousal"},
      {"color_moments", Cue::kAesthetics, "color"},
      {"color_correlogram", Cue::kAesthetics, "color"},
      {"glcm", Cue::kAesthetics, "texture"},
      {"haar", Cue::kAesthetics, "texture"},
      {"lbp", Cue::kAesthetics, "texture"},
      {"complexity", Cue::kAesthetics, "complexity"},
      {"edge_histogram", Cue::kAesthetics, "shape"},
      {"hu_moments", Cue::kAesthetics, "shape"},
      {"hog", Cue::kGeneralPreferences, "hog"},
      {"gist", Cue::kGeneralPreferences, "gist"},
      {"sift", Cue::kGeneralPreferences, "sift"},
  };
  return catalog;
}

std::optional<FeatureKind> lookup_feature_kind(std::string_view name) {
  for (const auto& k : feature_catalog()) {
    if (k.name == name) return k;
  }
  return std::nullopt;
}

std::vector<CueGroup> group_by_cue(std::span<const FeatureKind> kinds) {
  std::vector<CueGroup> groups;
  for (Cue c : kAllCues) groups.push_back({c, {}});
  std::unordered_set<std::string> seen;
  for (const auto& k : kinds) {
    if (!seen.insert(k.name).second) {
      throw ValidationError("feature set '" + k.name + "' assigned to more than one cue");
    }
    groups[static_cast<std::size_t>(k.cue)].feature_sets.push_back(k.name);
  }
  return groups;
}

namespace {

void require_min_size(const RasterImage& img, int min_side, std::string_view what) {
  if (img.width() < min_side || img.height() < min_side) {
    throw ValidationError(std::string(what) + ": image smaller than " + std::to_string(min_side) +
                          "x" + std::to_string(min_side));
  }
}

void require_rgb(const RasterImage& img, std::string_view what) {
  if (!img.is_rgb()) throw ValidationError(std::string(what) + ": RGB input required");
}

struct Gradient {
  GrayImage gx;
  GrayImage gy;
  GrayImage magnitude;
};

Gradient sobel(const GrayImage& g) {
  Gradient out{GrayImage(g.width, g.height), GrayImage(g.width, g.height),
               GrayImage(g.width, g.height)};
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const double tl = g.clamped(x - 1, y - 1), t = g.clamped(x, y - 1), tr = g.clamped(x + 1, y - 1);
      const double l = g.clamped(x - 1, y), r = g.clamped(x + 1, y);
      const double bl = g.clamped(x - 1, y + 1), b = g.clamped(x, y + 1), br = g.clamped(x + 1, y + 1);
      const double gx = (tr + 2.0 * r + br) - (tl + 2.0 * l + bl);
      const double gy = (bl + 2.0 * b + br) - (tl + 2.0 * t + tr);
      out.gx(x, y) = gx;
      out.gy(x, y) = gy;
      out.magnitude(x, y) = std::hypot(gx, gy);
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void normalize_histogram(std::vector<double>& h) {
  double total = 0.0;
  for (double v : h) total += v;
  if (total > 0.0) {
    for (double& v : h) v /= total;
  }
}

}  // namespace

// ---- GLCM -----------------------------------------------------------------

Eigen::MatrixXd glcm_matrix(const GrayImage& gray, GlcmDirection dir) {
  if (gray.width < 2 || gray.height < 2) throw ValidationError("glcm: image smaller than 2x2");
  static constexpr int kOffsets[4][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
  const int dx = kOffsets[static_cast<int>(dir)][0];
  const int dy = kOffsets[static_cast<int>(dir)][1];
  auto level = [](double v) { return std::min(kGlcmLevels - 1, static_cast<int>(v * kGlcmLevels)); };

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(kGlcmLevels, kGlcmLevels);
  for (int y = 0; y < gray.height; ++y) {
    for (int x = 0; x < gray.width; ++x) {
      const int x2 = x + dx, y2 = y + dy;
      if (x2 < 0 || x2 >= gray.width || y2 < 0 || y2 >= gray.height) continue;
      const int a = level(gray(x, y)), b = level(gray(x2, y2));
      m(a, b) += 1.0;
      m(b, a) += 1.0;
    }
  }
  const double total = m.sum();
  if (total > 0.0) m /= total;
  return m;
}

std::vector<double> glcm_features(const RasterImage& img) {
  require_min_size(img, 2, "glcm");
  const GrayImage gray = to_gray(img);
  std::vector<double> out;
  out.reserve(20);
  const double scale = 1.0 / (kGlcmLevels - 1);
  for (int d = 0; d < 4; ++d) {
    const Eigen::MatrixXd p = glcm_matrix(gray, static_cast<GlcmDirection>(d));
    double contrast = 0, energy = 0, entropy = 0, idm = 0, mu = 0;
    for (int i = 0; i < kGlcmLevels; ++i) {
      for (int j = 0; j < kGlcmLevels; ++j) {
        const double v = p(i, j);
        if (v == 0.0) continue;
        const double diff = (i - j) * scale;
        contrast += v * diff * diff;
        energy += v * v;
        entropy -= v * std::log2(v);
        idm += v / (1.0 + diff * diff);
        mu += v * i * scale;
      }
    }
    // Symmetric matrix: row and column marginals coincide.
    double var = 0, cov = 0;
    for (int i = 0; i < kGlcmLevels; ++i) {
      for (int j = 0; j < kGlcmLevels; ++j) {
        const double v = p(i, j);
        if (v == 0.0) continue;
        var += v * (i * scale - mu) * (i * scale - mu);
        cov += v * (i * scale - mu) * (j * scale - mu);
      }
    }
    const double correlation = var > 1e-15 ? cov / var : 0.0;
    out.insert(out.end(), {contrast, energy, entropy, idm, correlation});
  }
  return out;
}

// ---- LBP ------------------------------------------------------------------

std::vector<double> lbp_riu2_histogram(const RasterImage& img) {
  require_min_size(img, 3, "lbp");
  const GrayImage g = to_gray(img);
  const double c = std::numbers::sqrt2 / 2.0;
  // Neighbour k sits at angle 2*pi*k/8, counter-clockwise from +x with y up.
  static constexpr int kDir[8][2] = {{1, 0}, {1, -1}, {0, -1}, {-1, -1},
                                     {-1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  std::vector<double> hist(10, 0.0);
  for (int y = 1; y < g.height - 1; ++y) {
    for (int x = 1; x < g.width - 1; ++x) {
      const double center = g(x, y);
      int bits[8];
      for (int k = 0; k < 8; ++k) {
        const int sx = kDir[k][0], sy = kDir[k][1];
        double delta;
        if (sx == 0 || sy == 0) {
          delta = g(x + sx, y + sy) - center;
        } else {
          // Bilinear sample at (c*sx, c*sy), written in differences from the
          // centre so a flat patch gives exactly zero and the two axial
          // neighbours enter symmetrically.
          const double axial = (g(x + sx, y) - center) + (g(x, y + sy) - center);
          const double corner = g(x + sx, y + sy) - center;
          delta = c * axial + c * c * (corner - axial);
        }
        bits[k] = delta >= 0.0 ? 1 : 0;
      }
      int transitions = 0, ones = 0;
      for (int k = 0; k < 8; ++k) {
        transitions += bits[k] != bits[(k + 1) % 8];
        ones += bits[k];
      }
      hist[transitions <= 2 ? ones : 9] += 1.0;
    }
  }
  normalize_histogram(hist);
  return hist;
}

// ---- Haar -----------------------------------------------------------------

std::vector<double> haar_wavelet_features(const RasterImage& img) {
  require_min_size(img, 8, "haar");
  const GrayImage g = to_gray(img);
  int w = (g.width / 8) * 8;
  int h = (g.height / 8) * 8;
  GrayImage approx(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) approx(x, y) = g(x, y);
  }

  std::vector<double> out;
  out.reserve(20);
  auto summarize = [&out](const std::vector<double>& coeffs) {
    double abs_sum = 0, sq_sum = 0;
    for (double v : coeffs) {
      abs_sum += std::abs(v);
      sq_sum += v * v;
    }
    const auto n = static_cast<double>(coeffs.size());
    out.push_back(abs_sum / n);
    out.push_back(sq_sum / n);
  };

  for (int level = 0; level < 3; ++level) {
    const int hw = w / 2, hh = h / 2;
    GrayImage next(hw, hh);
    std::vector<double> horiz, vert, diag;
    horiz.reserve(static_cast<std::size_t>(hw) * hh);
    vert.reserve(horiz.capacity());
    diag.reserve(horiz.capacity());
    for (int y = 0; y < hh; ++y) {
      for (int x = 0; x < hw; ++x) {
        const double a = approx(2 * x, 2 * y), b = approx(2 * x + 1, 2 * y);
        const double c = approx(2 * x, 2 * y + 1), d = approx(2 * x + 1, 2 * y + 1);
        next(x, y) = (a + b + c + d) / 2.0;
        horiz.push_back((a + b - c - d) / 2.0);
        vert.push_back((a - b + c - d) / 2.0);
        diag.push_back((a - b - c + d) / 2.0);
      }
    }
    summarize(horiz);
    summarize(vert);
    summarize(diag);
    approx = std::move(next);
    w = hw;
    h = hh;
  }
  summarize(approx.data);
  return out;
}

// ---- colour ---------------------------------------------------------------

std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  double hue = 0.0;
  if (delta > 0.0) {
    if (mx == r) {
      hue = std::fmod((g - b) / delta, 6.0);
    } else if (mx == g) {
      hue = (b - r) / delta + 2.0;
    } else {
      hue = (r - g) / delta + 4.0;
    }
    hue /= 6.0;
    if (hue < 0.0) hue += 1.0;
  }
  const double sat = mx > 0.0 ? delta / mx : 0.0;
  return {hue, sat, mx};
}

std::vector<double> color_moments_hsv(const RasterImage& img) {
  require_rgb(img, "color_moments");
  const std::size_t n = static_cast<std::size_t>(img.width()) * img.height();
  std::vector<double> channel[3];
  for (auto& c : channel) c.reserve(n);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto hsv = rgb_to_hsv(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      for (int k = 0; k < 3; ++k) channel[k].push_back(hsv[static_cast<std::size_t>(k)]);
    }
  }
  std::vector<double> out;
  for (const auto& c : channel) {
    // Moments of the data shifted by its first value, so a constant channel
    // gives exactly zero spread.
    const double shift = c.front();
    double shifted_mean = 0.0;
    for (double v : c) shifted_mean += v - shift;
    shifted_mean /= static_cast<double>(n);
    double m2 = 0, m3 = 0;
    for (double v : c) {
      const double d = (v - shift) - shifted_mean;
      m2 += d * d;
      m3 += d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    out.insert(out.end(), {shift + shifted_mean, std::sqrt(m2), std::cbrt(m3)});
  }
  return out;
}

int quantize_rgb64(double r, double g, double b) {
  auto q = [](double v) { return std::min(3, static_cast<int>(v * 4.0)); };
  return q(r) * 16 + q(g) * 4 + q(b);
}

namespace {

std::vector<int> color_indices(const RasterImage& img) {
  std::vector<int> idx(static_cast<std::size_t>(img.width()) * img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      idx[static_cast<std::size_t>(y) * img.width() + x] =
          img.is_rgb() ? quantize_rgb64(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2))
                       : quantize_rgb64(img.at(x, y), img.at(x, y), img.at(x, y));
    }
  }
  return idx;
}

}  // namespace

std::vector<double> color_correlogram(const RasterImage& img) {
  static constexpr int kDistances[4] = {1, 3, 5, 7};
  const int w = img.width(), h = img.height();
  const auto idx = color_indices(img);
  std::vector<double> out(256, 0.0);
  for (int slot = 0; slot < 4; ++slot) {
    const int k = kDistances[slot];
    std::vector<double> same(64, 0.0), total(64, 0.0);
    auto visit = [&](int x, int y, int qx, int qy) {
      if (qx < 0 || qx >= w || qy < 0 || qy >= h) return;
      const int c = idx[static_cast<std::size_t>(y) * w + x];
      total[static_cast<std::size_t>(c)] += 1.0;
      if (idx[static_cast<std::size_t>(qy) * w + qx] == c) same[static_cast<std::size_t>(c)] += 1.0;
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int dx = -k; dx <= k; ++dx) {
          visit(x, y, x + dx, y - k);
          visit(x, y, x + dx, y + k);
        }
        for (int dy = -k + 1; dy <= k - 1; ++dy) {
          visit(x, y, x - k, y + dy);
          visit(x, y, x + k, y + dy);
        }
      }
    }
    for (int c = 0; c < 64; ++c) {
      if (total[static_cast<std::size_t>(c)] > 0.0) {
        out[static_cast<std::size_t>(c * 4 + slot)] =
            same[static_cast<std::size_t>(c)] / total[static_cast<std::size_t>(c)];
      }
    }
  }
  return out;
}

std::vector<double> color_histogram(const RasterImage& img) {
  std::vector<double> hist(64, 0.0);
  for (int c : color_indices(img)) hist[static_cast<std::size_t>(c)] += 1.0;
  normalize_histogram(hist);
  return hist;
}

double arousal_score(const RasterImage& img) {
  require_rgb(img, "arousal");
  double sum = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
      const double sat = rgb_to_hsv(r, g, b)[1];
      sum += -0.31 * luminance(r, g, b) + 0.60 * sat;
    }
  }
  return sum / (static_cast<double>(img.width()) * img.height());
}

// ---- shape ----------------------------------------------------------------

std::vector<double> edge_histogram_sobel(const RasterImage& img) {
  const auto grad = sobel(to_gray(img));
  const double threshold = mean_of(grad.magnitude.data);
  std::vector<double> hist(8, 0.0);
  constexpr double kSector = std::numbers::pi / 4.0;
  for (std::size_t i = 0; i < grad.magnitude.data.size(); ++i) {
    const double m = grad.magnitude.data[i];
    if (!(m > threshold)) continue;
    double theta = std::atan2(grad.gy.data[i], grad.gx.data[i]);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    const int bin = static_cast<int>(std::floor((theta + kSector / 2.0) / kSector)) % 8;
    hist[static_cast<std::size_t>(bin)] += 1.0;
  }
  normalize_histogram(hist);
  return hist;
}

namespace {

GrayImage gaussian_blur(const GrayImage& g, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  GrayImage tmp(g.width, g.height), out(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += kernel[static_cast<std::size_t>(i + radius)] * g.clamped(x + i, y);
      tmp(x, y) = s;
    }
  }
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) s += kernel[static_cast<std::size_t>(i + radius)] * tmp.clamped(x, y + i);
      out(x, y) = s;
    }
  }
  return out;
}

}  // namespace

GrayImage canny_edges(const GrayImage& gray) {
  const auto grad = sobel(gaussian_blur(gray, 1.4));
  const int w = gray.width, h = gray.height;
  const auto& mag = grad.magnitude;
  double max_mag = 0.0;
  for (double v : mag.data) max_mag = std::max(max_mag, v);
  GrayImage edges(w, h, 0.0);
  if (max_mag <= 0.0) return edges;

  const double high = 0.2 * max_mag;
  const double low = 0.5 * high;
  GrayImage thin(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (m <= 0.0) continue;
      double angle = std::atan2(grad.gy(x, y), grad.gx(x, y)) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      int sx, sy;
      if (angle < 22.5 || angle >= 157.5) {
        sx = 1, sy = 0;
      } else if (angle < 67.5) {
        sx = 1, sy = 1;
      } else if (angle < 112.5) {
        sx = 0, sy = 1;
      } else {
        sx = -1, sy = 1;
      }
      const double ahead = mag.clamped(x + sx, y + sy);
      const double behind = mag.clamped(x - sx, y - sy);
      if (m > ahead && m >= behind) thin(x, y) = m;
    }
  }

  std::deque<std::pair<int, int>> frontier;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (thin(x, y) >= high) {
        edges(x, y) = 1.0;
        frontier.emplace_back(x, y);
      }
    }
  }
  while (!frontier.empty()) {
    const auto [x, y] = frontier.front();
    frontier.pop_front();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h || edges(nx, ny) != 0.0) continue;
        if (thin(nx, ny) >= low) {
          edges(nx, ny) = 1.0;
          frontier.emplace_back(nx, ny);
        }
      }
    }
  }
  return edges;
}

std::array<double, 7> hu_moments(const GrayImage& edges) {
  // Raw moments are accumulated exactly in integers about the bounding-box
  // corner, so a translated map yields bit-identical invariants.
  int min_x = edges.width, min_y = edges.height;
  for (int y = 0; y < edges.height; ++y) {
    for (int x = 0; x < edges.width; ++x) {
      if (edges(x, y) > 0.5) {
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
      }
    }
  }
  std::array<double, 7> out{};
  if (min_x == edges.width) return out;

  __int128 m[4][4] = {};
  for (int y = 0; y < edges.height; ++y) {
    for (int x = 0; x < edges.width; ++x) {
      if (!(edges(x, y) > 0.5)) continue;
      const __int128 u = x - min_x, v = y - min_y;
      __int128 up = 1;
      for (int p = 0; p <= 3; ++p) {
        __int128 vq = 1;
        for (int q = 0; p + q <= 3; ++q) {
          m[p][q] += up * vq;
          vq *= v;
        }
        up *= u;
      }
    }
  }
  using real = long double;
  const real m00 = static_cast<real>(m[0][0]);
  const real cx = static_cast<real>(m[1][0]) / m00;
  const real cy = static_cast<real>(m[0][1]) / m00;
  auto M = [&](int p, int q) { return static_cast<real>(m[p][q]); };
  const real mu20 = M(2, 0) - cx * M(1, 0);
  const real mu02 = M(0, 2) - cy * M(0, 1);
  const real mu11 = M(1, 1) - cx * M(0, 1);
  const real mu30 = M(3, 0) - 3 * cx * M(2, 0) + 2 * cx * cx * M(1, 0);
  const real mu03 = M(0, 3) - 3 * cy * M(0, 2) + 2 * cy * cy * M(0, 1);
  const real mu21 = M(2, 1) - 2 * cx * M(1, 1) - cy * M(2, 0) + 2 * cx * cx * M(0, 1);
  const real mu12 = M(1, 2) - 2 * cy * M(1, 1) - cx * M(0, 2) + 2 * cy * cy * M(1, 0);

  // Edge maps are curves: mass grows linearly with scale, so the order-(p+q)
  // moments are normalized by m00^(p+q+1).
  auto eta = [&](real mu, int order) { return mu / std::pow(m00, static_cast<real>(order + 1)); };
  const real n20 = eta(mu20, 2), n02 = eta(mu02, 2), n11 = eta(mu11, 2);
  const real n30 = eta(mu30, 3), n03 = eta(mu03, 3), n21 = eta(mu21, 3), n12 = eta(mu12, 3);

  const real a = n30 + n12, b = n21 + n03;
  std::array<real, 7> hu;
  hu[0] = n20 + n02;
  hu[1] = (n20 - n02) * (n20 - n02) + 4 * n11 * n11;
  hu[2] = (n30 - 3 * n12) * (n30 - 3 * n12) + (3 * n21 - n03) * (3 * n21 - n03);
  hu[3] = a * a + b * b;
  hu[4] = (n30 - 3 * n12) * a * (a * a - 3 * b * b) + (3 * n21 - n03) * b * (3 * a * a - b * b);
  hu[5] = (n20 - n02) * (a * a - b * b) + 4 * n11 * a * b;
  hu[6] = (3 * n21 - n03) * a * (a * a - 3 * b * b) - (n30 - 3 * n12) * b * (3 * a * a - b * b);

  for (std::size_t i = 0; i < 7; ++i) {
    const double v = static_cast<double>(hu[i]);
    const double sign = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
    out[i] = sign * std::log10(std::abs(v) + 1e-30);
  }
  return out;
}

std::vector<double> hu_moments_canny(const RasterImage& img) {
  const auto hu = hu_moments(canny_edges(to_gray(img)));
  return {hu.begin(), hu.end()};
}

// ---- complexity -----------------------------------------------------------

std::vector<double> complexity_features(const RasterImage& img) {
  const GrayImage g = to_gray(img);
  const auto n = static_cast<double>(g.data.size());

  std::vector<double> hist(256, 0.0);
  for (double v : g.data) hist[static_cast<std::size_t>(std::lround(v * 255.0))] += 1.0;
  double entropy = 0.0;
  for (double c : hist) {
    if (c > 0.0) entropy -= (c / n) * std::log2(c / n);
  }

  const auto grad = sobel(g);
  double si_sum = 0.0, si_sq = 0.0;
  for (double v : grad.magnitude.data) {
    si_sum += v;
    si_sq += v * v;
  }

  const GrayImage edges = canny_edges(g);
  const double edge_mean = mean_of(edges.data);
  double edge_var = 0.0;
  for (double v : edges.data) edge_var += (v - edge_mean) * (v - edge_mean);
  const auto jpeg = encode_jpeg_gray(edges, kJpegQuality);

  return {entropy,
          si_sum / n,
          std::sqrt(si_sq / n),
          edge_mean,
          std::sqrt(edge_var / n),
          static_cast<double>(jpeg.size()) / n};
}

// ---- HOG ------------------------------------------------------------------

std::vector<double> hog_features(const RasterImage& img) {
  constexpr int kSide = 128, kCell = 8, kCells = kSide / kCell, kBins = 9;
  constexpr int kBlocks = kCells - 1;
  require_min_size(img, 8, "hog");
  const GrayImage g = resize_bilinear(to_gray(img), kSide, kSide);

  std::vector<double> cells(static_cast<std::size_t>(kCells * kCells * kBins), 0.0);
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      const double gx = g.clamped(x + 1, y) - g.clamped(x - 1, y);
      const double gy = g.clamped(x, y + 1) - g.clamped(x, y - 1);
      const double m = std::hypot(gx, gy);
      if (m == 0.0) continue;
      double deg = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (deg < 0.0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      const int bin = std::min(kBins - 1, static_cast<int>(deg / 20.0));
      const int cell = (y / kCell) * kCells + x / kCell;
      cells[static_cast<std::size_t>(cell * kBins + bin)] += m;
    }
  }

  std::vector<double> out;
  out.reserve(kHogSize);
  // 7 x 7 of the 15 x 15 blocks: indices 0, 2, ..., 12.
  for (int by = 0; by < kBlocks - 1; by += 2) {
    for (int bx = 0; bx < kBlocks - 1; bx += 2) {
      double block[36];
      int k = 0;
      for (int cy = by; cy <= by + 1; ++cy) {
        for (int cx = bx; cx <= bx + 1; ++cx) {
          for (int b = 0; b < kBins; ++b) block[k++] = cells[static_cast<std::size_t>((cy * kCells + cx) * kBins + b)];
        }
      }
      double ss = 1e-10;
      for (double v : block) ss += v * v;
      const double norm = std::sqrt(ss);
      for (double v : block) out.push_back(std::clamp(v / norm, 0.0, 1.0));
    }
  }
  return out;
}

// ---- registry -------------------------------------------------------------

const std::vector<Extractor>& image_extractors() {
  static const std::vector<Extractor> registry = {
      {"arousal", 1, [](const RasterImage& i) { return std::vector<double>{arousal_score(i)}; }},
      {"color_moments", 9, color_moments_hsv},
      {"color_correlogram", 256, color_correlogram},
      {"color_histogram", 64, color_histogram},
      {"glcm", 20, glcm_features},
      {"haar", 20, haar_wavelet_features},
      {"lbp", 10, lbp_riu2_histogram},
      {"complexity", 6, complexity_features},
      {"edge_histogram", 8, edge_histogram_sobel},
      {"hu_moments", 7, hu_moments_canny},
      {"hog", static_cast<std::size_t>(kHogSize), hog_features},
  };
  return registry;
}

}  // namespace dcamkl
