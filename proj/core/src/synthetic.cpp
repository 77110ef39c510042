#include "dcamkl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "dcamkl/errors.hpp"
#include "dcamkl/serialize.hpp"

namespace dcamkl {

namespace {

/// Portable draws on top of the raw engine output.
struct Rng {
  std::mt19937_64 engine;

  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    const double u1 = 1.0 - uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * uniform());
  }
};

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  return {r + m, g + m, b + m};
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

RasterImage render(Rng& rng, int label, int size) {
  const double z = 0.55 * label + 0.75 * rng.normal();
  const double sat = clamp01(0.45 + 0.22 * z + 0.12 * rng.normal());
  const double tex = std::clamp(0.08 + 0.05 * z + 0.04 * rng.normal(), 0.0, 0.3);
  const double freq = std::clamp(0.22 + 0.08 * z + 0.06 * rng.normal(), 0.05, 0.45);
  const int shapes = std::clamp(static_cast<int>(std::lround(3.0 + 1.8 * z + 1.2 * rng.normal())), 0, 9);

  const double hue = rng.uniform();
  const double v0 = rng.uniform(0.25, 0.8), v1 = rng.uniform(0.25, 0.8);
  const auto c0 = hsv_to_rgb(hue, sat, v0);
  const auto c1 = hsv_to_rgb(hue + rng.uniform(-0.15, 0.15), sat, v1);
  const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double theta = rng.uniform(0.0, std::numbers::pi);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<double> px(static_cast<std::size_t>(size) * size * 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x - size / 2.0) / size, v = (y - size / 2.0) / size;
      const double t = clamp01(0.5 + std::cos(dir) * u + std::sin(dir) * v);
      const double wave = tex * std::sin(2.0 * std::numbers::pi * freq * (std::cos(theta) * x + std::sin(theta) * y) + phase);
      for (int c = 0; c < 3; ++c) {
        px[(static_cast<std::size_t>(y) * size + x) * 3 + c] = (1 - t) * c0[c] + t * c1[c] + wave;
      }
    }
  }

  for (int k = 0; k < shapes; ++k) {
    const auto col = hsv_to_rgb(rng.uniform(), clamp01(sat + 0.2), rng.uniform(0.2, 1.0));
    const bool disc = rng.uniform() < 0.5;
    const double cx = rng.uniform(0, size), cy = rng.uniform(0, size);
    const double rx = rng.uniform(3, size / 5.0), ry = rng.uniform(3, size / 5.0);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        const bool inside = disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) px[(static_cast<std::size_t>(y) * size + x) * 3 + c] = col[c];
      }
    }
  }

  const double noise = 0.015 + 0.01 * rng.uniform();
  for (double& p : px) p = std::round(clamp01(p + noise * rng.normal()) * 255.0) / 255.0;
  return RasterImage(size, size, 3, std::move(px));
}

}  // namespace

SyntheticCorpus synthetic_corpus(std::size_t n, std::uint64_t seed, int size) {
  if (n < 4) throw ValidationError("synthetic_corpus: need at least 4 images");
  if (size < 16) throw ValidationError("synthetic_corpus: size must be >= 16");
  SyntheticCorpus corpus;
  std::vector<int> labels;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng{std::mt19937_64(seed * 0x9E3779B97F4A7C15ull + i)};
    const int label = i % 2 == 0 ? 1 : -1;
    char id[32];
    std::snprintf(id, sizeof(id), "img%03zu", i);
    corpus.ids.emplace_back(id);
    corpus.images.push_back(render(rng, label, size));
    labels.push_back(label);
  }
  corpus.labels = LabelVector(std::move(labels), corpus.ids);
  return corpus;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  for (std::size_t i = 0; i < corpus.ids.size(); ++i) {
    save_png(corpus.images[i], dir / "images" / (corpus.ids[i] + ".png"));
  }
  write_label_csv(corpus.labels, dir / "labels.csv");
  // Polynomial scale 1/dims keeps the degree-3 kernel on the 1764-dim HOG
  // group from reaching ~1e9 entries and swamping the other kernels.
  write_text(dir / "config.json", R"({
 "images": "images",
 "labels": "labels.csv",
 "kernels": [
  {"cue": "unusualness", "kind": "rbf", "sigma": "median"},
  {"cue": "aesthetics", "kind": "polynomial", "degree": 2, "scale": "inverse_dims"},
  {"cue": "general_preferences", "kind": "polynomial", "degree": 3, "scale": "inverse_dims"}
 ]
}
)");
}

}  // namespace dcamkl
