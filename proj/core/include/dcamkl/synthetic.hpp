#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dcamkl/dataset.hpp"
#include "dcamkl/image.hpp"

namespace dcamkl {

/// A labelled toy corpus: "interesting" images (+1) lean towards saturated
/// colour, fine texture and many shapes; the rest towards muted, smooth, sparse
/// scenes. A shared latent score per image plus independent nuisance terms
/// make the classes overlap. Pixels are quantized to 8 bits so that images
/// written as PNG reload bit-identically.
struct SyntheticCorpus {
  std::vector<std::string> ids;
  std::vector<RasterImage> images;
  LabelVector labels;
};

SyntheticCorpus synthetic_corpus(std::size_t n = 200, std::uint64_t seed = 2016, int size = 64);

/// Writes `images/<id>.png`, `labels.csv` and a minimal `config.json`.
void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace dcamkl
