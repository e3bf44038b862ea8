#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dam/rng.hpp"
#include "dam/tensor.hpp"

namespace dam::synth {

// Twelve shape families, rendered procedurally onto gradient-plus-noise
// backgrounds. The whole dataset is a pure function of (category id, seed)
// and is bit-identical on any IEEE-754 platform: the renderer uses only
// +,-,*,/ and sqrt (see rng.hpp for the key-derivation scheme).
inline constexpr int kNumCategories = 12;
inline constexpr int kNumFolds = 4;
inline constexpr int kTestCategoriesPerFold = 3;

const char* category_name(int id);

enum class Split { kTrain, kTest };

struct FoldSpec {
  int fold = 0;
  std::vector<int> train_categories;
  std::vector<int> test_categories;
};

FoldSpec make_fold(int fold);

struct RenderedSample {
  int size = 0;
  std::vector<std::uint8_t> rgb;   // interleaved RGB, row-major, size*size*3
  std::vector<std::uint8_t> mask;  // 0/1 per pixel, size*size
  int category = -1;
  std::uint64_t seed = 0;

  double mask_area_fraction() const;
};

// Background gradient + pixel noise, 1-3 instances of the category with
// random pose and distinct fill colors, 0-2 distractor shapes from other
// categories drawn underneath. The mask covers category instances only and
// its area always lands in [2%, 60%] of the image.
RenderedSample render_sample(int category, std::uint64_t seed, int size);

struct EpisodeData {
  std::vector<RenderedSample> supports;
  RenderedSample query;
  int category = -1;
  std::uint64_t seed = 0;
};

EpisodeData sample_episode(const FoldSpec& fold, Split split, int k, std::uint64_t seed,
                           int size);

// PNG images plus a JSON manifest; masks reload bit-exactly.
void export_episode(const EpisodeData& ep, const std::string& dir);
EpisodeData import_episode(const std::string& dir);

// FNV-1a over the sample's rgb and mask bytes; the cross-platform golden
// checksum used by tests.
std::uint64_t sample_digest(const RenderedSample& s);

// ---- tensor adapters -------------------------------------------------------

template <typename T>
struct Episode {
  std::vector<Tensor<T>> support_images;  // [3,H,W], values in [0,1]
  std::vector<Tensor<T>> support_masks;   // [H,W], values in {0,1}
  Tensor<T> query_image;
  Tensor<T> query_mask;
  int category = -1;
  std::uint64_t seed = 0;
};

template <typename T>
Tensor<T> image_tensor(const RenderedSample& s);
template <typename T>
Tensor<T> mask_tensor(const RenderedSample& s);
template <typename T>
Episode<T> to_tensors(const EpisodeData& ep);

}  // namespace dam::synth
