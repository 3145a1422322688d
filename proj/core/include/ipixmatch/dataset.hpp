#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ipixmatch/tensor.hpp"

namespace ipix::data {

// One image with its label map. Unlabeled samples carry the 255 sentinel in
// every pixel of `label`.
struct Sample {
  Tensor image;                      // 3 x H x W, values in [0, 1]
  std::vector<std::uint8_t> label;   // H*W ids in [0, C) or 255
};

struct DatasetSpec {
  std::size_t num_classes = 4;   // class 0 = background
  std::size_t height = 32;
  std::size_t width = 32;
  std::size_t count = 512;
  std::uint64_t seed = 12345;
  double noise_sigma = 0.05;
  std::size_t min_shapes = 1;  // set both to 0 for the flat diagnostic mode
  std::size_t max_shapes = 3;
};

struct DatasetManifest {
  int version = 1;
  std::size_t num_classes = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  std::vector<std::size_t> labeled_indices;  // sorted, unique
};

// In-memory dataset: the trainer-visible samples (sentinel labels on the
// unlabeled split) plus the full ground truth kept aside for evaluation.
struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> samples;
  std::vector<std::vector<std::uint8_t>> eval_labels;  // count x H*W
};

// Fixed signature color (r, g, b) for shape class c in [1, C).
void class_color(std::size_t c, double rgb[3]);

// Generates sample `index` alone; per-sample seeding makes this identical to
// the corresponding entry of a full generation.
Sample generate_sample(const DatasetSpec& spec, std::size_t index);

// Full deterministic generation; every sample carries ground-truth labels.
std::vector<Sample> generate_dataset(const DatasetSpec& spec);

// Builds a Dataset from generated samples: chooses `labeled_count` labeled
// indices without replacement, moves ground truth of the rest into
// eval_labels, overwrites their training labels with the sentinel.
Dataset split_labeled(const DatasetSpec& spec, std::vector<Sample> samples,
                      std::size_t labeled_count, std::uint64_t split_seed);

// Directory layout: manifest.json, images.f32 (LE float32, count*3*H*W),
// labels.u8 (count*H*W), labels_eval.u8 (full ground truth).
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace ipix::data
