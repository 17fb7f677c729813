#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "entprop/network_spec.hpp"
#include "entprop/tensor.hpp"

namespace entprop {

inline constexpr std::uint32_t kIdxMagicImages = 0x00000803;  // u8, 3 dims
inline constexpr std::uint32_t kIdxMagicLabels = 0x00000801;  // u8, 1 dim
inline constexpr std::size_t kCifarRecordBytes = 3073;

/// Raw contents of an IDX file.
struct IdxTensor {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor read_idx(const std::filesystem::path& path);
std::vector<std::uint8_t> serialize_idx(const IdxTensor& t);

enum class Split { train, validation };

/// Labeled image set. Pixels are kept as the source bytes; `pixel_scale`
/// maps them to doubles (1 for raw data, 1/255 after normalization).
struct Dataset {
  Shape3 shape;
  std::vector<std::uint8_t> pixels;  // size() * shape.size(), sample-major
  std::vector<std::uint8_t> labels;
  Split split = Split::train;
  double pixel_scale = 1.0;

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] Tensor3 image(std::size_t i) const;
  /// Writes sample i, flattened channel-major and scaled, into `out`.
  void copy_image(std::size_t i, std::span<double> out) const;
};

/// Builds an MNIST-style dataset from an image IDX tensor (N x H x W) and a
/// label IDX tensor (N). Labels must be in 0..9.
Dataset dataset_from_idx(const IdxTensor& images, const IdxTensor& labels, Split split);

/// Loads train-*-idx?-ubyte or t10k-*-idx?-ubyte from `dir` (or `dir`/mnist).
Dataset load_mnist(const std::filesystem::path& dir, Split split);

/// Parses concatenated CIFAR-10 binary records (1 label byte + 3072 pixels).
Dataset parse_cifar10(std::span<const std::uint8_t> bytes, Split split);
Dataset read_cifar10(std::span<const std::filesystem::path> paths, Split split);

/// data_batch_1..5.bin or test_batch.bin from `dir` (or `dir`/cifar-10-batches-bin).
Dataset load_cifar10(const std::filesystem::path& dir, Split split);

/// Scales pixels by 1/255 and keeps a seeded, class-stratified subset of
/// round(fraction * class_count) samples per class, in original order.
Dataset normalize_and_subset(const Dataset& data, double fraction, std::uint64_t seed);

/// Reads a whole file. Throws IoError.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace entprop
