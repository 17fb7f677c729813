#include "entprop/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <fmt/core.h>

#include "entprop/errors.hpp"

namespace entprop {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(fmt::format("read failed: {}", path.string()));
  return bytes;
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("idx: file shorter than the 4-byte magic");
  IdxTensor t;
  t.magic = read_be32(bytes, 0);
  std::size_t ndims = 0;
  if (t.magic == kIdxMagicImages) {
    ndims = 3;
  } else if (t.magic == kIdxMagicLabels) {
    ndims = 1;
  } else {
    throw FormatError(fmt::format("idx: bad magic 0x{:08x}", t.magic));
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) {
    throw FormatError(fmt::format("idx: truncated header at byte {} (need {})", bytes.size(), header));
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const std::uint32_t d = read_be32(bytes, 4 + 4 * i);
    t.dims.push_back(d);
    if (d != 0 && count > std::numeric_limits<std::size_t>::max() / d) {
      throw FormatError("idx: dimension product overflows");
    }
    count *= d;
  }
  const std::size_t payload = bytes.size() - header;
  if (count > payload) {
    throw FormatError(fmt::format("idx: truncated payload at byte {}: {} bytes declared, {} present",
                                  bytes.size(), count, payload));
  }
  if (count < payload) {
    throw FormatError(fmt::format("idx: {} trailing bytes after payload at byte {}",
                                  payload - count, header + count));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  try {
    return parse_idx(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& t) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * t.dims.size() + t.data.size());
  write_be32(out, t.magic);
  for (std::uint32_t d : t.dims) write_be32(out, d);
  out.insert(out.end(), t.data.begin(), t.data.end());
  return out;
}

Tensor3 Dataset::image(std::size_t i) const {
  Tensor3 t(shape.channels, shape.height, shape.width);
  copy_image(i, t.data());
  return t;
}

void Dataset::copy_image(std::size_t i, std::span<double> out) const {
  const std::size_t n = shape.size();
  if (i >= size() || out.size() != n) throw DimensionError("dataset image index/shape mismatch");
  const std::uint8_t* src = pixels.data() + i * n;
  for (std::size_t k = 0; k < n; ++k) out[k] = static_cast<double>(src[k]) * pixel_scale;
}

namespace {

void check_labels(std::span<const std::uint8_t> labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 9) throw FormatError(fmt::format("label {} at index {} out of range 0..9", labels[i], i));
  }
}

}  // namespace

Dataset dataset_from_idx(const IdxTensor& images, const IdxTensor& labels, Split split) {
  if (images.magic != kIdxMagicImages || labels.magic != kIdxMagicLabels) {
    throw FormatError("idx: expected an image tensor and a label tensor");
  }
  if (images.dims[0] != labels.dims[0]) {
    throw FormatError(fmt::format("idx: {} images but {} labels", images.dims[0], labels.dims[0]));
  }
  check_labels(labels.data);
  Dataset ds;
  ds.shape = {1, images.dims[1], images.dims[2]};
  ds.pixels = images.data;
  ds.labels = labels.data;
  ds.split = split;
  return ds;
}

namespace {

std::filesystem::path locate(const std::filesystem::path& dir, const std::string& subdir,
                             const std::string& name) {
  for (const auto& candidate : {dir / name, dir / subdir / name}) {
    if (std::filesystem::exists(candidate)) return candidate;
  }
  throw IoError(fmt::format("missing data file {} under {}", name, dir.string()));
}

}  // namespace

Dataset load_mnist(const std::filesystem::path& dir, Split split) {
  const std::string prefix = split == Split::train ? "train" : "t10k";
  return dataset_from_idx(read_idx(locate(dir, "mnist", prefix + "-images-idx3-ubyte")),
                          read_idx(locate(dir, "mnist", prefix + "-labels-idx1-ubyte")), split);
}

Dataset parse_cifar10(std::span<const std::uint8_t> bytes, Split split) {
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw FormatError(fmt::format("cifar10: {} bytes is not a multiple of {}", bytes.size(),
                                  kCifarRecordBytes));
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  Dataset ds;
  ds.shape = {3, 32, 32};
  ds.split = split;
  ds.labels.reserve(n);
  ds.pixels.reserve(n * (kCifarRecordBytes - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto rec = bytes.subspan(i * kCifarRecordBytes, kCifarRecordBytes);
    if (rec[0] > 9) {
      throw FormatError(fmt::format("cifar10: label {} in record {} (byte {})", rec[0], i,
                                    i * kCifarRecordBytes));
    }
    ds.labels.push_back(rec[0]);
    ds.pixels.insert(ds.pixels.end(), rec.begin() + 1, rec.end());
  }
  return ds;
}

Dataset read_cifar10(std::span<const std::filesystem::path> paths, Split split) {
  Dataset all;
  all.shape = {3, 32, 32};
  all.split = split;
  for (const auto& p : paths) {
    Dataset part;
    try {
      part = parse_cifar10(read_file_bytes(p), split);
    } catch (const FormatError& e) {
      throw FormatError(fmt::format("{}: {}", p.string(), e.what()));
    }
    all.pixels.insert(all.pixels.end(), part.pixels.begin(), part.pixels.end());
    all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
  }
  return all;
}

Dataset load_cifar10(const std::filesystem::path& dir, Split split) {
  std::vector<std::filesystem::path> files;
  if (split == Split::train) {
    for (int i = 1; i <= 5; ++i)
      files.push_back(locate(dir, "cifar-10-batches-bin", fmt::format("data_batch_{}.bin", i)));
  } else {
    files.push_back(locate(dir, "cifar-10-batches-bin", "test_batch.bin"));
  }
  return read_cifar10(files, split);
}

Dataset normalize_and_subset(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError(fmt::format("subset fraction {} outside (0, 1]", fraction));
  }
  std::array<std::vector<std::size_t>, 10> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (auto& idx : by_class) {
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    std::shuffle(idx.begin(), idx.end(), rng);
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(keep.begin(), keep.end());

  Dataset out;
  out.shape = data.shape;
  out.split = data.split;
  out.pixel_scale = 1.0 / 255.0;
  const std::size_t n = data.shape.size();
  out.pixels.reserve(keep.size() * n);
  out.labels.reserve(keep.size());
  for (std::size_t i : keep) {
    const auto first = data.pixels.begin() + static_cast<std::ptrdiff_t>(i * n);
    out.pixels.insert(out.pixels.end(), first, first + static_cast<std::ptrdiff_t>(n));
    out.labels.push_back(data.labels[i]);
  }
  return out;
}

}  // namespace entprop
