#include "entprop/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include <fmt/core.h>

#include "entprop/datasets.hpp"
#include "entprop/errors.hpp"

namespace entprop {

namespace {

constexpr char kMagic[4] = {'E', 'N', 'T', 'W'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<std::uint8_t>(bits >> s));
  }
  void dim(std::size_t d) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw DimensionError("dimension exceeds u32");
    u32(static_cast<std::uint32_t>(d));
  }
  void header(EntryKind kind, std::initializer_list<std::size_t> dims) {
    u8(static_cast<std::uint8_t>(kind));
    u8(static_cast<std::uint8_t>(dims.size()));
    for (std::size_t d : dims) dim(d);
  }
  void payload(std::span<const double> xs) {
    for (double x : xs) f64(x);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  [[nodiscard]] std::size_t offset() const noexcept { return pos_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return b_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(fmt::format("entw: truncated {} at byte {} (need {} bytes, {} left)", what,
                                    pos_, n, remaining()));
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return b_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  void f64s(std::span<double> out) {
    need(out.size() * 8, "payload");
    for (double& x : out) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b_[pos_ + i]} << (8 * i);
      x = std::bit_cast<double>(bits);
      pos_ += 8;
    }
  }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::size_t expected_dims(EntryKind kind) {
  switch (kind) {
    case EntryKind::dense:
      return 2;
    case EntryKind::conv2d:
      return 4;
    case EntryKind::bias:
    case EntryKind::activation:
      return 1;
    case EntryKind::maxpool2:
      return 0;
  }
  return 0;
}

}  // namespace

std::vector<std::uint8_t> serialize_dump(const NetworkSpec& spec, const Parameters& params) {
  check_params(spec, params);
  std::size_t entries = 0;
  for (const auto& layer : spec.layers) entries += has_params(layer) ? 2 : 1;

  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kEntwVersion);
  w.dim(entries);
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Layer& layer = spec.layers[i];
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      w.header(EntryKind::dense, {d->out, d->in});
    } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      w.header(EntryKind::conv2d, {c->filters, c->in_channels, c->kernel_h, c->kernel_w});
    } else if (std::holds_alternative<MaxPool2Layer>(layer)) {
      w.header(EntryKind::maxpool2, {});
      continue;
    } else {
      w.header(EntryKind::activation, {static_cast<std::size_t>(std::get<ActivationLayer>(layer).fn)});
      continue;
    }
    w.payload(params[i].weights.data());
    w.header(EntryKind::bias, {params[i].bias.size()});
    w.payload(params[i].bias);
  }
  return w.take();
}

WeightDump parse_dump(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("entw: bad magic at byte 0");
  for (int i = 0; i < 4; ++i) r.u8("magic");
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kEntwVersion) {
    throw FormatError(fmt::format("entw: unsupported version {} at byte {}", version, version_at));
  }
  const std::uint32_t entries = r.u32("entry count");

  WeightDump dump;
  bool bias_open = false;  // last entry was a weight entry without its bias yet
  for (std::uint32_t e = 0; e < entries; ++e) {
    const std::size_t at = r.offset();
    const std::uint8_t raw_kind = r.u8("entry kind");
    if (raw_kind > static_cast<std::uint8_t>(EntryKind::activation)) {
      throw FormatError(fmt::format("entw: unknown entry kind {} at byte {}", raw_kind, at));
    }
    const auto kind = static_cast<EntryKind>(raw_kind);
    const std::uint8_t ndims = r.u8("dim count");
    if (ndims != expected_dims(kind)) {
      throw FormatError(fmt::format("entw: entry kind {} at byte {} has {} dims, expected {}",
                                    raw_kind, at, ndims, expected_dims(kind)));
    }
    std::vector<std::size_t> dims;
    std::size_t count = 1;
    for (std::uint8_t k = 0; k < ndims; ++k) {
      const std::uint32_t d = r.u32("dims");
      if (d == 0 && kind != EntryKind::activation) {
        throw FormatError(fmt::format("entw: zero dimension in entry at byte {}", at));
      }
      dims.push_back(d);
      if (kind == EntryKind::activation) continue;
      if (d != 0 && count > std::numeric_limits<std::size_t>::max() / 8 / d) {
        throw FormatError(fmt::format("entw: dimension product overflows in entry at byte {}", at));
      }
      count *= d;
    }
    if (ndims > 0 && kind != EntryKind::activation) r.need(count * 8, "payload");

    switch (kind) {
      case EntryKind::dense: {
        Matrix m(dims[0], dims[1]);
        r.f64s(m.data());
        dump.spec.layers.emplace_back(DenseLayer{dims[1], dims[0]});
        dump.params.push_back({std::move(m), std::vector<double>(dims[0], 0.0)});
        bias_open = true;
        break;
      }
      case EntryKind::conv2d: {
        Matrix m(dims[0], dims[1] * dims[2] * dims[3]);
        r.f64s(m.data());
        dump.spec.layers.emplace_back(ConvLayer{dims[0], dims[2], dims[3], dims[1]});
        dump.params.push_back({std::move(m), std::vector<double>(dims[0], 0.0)});
        bias_open = true;
        break;
      }
      case EntryKind::bias: {
        if (!bias_open) {
          throw FormatError(fmt::format("entw: bias entry at byte {} does not follow a weight entry", at));
        }
        auto& bias = dump.params.back().bias;
        if (dims[0] != bias.size()) {
          throw FormatError(fmt::format("entw: bias of {} at byte {} for a layer with {} outputs",
                                        dims[0], at, bias.size()));
        }
        r.f64s(bias);
        bias_open = false;
        break;
      }
      case EntryKind::maxpool2:
        dump.spec.layers.emplace_back(MaxPool2Layer{});
        dump.params.emplace_back();
        bias_open = false;
        break;
      case EntryKind::activation:
        if (dims[0] > static_cast<std::size_t>(Activation::softmax)) {
          throw FormatError(fmt::format("entw: unknown activation code {} at byte {}", dims[0], at));
        }
        dump.spec.layers.emplace_back(ActivationLayer{static_cast<Activation>(dims[0])});
        dump.params.emplace_back();
        bias_open = false;
        break;
    }
  }
  if (r.remaining() != 0) {
    throw FormatError(fmt::format("entw: {} trailing bytes at byte {}", r.remaining(), r.offset()));
  }
  return dump;
}

void write_dump(const NetworkSpec& spec, const Parameters& params, const std::filesystem::path& path) {
  const auto bytes = serialize_dump(spec, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(fmt::format("write failed: {}", path.string()));
}

WeightDump read_dump(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_dump(bytes);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace entprop
