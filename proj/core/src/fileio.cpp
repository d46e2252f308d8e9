#include "bwsnn/fileio.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "bwsnn/errors.hpp"

namespace bwsnn {

namespace {

constexpr char kWeightMagic[4] = {'B', 'W', 'S', 'N'};
constexpr char kInputMagic[4] = {'B', 'W', 'I', 'N'};
constexpr std::size_t kWeightHeaderBytes = 8;
constexpr std::size_t kWeightLayerBytes = 20;
constexpr std::size_t kInputHeaderBytes = 24;

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int b = 0; b < 2; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> in, std::string what) : in_(in), what_(std::move(what)) {}

  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error(ErrorCode::FileError, what_ + " is truncated");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto s = take(2);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint32_t u32() {
    const auto s = take(4);
    return static_cast<std::uint32_t>(s[0]) | (static_cast<std::uint32_t>(s[1]) << 8) |
           (static_cast<std::uint32_t>(s[2]) << 16) | (static_cast<std::uint32_t>(s[3]) << 24);
  }
  std::uint32_t u32_be() {
    const auto s = take(4);
    return (static_cast<std::uint32_t>(s[0]) << 24) | (static_cast<std::uint32_t>(s[1]) << 16) |
           (static_cast<std::uint32_t>(s[2]) << 8) | static_cast<std::uint32_t>(s[3]);
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t done = 0;
  while (done < data.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(data.size() - done, 1u << 30));
    crc = crc32(crc, data.data() + done, n);
    done += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint8_t kind_tag(LayerKind kind) { return static_cast<std::uint8_t>(kind); }

LayerKind kind_from_tag(std::uint8_t tag) {
  if (tag > static_cast<std::uint8_t>(LayerKind::AvgPool)) {
    throw Error(ErrorCode::FileError, "unknown layer kind tag " + std::to_string(tag));
  }
  return static_cast<LayerKind>(tag);
}

bool is_avgpool_ones(const Layer& layer) { return layer.kind == LayerKind::AvgPool; }

}  // namespace

// ---------------------------------------------------------------------------
// Weights

std::vector<std::uint8_t> encode_weights(std::span<const BinaryKernelSet> layers) {
  if (layers.size() > 0xFFFF) throw Error(ErrorCode::ValueOutOfRange, "too many layers for a weight file");
  Writer w;
  w.bytes(kWeightMagic, 4);
  w.u16(kWeightFileVersion);
  w.u16(static_cast<std::uint16_t>(layers.size()));
  for (const auto& k : layers) {
    w.u8(kind_tag(k.kind()));
    w.u8(0);
    w.u8(0);
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(k.channels()));
    w.u32(static_cast<std::uint32_t>(k.height()));
    w.u32(static_cast<std::uint32_t>(k.width()));
    w.u32(static_cast<std::uint32_t>(k.kernels()));
  }
  const auto payload_start = w.buffer().size();
  for (const auto& k : layers) {
    std::vector<std::uint8_t> packed((k.size() + 7) / 8, 0);
    for (std::size_t n = 0; n < k.size(); ++n) {
      if (k.values()[n] > 0) packed[n / 8] |= static_cast<std::uint8_t>(1u << (n % 8));
    }
    w.bytes(packed.data(), packed.size());
  }
  auto& buf = w.buffer();
  const auto crc = crc32_of(std::span<const std::uint8_t>(buf).subspan(payload_start));
  w.u32(crc);
  return std::move(buf);
}

std::vector<BinaryKernelSet> decode_weights(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "weight file");
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kWeightMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "weight file does not start with BWSN");
  }
  r.take(4);
  const auto version = r.u16();
  if (version != kWeightFileVersion) {
    throw Error(ErrorCode::FileError, "unsupported weight file version " + std::to_string(version));
  }
  const auto count = r.u16();

  struct Dims {
    LayerKind kind;
    std::uint32_t C, I, J, K;
  };
  std::vector<Dims> dims;
  for (std::uint16_t l = 0; l < count; ++l) {
    Dims d{};
    d.kind = kind_from_tag(r.u8());
    r.take(3);
    d.C = r.u32();
    d.I = r.u32();
    d.J = r.u32();
    d.K = r.u32();
    if (d.C > 1u << 16 || d.I > 1u << 16 || d.J > 1u << 16 || d.K > 1u << 16) {
      throw Error(ErrorCode::FileError, "implausible layer dimensions in weight file");
    }
    dims.push_back(d);
  }

  const auto payload_start = r.position();
  std::vector<BinaryKernelSet> out;
  for (const auto& d : dims) {
    BinaryKernelSet set(d.kind, static_cast<int>(d.K), static_cast<int>(d.C), static_cast<int>(d.I),
                        static_cast<int>(d.J));
    const auto packed = r.take((set.size() + 7) / 8);
    std::vector<std::int8_t> values(set.size());
    for (std::size_t n = 0; n < values.size(); ++n) values[n] = (packed[n / 8] >> (n % 8)) & 1 ? 1 : -1;
    out.push_back(BinaryKernelSet::from_values(d.kind, static_cast<int>(d.K), static_cast<int>(d.C),
                                               static_cast<int>(d.I), static_cast<int>(d.J), std::move(values)));
  }
  const auto payload = bytes.subspan(payload_start, r.position() - payload_start);
  const auto stored = r.u32();
  if (r.remaining() != 0) throw Error(ErrorCode::FileError, "trailing bytes after weight file checksum");
  if (crc32_of(payload) != stored) throw Error(ErrorCode::ChecksumMismatch, "weight payload CRC-32 mismatch");
  return out;
}

void write_weight_file(const std::filesystem::path& path, std::span<const BinaryKernelSet> layers) {
  write_file_atomic(path, std::span<const std::uint8_t>(encode_weights(layers)));
}

std::vector<BinaryKernelSet> read_weight_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_weights(bytes);
}

void attach_weights(NetworkGraph& graph, std::vector<BinaryKernelSet> layers) {
  if (layers.size() != graph.layers.size()) {
    std::ostringstream msg;
    msg << "weight file has " << layers.size() << " layers, network has " << graph.layers.size();
    throw Error(ErrorCode::DimMismatchWithConfig, msg.str());
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = graph.layers[l];
    if (!layers[l].matches(layer.kind, layer.shape)) {
      const auto& k = layers[l];
      std::ostringstream msg;
      msg << "layer " << l;
      if (!layer.name.empty()) msg << " (" << layer.name << ")";
      msg << ": weight file has " << to_string(k.kind()) << " C=" << k.channels() << " I=" << k.height()
          << " J=" << k.width() << " K=" << k.kernels() << ", network expects " << to_string(layer.kind)
          << " C=" << layer.shape.C << " I=" << layer.shape.I << " J=" << layer.shape.J << " K=" << layer.shape.K;
      throw Error(ErrorCode::DimMismatchWithConfig, msg.str());
    }
    layer.kernels = std::move(layers[l]);
  }
}

std::vector<BinaryKernelSet> random_weights(const NetworkGraph& graph, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<BinaryKernelSet> out;
  for (const auto& layer : graph.layers) {
    auto set = all_ones_kernels(layer.kind, layer.shape);
    if (!is_avgpool_ones(layer)) {
      std::vector<std::int8_t> values(set.size());
      for (auto& v : values) v = (rng() >> 63) ? 1 : -1;
      set = BinaryKernelSet::from_values(layer.kind, layer.shape.K, layer.shape.C, layer.shape.I, layer.shape.J,
                                         std::move(values));
    }
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<BinaryKernelSet> ones_weights(const NetworkGraph& graph) {
  std::vector<BinaryKernelSet> out;
  for (const auto& layer : graph.layers) out.push_back(all_ones_kernels(layer.kind, layer.shape));
  return out;
}

// ---------------------------------------------------------------------------
// Inputs

std::vector<std::uint8_t> encode_inputs(std::span<const RealTensor> images) {
  Writer w;
  w.bytes(kInputMagic, 4);
  w.u16(kInputFileVersion);
  w.u16(0);
  const auto& first = images.empty() ? RealTensor() : images.front();
  w.u32(static_cast<std::uint32_t>(images.size()));
  w.u32(static_cast<std::uint32_t>(first.channels()));
  w.u32(static_cast<std::uint32_t>(first.rows()));
  w.u32(static_cast<std::uint32_t>(first.cols()));
  for (const auto& img : images) {
    if (!img.same_dims(first.channels(), first.rows(), first.cols())) {
      throw Error(ErrorCode::DimensionMismatch, "all images in an input file must share dimensions");
    }
    for (const float v : img.data()) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  return std::move(w.buffer());
}

std::vector<RealTensor> decode_inputs(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kInputMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "input file does not start with BWIN");
  }
  Reader r(bytes, "input file");
  r.take(4);
  const auto version = r.u16();
  if (version != kInputFileVersion) {
    throw Error(ErrorCode::FileError, "unsupported input file version " + std::to_string(version));
  }
  r.u16();
  const auto n = r.u32();
  const auto c = r.u32();
  const auto h = r.u32();
  const auto w = r.u32();
  const auto per_image = static_cast<std::uint64_t>(c) * h * w;
  if (static_cast<std::uint64_t>(n) * per_image * 4 != r.remaining()) {
    throw Error(ErrorCode::FileError, "input file size does not match its header");
  }
  std::vector<RealTensor> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    RealTensor img(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
    for (auto& v : img.data()) v = std::bit_cast<float>(r.u32());
    out.push_back(std::move(img));
  }
  return out;
}

void write_input_file(const std::filesystem::path& path, std::span<const RealTensor> images) {
  write_file_atomic(path, std::span<const std::uint8_t>(encode_inputs(images)));
}

std::vector<RealTensor> decode_idx_images(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "IDX image file");
  if (bytes.size() < 4 || r.u32_be() != 0x00000803u) throw Error(ErrorCode::BadMagic, "not an IDX image file");
  const auto n = r.u32_be();
  const auto rows = r.u32_be();
  const auto cols = r.u32_be();
  if (static_cast<std::uint64_t>(n) * rows * cols != r.remaining()) {
    throw Error(ErrorCode::FileError, "IDX image file size does not match its header");
  }
  std::vector<RealTensor> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    RealTensor img(1, static_cast<int>(rows), static_cast<int>(cols));
    for (auto& v : img.data()) v = static_cast<float>(r.u8()) / 255.0f;
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<std::uint8_t> decode_idx_labels(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "IDX label file");
  if (bytes.size() < 4 || r.u32_be() != 0x00000801u) throw Error(ErrorCode::BadMagic, "not an IDX label file");
  const auto n = r.u32_be();
  if (n != r.remaining()) throw Error(ErrorCode::FileError, "IDX label file size does not match its header");
  const auto s = r.take(n);
  return {s.begin(), s.end()};
}

std::vector<RealTensor> read_images(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kInputMagic, 4) == 0) return decode_inputs(bytes);
  return decode_idx_images(bytes);
}

std::vector<std::uint8_t> read_labels(const std::filesystem::path& path) {
  return decode_idx_labels(read_file_bytes(path));
}

// ---------------------------------------------------------------------------
// Files

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::FileError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error(ErrorCode::FileError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::FileError, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(contents.data()),
                                                        contents.size()));
}

}  // namespace bwsnn
