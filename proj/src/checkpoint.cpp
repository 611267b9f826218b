#include "vmf/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "vmf/errors.hpp"

// Version 1 layout (all integers and doubles little-endian; see
// docs/formats.md):
//   8 bytes   magic "VMFCKPT\0"
//   u32       version (1)
//   u8        activation (0 relu, 1 tanh)
//   u64       init seed
//   u32       width count W
//   u64 * W   layer widths (input first, embedding last)
//   per layer (W-1 of them):
//     u64 rows, u64 cols, rows*cols f64 (row-major weights)
//     u64 len, len f64 (bias)
//   u64 C, u64 p, C*p f64 (prototype rows)
//   f64       kappa

namespace vmf {

namespace {

constexpr char kMagic[8] = {'V', 'M', 'F', 'C', 'K', 'P', 'T', '\0'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ofstream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::ifstream& in, const std::string& path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw DataError(path + ": truncated checkpoint");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::ifstream& in, const std::string& path) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) {
    throw DataError(path + ": truncated checkpoint");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf[i]) << (8 * i);
  return v;
}

double get_f64(std::ifstream& in, const std::string& path) {
  return std::bit_cast<double>(get_u64(in, path));
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& net,
                     const PrototypeSet& protos) {
  if (protos.dim() != net.embedding_dim()) {
    throw ConfigError("save_checkpoint: prototype dimension != embedding dimension");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw DataError(path + ": cannot open for writing");
  }
  out.write(kMagic, 8);
  put_u32(out, 1);
  out.put(net.config().activation == Activation::relu ? '\0' : '\1');
  put_u64(out, net.config().seed);
  put_u32(out, static_cast<std::uint32_t>(net.config().widths.size()));
  for (std::size_t w : net.config().widths) put_u64(out, w);
  for (const auto& layer : net.layers()) {
    put_u64(out, layer.weights.rows());
    put_u64(out, layer.weights.cols());
    for (double v : layer.weights.data()) put_f64(out, v);
    put_u64(out, layer.bias.size());
    for (double v : layer.bias) put_f64(out, v);
  }
  put_u64(out, protos.num_classes());
  put_u64(out, protos.dim());
  for (double v : protos.mus().data()) put_f64(out, v);
  put_f64(out, protos.kappa());
  if (!out) {
    throw DataError(path + ": write failed");
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(path + ": cannot open");
  }
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError(path + ": bad magic, not a checkpoint file");
  }
  const std::uint32_t version = get_u32(in, path);
  if (version != 1) {
    throw DataError(path + ": unsupported checkpoint version " +
                    std::to_string(version));
  }
  int act = in.get();
  if (act != 0 && act != 1) {
    throw DataError(path + ": bad activation code");
  }

  NetworkConfig config;
  config.activation = act == 0 ? Activation::relu : Activation::tanh;
  config.seed = get_u64(in, path);
  const std::uint32_t n_widths = get_u32(in, path);
  if (n_widths < 2 || n_widths > 64) {
    throw DataError(path + ": implausible width count " + std::to_string(n_widths));
  }
  config.widths.resize(n_widths);
  for (auto& w : config.widths) w = get_u64(in, path);

  Network net(config);  // validates widths
  for (std::size_t k = 0; k < net.layers().size(); ++k) {
    const std::uint64_t rows = get_u64(in, path);
    const std::uint64_t cols = get_u64(in, path);
    if (rows != config.widths[k] || cols != config.widths[k + 1]) {
      throw DataError(path + ": layer " + std::to_string(k) +
                      " shape disagrees with declared widths");
    }
    for (double& v : net.layers()[k].weights.data()) v = get_f64(in, path);
    const std::uint64_t blen = get_u64(in, path);
    if (blen != config.widths[k + 1]) {
      throw DataError(path + ": layer " + std::to_string(k) + " bad bias length");
    }
    for (double& v : net.layers()[k].bias) v = get_f64(in, path);
  }

  const std::uint64_t C = get_u64(in, path);
  const std::uint64_t p = get_u64(in, path);
  if (p != config.widths.back()) {
    throw DataError(path + ": prototype dimension disagrees with network");
  }
  if (C < 2 || C > 1000000) {
    throw DataError(path + ": implausible class count " + std::to_string(C));
  }
  Matrix mus(C, p);
  for (double& v : mus.data()) v = get_f64(in, path);
  const double kappa = get_f64(in, path);

  if (in.peek() != std::ifstream::traits_type::eof()) {
    throw DataError(path + ": trailing bytes after checkpoint payload");
  }
  try {
    return LoadedCheckpoint{std::move(net), PrototypeSet(std::move(mus), kappa)};
  } catch (const ConfigError& e) {
    throw DataError(path + ": invalid stored prototypes: " + e.what());
  }
}

}  // namespace vmf
