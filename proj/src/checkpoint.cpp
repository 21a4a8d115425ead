#include "ngcn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <vector>

#include "ngcn/errors.hpp"

namespace ngcn {

namespace {

constexpr char kMagic[4] = {'N', 'G', 'C', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

using Bytes = std::vector<unsigned char>;

void put_u32(Bytes& b, std::uint32_t x) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<unsigned char>(x >> (8 * k)));
}

void put_u64(Bytes& b, std::uint64_t x) {
  for (int k = 0; k < 8; ++k) b.push_back(static_cast<unsigned char>(x >> (8 * k)));
}

void put_f64(Bytes& b, double x) { put_u64(b, std::bit_cast<std::uint64_t>(x)); }

void put_matrix(Bytes& b, const Matrix& m) {
  for (double x : m.flat()) put_f64(b, x);
}

struct Reader {
  const Bytes& b;
  std::size_t off = 0;

  void need(std::size_t n) const {
    if (off + n > b.size()) throw DataError("checkpoint truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int k = 0; k < 4; ++k) x |= static_cast<std::uint32_t>(b[off + k]) << (8 * k);
    off += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int k = 0; k < 8; ++k) x |= static_cast<std::uint64_t>(b[off + k]) << (8 * k);
    off += 8;
    return x;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Matrix matrix(std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& x : m.flat()) x = f64();
    return m;
  }
};

std::uint64_t fnv1a(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t k = 0; k < n; ++k) {
    h ^= data[k];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint8_t kind_byte(const ModelParams& params) {
  switch (kind_of(params)) {
    case ModelKind::ngcn: return 0;
    case ModelKind::mf: return 1;
    case ModelKind::gcn: return 2;
  }
  throw DataError("unknown model kind");
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params) {
  Bytes b;
  b.insert(b.end(), kMagic, kMagic + 4);
  put_u32(b, kFormatVersion);
  b.push_back(kind_byte(params));

  if (const auto* p = std::get_if<NgcnParams>(&params)) {
    put_u64(b, p->n_nodes);
    put_u64(b, p->feature_dim);
    put_u64(b, p->latent_dim);
    put_u64(b, p->n_layers);
    put_f64(b, p->fusion_weight);
    put_matrix(b, p->node_features);
    put_matrix(b, p->collab_factors);
    for (const Matrix& w : p->layer_weights) put_matrix(b, w);
  } else if (const auto* p = std::get_if<MfParams>(&params)) {
    put_u64(b, p->n_nodes);
    put_u64(b, 0);
    put_u64(b, p->latent_dim);
    put_u64(b, 0);
    put_f64(b, 0.0);
    put_matrix(b, p->factors);
  } else {
    const auto& gp = std::get<GcnParams>(params);
    put_u64(b, gp.n_nodes);
    put_u64(b, gp.feature_dim);
    put_u64(b, 0);
    put_u64(b, gp.n_layers);
    put_f64(b, 0.0);
    put_matrix(b, gp.node_features);
    for (const Matrix& w : gp.layer_weights) put_matrix(b, w);
  }
  put_u64(b, fnv1a(b.data(), b.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!out) throw DataError("short write to checkpoint '" + path + "'");
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  Bytes b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (b.size() < 4 + 4 + 1 + 4 * 8 + 8 + 8) throw DataError("checkpoint truncated");
  for (int k = 0; k < 4; ++k)
    if (b[k] != static_cast<unsigned char>(kMagic[k]))
      throw DataError("not a checkpoint file (bad magic)");

  Reader tail{b, b.size() - 8};
  const std::uint64_t stored = tail.u64();
  if (fnv1a(b.data(), b.size() - 8) != stored) throw DataError("checkpoint checksum mismatch");

  Reader r{b, 4};
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  r.need(1);
  const std::uint8_t kind = b[r.off++];
  const std::uint64_t n = r.u64();
  const std::uint64_t f = r.u64();
  const std::uint64_t d = r.u64();
  const std::uint64_t layers = r.u64();
  const double fusion = r.f64();

  auto payload_doubles = [&](std::uint64_t want) {
    const std::uint64_t have = (b.size() - 8 - r.off) / 8;
    if (have != want || (b.size() - 8 - r.off) % 8 != 0)
      throw DataError("checkpoint payload size mismatch");
  };

  switch (kind) {
    case 0: {
      NgcnParams p;
      p.n_nodes = n;
      p.feature_dim = f;
      p.latent_dim = d;
      p.n_layers = layers;
      p.fusion_weight = fusion;
      payload_doubles(n * f + n * d + layers * f * f);
      p.node_features = r.matrix(n, f);
      p.collab_factors = r.matrix(n, d);
      for (std::uint64_t l = 0; l < layers; ++l) p.layer_weights.push_back(r.matrix(f, f));
      return p;
    }
    case 1: {
      MfParams p;
      p.n_nodes = n;
      p.latent_dim = d;
      payload_doubles(n * d);
      p.factors = r.matrix(n, d);
      return p;
    }
    case 2: {
      GcnParams p;
      p.n_nodes = n;
      p.feature_dim = f;
      p.n_layers = layers;
      payload_doubles(n * f + layers * f * f);
      p.node_features = r.matrix(n, f);
      for (std::uint64_t l = 0; l < layers; ++l) p.layer_weights.push_back(r.matrix(f, f));
      return p;
    }
    default:
      throw DataError("unknown model kind tag " + std::to_string(kind));
  }
}

}  // namespace ngcn
