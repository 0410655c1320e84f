#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rtbert/error.hpp"
#include "rtbert/rng.hpp"
#include "rtbert/text.hpp"

namespace rtbert {

/// Hashed linear text encoder: embedding = projection^T * normalize(features) + bias.
/// `projection` is vocab_dim x embed_dim, row-major.
struct EncoderParams {
  std::size_t vocab_dim = 0;
  std::size_t embed_dim = 0;
  std::uint64_t token_hash_seed = 0;
  std::vector<double> projection;
  std::vector<double> bias;

  std::span<double> row(std::size_t f) { return {projection.data() + f * embed_dim, embed_dim}; }
  std::span<const double> row(std::size_t f) const { return {projection.data() + f * embed_dim, embed_dim}; }

  void validate() const {
    if (embed_dim < 2) throw InputError("embed_dim must be >= 2");
    if (vocab_dim == 0) throw InputError("vocab_dim must be positive");
    if (projection.size() != vocab_dim * embed_dim || bias.size() != embed_dim) {
      throw InputError("encoder parameter shapes do not match dims");
    }
    for (double v : projection) {
      if (!std::isfinite(v)) throw NumericError("non-finite encoder projection weight");
    }
    for (double v : bias) {
      if (!std::isfinite(v)) throw NumericError("non-finite encoder bias");
    }
  }

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

struct EncoderShape {
  std::size_t vocab_dim = std::size_t{1} << 16;
  std::size_t embed_dim = 64;
  std::uint64_t token_hash_seed = 0;
  double init_scale = 0.1;  // stddev of the Gaussian projection init
};

inline EncoderParams make_encoder(const EncoderShape& shape, std::uint64_t init_seed) {
  EncoderParams p;
  p.vocab_dim = shape.vocab_dim;
  p.embed_dim = shape.embed_dim;
  p.token_hash_seed = shape.token_hash_seed;
  p.projection.resize(p.vocab_dim * p.embed_dim);
  p.bias.assign(p.embed_dim, 0.0);
  Rng rng(init_seed);
  std::normal_distribution<double> normal(0.0, shape.init_scale);
  for (double& v : p.projection) v = normal(rng);
  p.validate();
  return p;
}

/// Sparse term counts over hashed unigram and bigram buckets, sorted by index.
struct ProfileFeatures {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

  bool empty() const { return entries.empty(); }
  friend bool operator==(const ProfileFeatures&, const ProfileFeatures&) = default;
};

inline ProfileFeatures featurize(std::string_view text, std::size_t vocab_dim, std::uint64_t seed) {
  if (vocab_dim == 0) throw InputError("vocab_dim must be positive");
  const auto tokens = tokenize(text);
  std::map<std::uint32_t, std::uint32_t> counts;
  auto bump = [&](std::string_view key) { ++counts[static_cast<std::uint32_t>(fnv1a64(key, seed) % vocab_dim)]; };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    bump(tokens[i]);
    if (i + 1 < tokens.size()) bump(tokens[i] + ' ' + tokens[i + 1]);
  }
  return {{counts.begin(), counts.end()}};
}

namespace detail {

inline double feature_norm(const ProfileFeatures& x) {
  double sq = 0.0;
  for (const auto& [_, c] : x.entries) sq += static_cast<double>(c) * c;
  return std::sqrt(sq);
}

}  // namespace detail

/// Writes the embedding of `x` into `out` (size embed_dim).
inline void encode_into(const EncoderParams& params, const ProfileFeatures& x, std::span<double> out) {
  const auto d = params.embed_dim;
  std::copy(params.bias.begin(), params.bias.end(), out.begin());
  const double norm = detail::feature_norm(x);
  for (const auto& [f, c] : x.entries) {
    if (f >= params.vocab_dim) throw InputError("feature index outside vocab_dim");
    const double scale = c / norm;
    const double* r = params.projection.data() + static_cast<std::size_t>(f) * d;
    for (std::size_t k = 0; k < d; ++k) out[k] += scale * r[k];
  }
  for (std::size_t k = 0; k < d; ++k) {
    if (!std::isfinite(out[k])) throw NumericError("non-finite encoder parameter or output");
  }
}

inline std::vector<double> encode(const EncoderParams& params, const ProfileFeatures& x) {
  std::vector<double> out(params.embed_dim);
  encode_into(params, x, out);
  return out;
}

/// Gradient of a scalar objective w.r.t. the projection rows a profile touches and the bias.
struct EncoderGradient {
  std::vector<std::pair<std::uint32_t, std::vector<double>>> rows;  // sorted by row index
  std::vector<double> bias;
};

inline EncoderGradient encode_backward(const EncoderParams& params, const ProfileFeatures& x,
                                       std::span<const double> upstream) {
  if (upstream.size() != params.embed_dim) throw InputError("upstream gradient has wrong dimension");
  EncoderGradient g;
  g.bias.assign(upstream.begin(), upstream.end());
  const double norm = detail::feature_norm(x);
  for (const auto& [f, c] : x.entries) {
    if (f >= params.vocab_dim) throw InputError("feature index outside vocab_dim");
    std::vector<double> r(params.embed_dim);
    const double scale = c / norm;
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = scale * upstream[k];
    g.rows.emplace_back(f, std::move(r));
  }
  return g;
}

/// Adds `step * d(encode)/d(params)^T upstream` to the parameters in place.
/// This is the fused form of encode_backward + update used by training.
inline void apply_encoder_gradient(EncoderParams& params, const ProfileFeatures& x, std::span<const double> upstream,
                                   double step) {
  const auto d = params.embed_dim;
  const double norm = detail::feature_norm(x);
  for (const auto& [f, c] : x.entries) {
    const double scale = step * c / norm;
    double* r = params.projection.data() + static_cast<std::size_t>(f) * d;
    for (std::size_t k = 0; k < d; ++k) r[k] += scale * upstream[k];
  }
}

// Checkpoint layout (little-endian):
//   char[8]  magic "RTBENC01"
//   u32      version (1)
//   u32      reserved (0)
//   u64      vocab_dim, embed_dim, token_hash_seed
//   f64      projection[vocab_dim * embed_dim], row-major
//   f64      bias[embed_dim]
inline constexpr char kEncoderMagic[8] = {'R', 'T', 'B', 'E', 'N', 'C', '0', '1'};
inline constexpr std::uint32_t kEncoderVersion = 1;

inline void save_encoder(const std::filesystem::path& path, const EncoderParams& p) {
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const std::uint32_t header[2] = {kEncoderVersion, 0};
  const std::uint64_t dims[3] = {p.vocab_dim, p.embed_dim, p.token_hash_seed};
  out.write(kEncoderMagic, sizeof kEncoderMagic);
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(p.projection.data()),
            static_cast<std::streamsize>(p.projection.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(p.bias.data()), static_cast<std::streamsize>(p.bias.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

inline EncoderParams load_encoder(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  std::uint32_t header[2];
  std::uint64_t dims[3];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(header), sizeof header);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || std::memcmp(magic, kEncoderMagic, sizeof magic) != 0) {
    throw IoError(path.string() + ": not an encoder checkpoint");
  }
  if (header[0] != kEncoderVersion) throw IoError(path.string() + ": unsupported checkpoint version");
  if (dims[0] == 0 || dims[1] == 0 || dims[0] > (std::uint64_t{1} << 28) || dims[1] > 4096) {
    throw IoError(path.string() + ": implausible checkpoint dims");
  }
  EncoderParams p;
  p.vocab_dim = dims[0];
  p.embed_dim = dims[1];
  p.token_hash_seed = dims[2];
  p.projection.resize(p.vocab_dim * p.embed_dim);
  p.bias.resize(p.embed_dim);
  in.read(reinterpret_cast<char*>(p.projection.data()),
          static_cast<std::streamsize>(p.projection.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(p.bias.data()), static_cast<std::streamsize>(p.bias.size() * sizeof(double)));
  if (!in) throw IoError(path.string() + ": truncated checkpoint");
  p.validate();
  return p;
}

}  // namespace rtbert
