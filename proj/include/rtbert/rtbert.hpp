#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rtbert/corpus.hpp"
#include "rtbert/encoder.hpp"
#include "rtbert/error.hpp"
#include "rtbert/graph.hpp"
#include "rtbert/log.hpp"
#include "rtbert/logistic.hpp"
#include "rtbert/rng.hpp"
#include "rtbert/seeding.hpp"

namespace rtbert {

enum class Sampling { OneNeg, MultNeg };

inline std::string_view to_string(Sampling s) { return s == Sampling::OneNeg ? "one-neg" : "mult-neg"; }

inline Sampling parse_sampling(std::string_view s) {
  if (s == "one-neg" || s == "oneneg") return Sampling::OneNeg;
  if (s == "mult-neg" || s == "multneg") return Sampling::MultNeg;
  throw InputError("unknown sampling '" + std::string(s) + "'");
}

struct TripletConfig {
  double margin = 1.0;
  Sampling sampling = Sampling::MultNeg;
  std::size_t batch_size = 32;
  int epochs = 1;
  double learning_rate = 4.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(margin > 0)) throw InputError("triplet margin must be positive");
    if (batch_size < 1) throw InputError("batch_size must be positive");
    if (sampling == Sampling::MultNeg && batch_size < 2) throw InputError("mult-neg sampling needs batch_size >= 2");
    if (epochs < 0) throw InputError("epochs must be nonnegative");
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) throw InputError("learning_rate must be positive");
  }
};

namespace detail {

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    sq += t * t;
  }
  return std::sqrt(sq);
}

inline void check_same_dim(std::span<const double> a, std::span<const double> b, std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size()) throw InputError("triplet vectors differ in dimension");
}

}  // namespace detail

/// max(|a - p| - |a - n| + margin, 0) with Euclidean distances.
inline double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                           std::span<const double> negative, double margin) {
  detail::check_same_dim(anchor, positive, negative);
  return std::max(detail::euclidean(anchor, positive) - detail::euclidean(anchor, negative) + margin, 0.0);
}

struct TripletGradient {
  double loss = 0.0;
  std::vector<double> anchor, positive, negative;
};

/// Loss and its gradient. At the hinge (slack <= 0) and where a distance is
/// exactly zero the corresponding subgradient is taken as 0.
inline TripletGradient triplet_loss_grad(std::span<const double> anchor, std::span<const double> positive,
                                         std::span<const double> negative, double margin) {
  detail::check_same_dim(anchor, positive, negative);
  const auto d = anchor.size();
  TripletGradient g{0.0, std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const double dp = detail::euclidean(anchor, positive);
  const double dn = detail::euclidean(anchor, negative);
  const double slack = dp - dn + margin;
  if (slack <= 0) return g;
  g.loss = slack;
  for (std::size_t k = 0; k < d; ++k) {
    const double up = dp > 0 ? (anchor[k] - positive[k]) / dp : 0.0;
    const double un = dn > 0 ? (anchor[k] - negative[k]) / dn : 0.0;
    g.anchor[k] = up - un;
    g.positive[k] = -up;
    g.negative[k] = un;
  }
  return g;
}

struct Triplet {
  NodeId anchor;
  NodeId positive;
  std::vector<NodeId> negatives;
};

/// Builds triplets for a batch of positive (anchor, positive) pairs.
/// OneNeg draws one node uniformly among those that are neither endpoint nor
/// an undirected neighbor of the anchor; pairs with no such node are skipped.
/// MultNeg uses the positives of every other pair in the batch.
inline std::vector<Triplet> sample_triplets(const RetweetGraph& g, std::span<const std::pair<NodeId, NodeId>> batch,
                                            Sampling sampling, Rng& rng) {
  std::vector<Triplet> out;
  out.reserve(batch.size());
  if (sampling == Sampling::MultNeg) {
    for (std::size_t t = 0; t < batch.size(); ++t) {
      Triplet tr{batch[t].first, batch[t].second, {}};
      tr.negatives.reserve(batch.size() - 1);
      for (std::size_t u = 0; u < batch.size(); ++u) {
        if (u != t) tr.negatives.push_back(batch[u].second);
      }
      out.push_back(std::move(tr));
    }
    return out;
  }

  const auto n = g.node_count();
  auto valid = [&](NodeId i, NodeId j, NodeId k) { return k != i && k != j && !g.undirected_weight(i, k); };
  for (const auto& [i, j] : batch) {
    std::optional<NodeId> pick;
    for (int attempt = 0; attempt < 64 && !pick; ++attempt) {
      const auto k = static_cast<NodeId>(uniform_index(rng, n));
      if (valid(i, j, k)) pick = k;
    }
    if (!pick) {
      std::vector<NodeId> candidates;
      for (NodeId k = 0; k < n; ++k) {
        if (valid(i, j, k)) candidates.push_back(k);
      }
      if (candidates.empty()) {
        log_warn("rtbert", "no valid negative for pair (" + g.name(i) + ", " + g.name(j) + "), skipped");
        continue;
      }
      pick = candidates[uniform_index(rng, candidates.size())];
    }
    out.push_back({i, j, {*pick}});
  }
  return out;
}

struct TrainResult {
  EncoderParams params;
  std::vector<double> epoch_loss;  // mean triplet loss per epoch
  std::size_t skipped_pairs = 0;
};

/// Profile features for every node of `g`, in node order. Every node must have a profile.
inline std::vector<ProfileFeatures> node_features(const RetweetGraph& g, std::span<const UserRecord> users,
                                                  const EncoderParams& params) {
  std::unordered_map<std::string_view, const UserRecord*> by_id;
  for (const auto& u : users) by_id.emplace(u.user_id, &u);
  std::vector<ProfileFeatures> features;
  features.reserve(g.node_count());
  for (const auto& name : g.nodes()) {
    auto it = by_id.find(name);
    if (it == by_id.end()) throw InputError("graph node '" + name + "' has no profile");
    features.push_back(featurize(it->second->description, params.vocab_dim, params.token_hash_seed));
  }
  return features;
}

/// Unsupervised Siamese training over undirected retweet edges. Each epoch
/// visits every undirected edge once in shuffled order (anchor side chosen by
/// a coin flip) and takes one SGD step per batch on the mean triplet loss.
/// The run is a pure function of its inputs.
inline TrainResult train_unsupervised(const RetweetGraph& g, std::span<const ProfileFeatures> features,
                                      EncoderParams params, const TripletConfig& cfg) {
  cfg.validate();
  params.validate();
  if (features.size() != g.node_count()) throw InputError("one feature vector per node required");
  TrainResult result;
  auto pairs = g.undirected_edges();
  if (pairs.empty()) {
    result.params = std::move(params);
    return result;
  }

  Rng rng(cfg.rng_seed);
  const auto d = params.embed_dim;
  std::vector<NodeId> local_nodes;
  std::unordered_map<NodeId, std::size_t> local_index;
  std::vector<double> emb, grad;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(pairs.begin(), pairs.end(), rng);
    for (auto& p : pairs) {
      if (rng() & 1) std::swap(p.first, p.second);
    }
    double epoch_sum = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t start = 0; start < pairs.size(); start += cfg.batch_size) {
      const auto stop = std::min(pairs.size(), start + cfg.batch_size);
      const std::span<const std::pair<NodeId, NodeId>> batch(pairs.data() + start, stop - start);
      const auto triplets = sample_triplets(g, batch, cfg.sampling, rng);
      result.skipped_pairs += batch.size() - triplets.size();

      local_nodes.clear();
      local_index.clear();
      auto slot = [&](NodeId u) {
        auto [it, fresh] = local_index.emplace(u, local_nodes.size());
        if (fresh) local_nodes.push_back(u);
        return it->second;
      };
      for (const auto& t : triplets) {
        slot(t.anchor);
        slot(t.positive);
        for (NodeId k : t.negatives) slot(k);
      }
      emb.assign(local_nodes.size() * d, 0.0);
      grad.assign(local_nodes.size() * d, 0.0);
      for (std::size_t s = 0; s < local_nodes.size(); ++s) {
        encode_into(params, features[local_nodes[s]], {emb.data() + s * d, d});
      }
      auto view = [&](std::size_t s) { return std::span<const double>(emb.data() + s * d, d); };

      double batch_sum = 0.0;
      std::size_t batch_count = 0;
      for (const auto& t : triplets) {
        const auto a = local_index.at(t.anchor), p = local_index.at(t.positive);
        for (NodeId kn : t.negatives) {
          const auto k = local_index.at(kn);
          auto tg = triplet_loss_grad(view(a), view(p), view(k), cfg.margin);
          batch_sum += tg.loss;
          ++batch_count;
          if (tg.loss == 0.0) continue;
          for (std::size_t c = 0; c < d; ++c) {
            grad[a * d + c] += tg.anchor[c];
            grad[p * d + c] += tg.positive[c];
            grad[k * d + c] += tg.negative[c];
          }
        }
      }
      if (batch_count == 0) continue;
      if (!std::isfinite(batch_sum)) {
        throw NumericError("non-finite triplet loss in epoch " + std::to_string(epoch + 1) +
                           " (learning_rate " + format_real(cfg.learning_rate, 6) + " is likely too high)");
      }
      epoch_sum += batch_sum;
      epoch_count += batch_count;

      const double step = -cfg.learning_rate / static_cast<double>(batch_count);
      for (std::size_t s = 0; s < local_nodes.size(); ++s) {
        const std::span<const double> up(grad.data() + s * d, d);
        apply_encoder_gradient(params, features[local_nodes[s]], up, step);
        for (std::size_t c = 0; c < d; ++c) params.bias[c] += step * up[c];
      }
    }
    const double mean = epoch_count ? epoch_sum / static_cast<double>(epoch_count) : 0.0;
    result.epoch_loss.push_back(mean);
    log_info("rtbert", "epoch " + std::to_string(epoch + 1) + "/" + std::to_string(cfg.epochs) + " sampling=" +
                           std::string(to_string(cfg.sampling)) + " triplets=" + std::to_string(epoch_count) +
                           " mean_loss=" + format_real(mean, 6));
  }
  for (double v : params.bias) {
    if (!std::isfinite(v)) throw NumericError("training produced non-finite parameters");
  }
  result.params = std::move(params);
  return result;
}

inline TrainResult train_unsupervised(const RetweetGraph& g, std::span<const UserRecord> users, EncoderParams params,
                                      const TripletConfig& cfg) {
  const auto features = node_features(g, users, params);
  return train_unsupervised(g, features, std::move(params), cfg);
}

inline std::vector<double> embed_profile(const EncoderParams& params, std::string_view description) {
  return encode(params, featurize(description, params.vocab_dim, params.token_hash_seed));
}

/// Fits the logistic head on frozen embeddings of the seed users (Right is
/// the positive class). `params` is only read.
inline HeadParams fit_head(const EncoderParams& params, std::span<const UserRecord> users,
                           std::span<const SeedLabel> seeds, double c) {
  std::unordered_map<std::string_view, const UserRecord*> by_id;
  for (const auto& u : users) by_id.emplace(u.user_id, &u);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const auto& s : seeds) {
    auto it = by_id.find(s.user_id);
    if (it == by_id.end()) throw InputError("seed '" + s.user_id + "' has no profile");
    x.push_back(embed_profile(params, it->second->description));
    y.push_back(s.polarity == Polarity::Right ? 1 : 0);
  }
  return fit_logistic(x, y, c);
}

struct PolarityScore {
  std::string user_id;
  double p_right = 0.5;

  /// Hard label; exactly 0.5 maps to Left.
  Polarity label() const { return p_right > 0.5 ? Polarity::Right : Polarity::Left; }
  friend bool operator==(const PolarityScore&, const PolarityScore&) = default;
};

inline PolarityScore predict(const EncoderParams& params, const HeadParams& head, const UserRecord& user) {
  return {user.user_id, sigmoid(head_logit(head, embed_profile(params, user.description)))};
}

inline void save_scores(const std::filesystem::path& path, std::span<const PolarityScore> scores) {
  csv::Writer w(path, {"user_id", "p_right"});
  for (const auto& s : scores) w.row({s.user_id, format_real(s.p_right)});
  w.close();
}

inline std::vector<PolarityScore> load_scores(const std::filesystem::path& path) {
  std::vector<PolarityScore> scores;
  for (const auto& row : csv::read(path, {"user_id", "p_right"})) {
    if (row.fields.size() != 2) throw InputError(path.string() + ":" + std::to_string(row.line_number) + ": expected 2 fields");
    const double p = std::stod(row.fields[1]);
    if (!(p >= 0.0 && p <= 1.0)) throw InputError(path.string() + ":" + std::to_string(row.line_number) + ": p_right outside [0,1]");
    scores.push_back({row.fields[0], p});
  }
  return scores;
}

}  // namespace rtbert
