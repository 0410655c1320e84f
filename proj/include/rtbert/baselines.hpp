#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rtbert/error.hpp"
#include "rtbert/graph.hpp"
#include "rtbert/log.hpp"
#include "rtbert/logistic.hpp"
#include "rtbert/rng.hpp"
#include "rtbert/seeding.hpp"
#include "rtbert/text.hpp"

namespace rtbert {

/// user_id -> embedding, for any embedding source.
using EmbeddingTable = std::unordered_map<std::string, std::vector<double>>;

// ---------------------------------------------------------------------------
// Label-only predictors

/// Draws each label independently from the empirical class distribution of `train`.
inline std::vector<Polarity> random_predictor(std::span<const SeedLabel> train, std::size_t n, Rng& rng) {
  if (train.empty()) throw InputError("random predictor needs a nonempty seed set");
  const auto right = std::count_if(train.begin(), train.end(), [](const SeedLabel& s) { return s.polarity == Polarity::Right; });
  const double p_right = static_cast<double>(right) / static_cast<double>(train.size());
  std::vector<Polarity> out(n);
  for (auto& p : out) p = uniform01(rng) < p_right ? Polarity::Right : Polarity::Left;
  return out;
}

/// Modal class of `train`; an even split resolves to Left.
inline Polarity majority_class(std::span<const SeedLabel> train) {
  if (train.empty()) throw InputError("majority predictor needs a nonempty seed set");
  const auto right = std::count_if(train.begin(), train.end(), [](const SeedLabel& s) { return s.polarity == Polarity::Right; });
  return 2 * static_cast<std::size_t>(right) > train.size() ? Polarity::Right : Polarity::Left;
}

inline std::vector<Polarity> majority_predictor(std::span<const SeedLabel> train, std::size_t n) {
  return std::vector<Polarity>(n, majority_class(train));
}

// ---------------------------------------------------------------------------
// Averaged external word vectors

struct ExternalVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> table;  // lowercased token -> vector
};

/// Plain-text vectors: one token per line followed by its floats. An optional
/// first line "<count> <dim>" is skipped. Tokens are lowercased; the first
/// occurrence of a token wins.
inline ExternalVectors load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ExternalVectors v;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> values;
    double x;
    while (ss >> x) values.push_back(x);
    if (!ss.eof()) throw InputError(path.string() + ":" + std::to_string(line_number) + ": bad number");
    if (line_number == 1 && values.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) continue;
    if (values.empty()) throw InputError(path.string() + ":" + std::to_string(line_number) + ": no vector values");
    if (v.dim == 0) v.dim = values.size();
    if (values.size() != v.dim) {
      throw InputError(path.string() + ":" + std::to_string(line_number) + ": expected " + std::to_string(v.dim) +
                       " values, got " + std::to_string(values.size()));
    }
    v.table.emplace(to_lower_ascii(token), std::move(values));
  }
  return v;
}

inline void save_vectors(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [token, values] : rows) {
    out << token;
    for (double x : values) out << ' ' << format_real(x, 9);
    out << '\n';
  }
}

/// Mean vector of the in-vocabulary tokens; zero vector when none are known.
inline std::vector<double> avg_embedding(std::string_view profile, const ExternalVectors& vectors) {
  std::vector<double> mean(vectors.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& tok : tokenize(profile)) {
    auto it = vectors.table.find(tok);
    if (it == vectors.table.end()) continue;
    for (std::size_t k = 0; k < vectors.dim; ++k) mean[k] += it->second[k];
    ++hits;
  }
  if (hits) {
    for (double& m : mean) m /= static_cast<double>(hits);
  }
  return mean;
}

// ---------------------------------------------------------------------------
// Label propagation

struct LabelPropOptions {
  int max_iter = 100;
  bool weighted = true;  // false counts each labeled neighbor once
};

/// Synchronous propagation on the undirected graph. Each round, every
/// unlabeled node takes the side with the larger summed edge weight among its
/// labeled neighbors; a tie or no labeled neighbor leaves it unlabeled for the
/// round. Seeds never change. Stops at a fixpoint or after max_iter rounds.
inline std::vector<std::optional<Polarity>> label_propagation(const RetweetGraph& g,
                                                              std::span<const std::pair<NodeId, Polarity>> seeds,
                                                              const LabelPropOptions& opt = {}) {
  if (seeds.empty()) throw InputError("label propagation needs at least one seed");
  std::vector<std::optional<Polarity>> label(g.node_count());
  for (const auto& [u, p] : seeds) label.at(u) = p;
  std::vector<std::optional<Polarity>> next;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    next = label;
    bool changed = false;
    for (NodeId u = 0; u < g.node_count(); ++u) {
      if (label[u]) continue;
      double left = 0, right = 0;
      for (const auto& nb : g.undirected(u)) {
        if (!label[nb.node]) continue;
        const double w = opt.weighted ? static_cast<double>(nb.weight) : 1.0;
        (*label[nb.node] == Polarity::Left ? left : right) += w;
      }
      if (left > right) next[u] = Polarity::Left;
      else if (right > left) next[u] = Polarity::Right;
      changed |= next[u].has_value();
    }
    label.swap(next);
    if (!changed) break;
  }
  return label;
}

/// Seeds given by user id; seeds outside the graph are ignored with a warning.
inline std::vector<std::optional<Polarity>> label_propagation(const RetweetGraph& g, std::span<const SeedLabel> seeds,
                                                              const LabelPropOptions& opt = {}) {
  std::vector<std::pair<NodeId, Polarity>> ids;
  std::size_t missing = 0;
  for (const auto& s : seeds) {
    if (auto id = g.find(s.user_id)) ids.emplace_back(*id, s.polarity);
    else ++missing;
  }
  if (missing) log_warn("baselines", std::to_string(missing) + " label-propagation seeds are not graph nodes");
  return label_propagation(g, ids, opt);
}

// ---------------------------------------------------------------------------
// node2vec

struct WalkConfig {
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::size_t walk_length = 20;
  std::size_t walks_per_node = 10;
  std::size_t window = 10;
  std::size_t dim = 128;
  std::size_t negative_samples = 5;
  int epochs = 1;
  double learning_rate = 0.025;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(p > 0) || !(q > 0)) throw InputError("node2vec p and q must be positive");
    if (walk_length < 1 || walks_per_node < 1 || window < 1 || dim < 1 || negative_samples < 1 || epochs < 1) {
      throw InputError("node2vec walk_length, walks_per_node, window, dim, negative_samples and epochs must be positive");
    }
    if (!(learning_rate > 0)) throw InputError("node2vec learning_rate must be positive");
  }
};

namespace detail {

inline bool adjacent(const RetweetGraph& g, NodeId a, NodeId b) { return g.undirected_weight(a, b).has_value(); }

// Unnormalized second-order weights of the moves out of `cur`.
inline void walk_weights(const RetweetGraph& g, std::optional<NodeId> prev, NodeId cur, double p, double q,
                         std::vector<double>& out) {
  const auto nbrs = g.undirected(cur);
  out.resize(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    double bias = 1.0;
    if (prev) {
      if (nbrs[i].node == *prev) bias = 1.0 / p;
      else if (!adjacent(g, *prev, nbrs[i].node)) bias = 1.0 / q;
    }
    out[i] = bias * static_cast<double>(nbrs[i].weight);
  }
}

}  // namespace detail

/// Probability of each move out of `cur` given the previous node (none on the first step).
inline std::vector<std::pair<NodeId, double>> transition_probabilities(const RetweetGraph& g, std::optional<NodeId> prev,
                                                                       NodeId cur, double p, double q) {
  std::vector<double> w;
  detail::walk_weights(g, prev, cur, p, q, w);
  double total = 0;
  for (double x : w) total += x;
  std::vector<std::pair<NodeId, double>> out;
  const auto nbrs = g.undirected(cur);
  for (std::size_t i = 0; i < nbrs.size(); ++i) out.emplace_back(nbrs[i].node, w[i] / total);
  return out;
}

/// Biased second-order walk of up to `length` nodes starting at `start`.
inline std::vector<NodeId> random_walk(const RetweetGraph& g, NodeId start, std::size_t length, double p, double q,
                                       Rng& rng) {
  std::vector<NodeId> walk{start};
  std::vector<double> w;
  std::optional<NodeId> prev;
  while (walk.size() < length) {
    const NodeId cur = walk.back();
    const auto nbrs = g.undirected(cur);
    if (nbrs.empty()) break;
    detail::walk_weights(g, prev, cur, p, q, w);
    double total = 0;
    for (double x : w) total += x;
    double r = uniform01(rng) * total;
    std::size_t pick = nbrs.size() - 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (r < w[i]) { pick = i; break; }
      r -= w[i];
    }
    prev = cur;
    walk.push_back(nbrs[pick].node);
  }
  return walk;
}

/// `walks_per_node` rounds; each round visits every non-isolated node once in shuffled order.
inline std::vector<std::vector<NodeId>> generate_walks(const RetweetGraph& g, const WalkConfig& cfg, Rng& rng) {
  std::vector<NodeId> starts;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (!g.undirected(u).empty()) starts.push_back(u);
  }
  std::vector<std::vector<NodeId>> walks;
  walks.reserve(starts.size() * cfg.walks_per_node);
  for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
    std::shuffle(starts.begin(), starts.end(), rng);
    for (NodeId s : starts) walks.push_back(random_walk(g, s, cfg.walk_length, cfg.p, cfg.q, rng));
  }
  return walks;
}

/// Skip-gram with negative sampling over node walks. Negatives come from the
/// node frequency distribution raised to 0.75; the learning rate decays
/// linearly. Returns the input vectors, `n_nodes` x dim, row-major.
inline std::vector<float> train_skipgram(const std::vector<std::vector<NodeId>>& walks, std::size_t n_nodes,
                                         const WalkConfig& cfg, Rng& rng) {
  const auto d = cfg.dim;
  std::vector<float> in(n_nodes * d), out(n_nodes * d, 0.0f);
  for (auto& v : in) v = static_cast<float>((uniform01(rng) - 0.5) / static_cast<double>(d));

  std::vector<double> freq(n_nodes, 0.0);
  std::size_t total_pairs = 0;
  for (const auto& w : walks) {
    for (NodeId u : w) freq[u] += 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto lo = i >= cfg.window ? i - cfg.window : 0;
      const auto hi = std::min(w.size() - 1, i + cfg.window);
      total_pairs += hi - lo;
    }
  }
  if (total_pairs == 0) return in;
  for (double& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<NodeId> noise(freq.begin(), freq.end());

  const double total_steps = static_cast<double>(total_pairs) * cfg.epochs;
  double done = 0;
  std::vector<float> grad_in(d);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& w : walks) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        const auto lo = i >= cfg.window ? i - cfg.window : 0;
        const auto hi = std::min(w.size() - 1, i + cfg.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const float lr = static_cast<float>(cfg.learning_rate * std::max(1e-4, 1.0 - done / total_steps));
          done += 1;
          float* center = in.data() + static_cast<std::size_t>(w[i]) * d;
          std::fill(grad_in.begin(), grad_in.end(), 0.0f);
          for (std::size_t s = 0; s <= cfg.negative_samples; ++s) {
            NodeId target;
            float label;
            if (s == 0) {
              target = w[j];
              label = 1.0f;
            } else {
              target = noise(rng);
              if (target == w[j]) continue;
              label = 0.0f;
            }
            float* ctx = out.data() + static_cast<std::size_t>(target) * d;
            float dot = 0.0f;
            for (std::size_t k = 0; k < d; ++k) dot += center[k] * ctx[k];
            const float g = (label - static_cast<float>(sigmoid(dot))) * lr;
            for (std::size_t k = 0; k < d; ++k) {
              grad_in[k] += g * ctx[k];
              ctx[k] += g * center[k];
            }
          }
          for (std::size_t k = 0; k < d; ++k) center[k] += grad_in[k];
        }
      }
    }
  }
  return in;
}

/// node2vec embeddings for every non-isolated node, keyed by user_id.
inline EmbeddingTable node2vec_embed(const RetweetGraph& g, const WalkConfig& cfg) {
  cfg.validate();
  if (g.edge_count() == 0) throw InputError("node2vec needs a graph with at least one edge");
  Rng rng(cfg.rng_seed);
  const auto walks = generate_walks(g, cfg, rng);
  const auto vecs = train_skipgram(walks, g.node_count(), cfg, rng);
  EmbeddingTable table;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (g.undirected(u).empty()) continue;
    const float* r = vecs.data() + static_cast<std::size_t>(u) * cfg.dim;
    table.emplace(g.name(u), std::vector<double>(r, r + cfg.dim));
  }
  return table;
}

// ---------------------------------------------------------------------------
// Logistic head over any embedding table

/// Fits the logistic head on the seeds present in `embeddings` (Right positive).
inline HeadParams embed_classifier(const EmbeddingTable& embeddings, std::span<const SeedLabel> seeds, double c) {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const auto& s : seeds) {
    auto it = embeddings.find(s.user_id);
    if (it == embeddings.end()) continue;
    x.push_back(it->second);
    y.push_back(s.polarity == Polarity::Right ? 1 : 0);
  }
  return fit_logistic(x, y, c);
}

/// p_right for each id; ids without an embedding get nullopt.
inline std::vector<std::optional<double>> score_embeddings(const EmbeddingTable& embeddings, const HeadParams& head,
                                                           std::span<const std::string> ids) {
  std::vector<std::optional<double>> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = embeddings.find(id);
    if (it == embeddings.end()) out.emplace_back();
    else out.emplace_back(sigmoid(head_logit(head, it->second)));
  }
  return out;
}

}  // namespace rtbert
