#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rtbert/baselines.hpp"
#include "rtbert/corpus.hpp"
#include "rtbert/encoder.hpp"
#include "rtbert/error.hpp"
#include "rtbert/graph.hpp"
#include "rtbert/log.hpp"
#include "rtbert/rng.hpp"
#include "rtbert/rtbert.hpp"
#include "rtbert/seeding.hpp"

namespace rtbert {

// ---------------------------------------------------------------------------
// Folds

struct FoldPlan {
  std::vector<std::vector<std::string>> folds;  // user ids
  std::uint64_t rng_seed = 0;
};

/// Shuffles each class (after sorting by user_id, so input order does not
/// matter) and deals it round-robin over the folds. The dealing position
/// carries over from Left to Right so fold sizes differ by at most one.
inline FoldPlan stratified_kfold(std::span<const SeedLabel> seeds, std::size_t k, std::uint64_t rng_seed) {
  if (k < 1) throw InputError("k must be >= 1");
  std::array<std::vector<std::string>, 2> by_class;
  for (const auto& s : seeds) by_class[static_cast<int>(s.polarity)].push_back(s.user_id);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw InputError("class " + std::string(to_string(static_cast<Polarity>(c))) + " has " +
                       std::to_string(by_class[c].size()) + " seeds, fewer than k=" + std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.rng_seed = rng_seed;
  plan.folds.assign(k, {});
  Rng rng(rng_seed);
  std::size_t next = 0;
  for (auto& ids : by_class) {
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    for (auto& id : ids) {
      plan.folds[next].push_back(std::move(id));
      next = (next + 1) % k;
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Metrics

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricReport {
  double accuracy = 0.0;
  std::optional<double> auc;  // absent when only one class is present
  double macro_f1 = 0.0;
  std::array<ClassMetrics, 2> per_class{};  // indexed by Polarity
  std::size_t n = 0;
};

/// Mann-Whitney AUC with Right as the positive class; tied scores count 1/2.
inline std::optional<double> roc_auc(std::span<const Polarity> y_true, std::span<const double> y_score) {
  const auto n = y_true.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y_score[a] < y_score[b]; });
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y_score[order[j]] == y_score[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (y_true[order[t]] == Polarity::Right) {
        rank_sum_pos += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const auto n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

/// Accuracy and per-class F1 at `threshold` (score > threshold predicts
/// Right) plus rank AUC. A class whose precision or recall is 0/0 gets F1 0.
inline MetricReport compute_metrics(std::span<const Polarity> y_true, std::span<const double> y_score,
                                    double threshold = 0.5) {
  if (y_true.size() != y_score.size()) throw InputError("labels and scores differ in length");
  if (y_true.empty()) throw InputError("cannot compute metrics on an empty set");
  MetricReport r;
  r.n = y_true.size();
  std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true][pred]
  for (std::size_t i = 0; i < r.n; ++i) {
    const int pred = y_score[i] > threshold ? 1 : 0;
    ++confusion[static_cast<int>(y_true[i])][pred];
  }
  r.accuracy = static_cast<double>(confusion[0][0] + confusion[1][1]) / static_cast<double>(r.n);
  for (int c = 0; c < 2; ++c) {
    const auto tp = confusion[c][c];
    const auto predicted = confusion[0][c] + confusion[1][c];
    const auto actual = confusion[c][0] + confusion[c][1];
    auto& m = r.per_class[c];
    m.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    m.recall = actual ? static_cast<double>(tp) / static_cast<double>(actual) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  r.macro_f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);
  r.auc = roc_auc(y_true, y_score);
  return r;
}

/// Componentwise mean; AUC averages over the reports that have one.
inline MetricReport mean_report(std::span<const MetricReport> reports) {
  MetricReport m;
  if (reports.empty()) return m;
  double auc_sum = 0.0;
  std::size_t auc_n = 0;
  for (const auto& r : reports) {
    m.accuracy += r.accuracy;
    m.macro_f1 += r.macro_f1;
    m.n += r.n;
    for (int c = 0; c < 2; ++c) {
      m.per_class[c].precision += r.per_class[c].precision;
      m.per_class[c].recall += r.per_class[c].recall;
      m.per_class[c].f1 += r.per_class[c].f1;
    }
    if (r.auc) {
      auc_sum += *r.auc;
      ++auc_n;
    }
  }
  const double k = static_cast<double>(reports.size());
  m.accuracy /= k;
  m.macro_f1 /= k;
  for (auto& c : m.per_class) {
    c.precision /= k;
    c.recall /= k;
    c.f1 /= k;
  }
  if (auc_n) m.auc = auc_sum / static_cast<double>(auc_n);
  return m;
}

// ---------------------------------------------------------------------------
// Models and cross-validation

enum class ModelId { RetweetBertOneNeg, RetweetBertMultNeg, AvgVectors, Node2Vec, LabelProp, Random, Majority };

inline const std::vector<std::pair<std::string, ModelId>>& model_registry() {
  static const std::vector<std::pair<std::string, ModelId>> registry = {
      {"retweet-bert-oneneg", ModelId::RetweetBertOneNeg},
      {"retweet-bert-multneg", ModelId::RetweetBertMultNeg},
      {"avg-vectors", ModelId::AvgVectors},
      {"node2vec", ModelId::Node2Vec},
      {"label-prop", ModelId::LabelProp},
      {"random", ModelId::Random},
      {"majority", ModelId::Majority},
  };
  return registry;
}

inline ModelId parse_model_id(std::string_view name) {
  for (const auto& [n, id] : model_registry()) {
    if (n == name) return id;
  }
  throw LookupError("unknown model '" + std::string(name) + "'");
}

inline const std::string& model_name(ModelId id) {
  for (const auto& [n, m] : model_registry()) {
    if (m == id) return n;
  }
  throw LookupError("unregistered model id");
}

/// Everything a model may consume. `encoders` optionally supplies already
/// trained encoders per sampling scheme; missing ones are trained on demand.
struct Dataset {
  std::vector<UserRecord> users;
  RetweetGraph graph;
  std::vector<SeedLabel> seeds;
  std::optional<ExternalVectors> vectors;
  std::map<Sampling, EncoderParams> encoders;
};

struct CvConfig {
  std::size_t k = 5;
  std::uint64_t rng_seed = 0;
  std::vector<double> c_grid{1, 10, 100, 1000};
  EncoderShape encoder;
  std::uint64_t encoder_init_seed = 0;
  TripletConfig triplet;
  std::vector<WalkConfig> walk_grid{WalkConfig{}};
  LabelPropOptions label_prop;
};

struct FoldResult {
  MetricReport metrics;
  std::size_t n_excluded = 0;  // test seeds the model could not score
};

struct CvResult {
  std::string model;
  std::vector<FoldResult> folds;
  MetricReport mean;
  nlohmann::ordered_json selected = nlohmann::ordered_json::object();  // chosen hyperparameters
  std::size_t n_excluded = 0;
};

/// Trains (or reuses) the Siamese encoder for `sampling` on the full graph.
inline EncoderParams unsupervised_encoder(const Dataset& data, const CvConfig& cfg, Sampling sampling) {
  if (auto it = data.encoders.find(sampling); it != data.encoders.end()) return it->second;
  auto triplet = cfg.triplet;
  triplet.sampling = sampling;
  return train_unsupervised(data.graph, data.users, make_encoder(cfg.encoder, cfg.encoder_init_seed), triplet).params;
}

inline EmbeddingTable profile_embeddings(const EncoderParams& params, std::span<const UserRecord> users) {
  EmbeddingTable t;
  for (const auto& u : users) t.emplace(u.user_id, embed_profile(params, u.description));
  return t;
}

inline EmbeddingTable vector_embeddings(const ExternalVectors& vectors, std::span<const UserRecord> users) {
  EmbeddingTable t;
  for (const auto& u : users) t.emplace(u.user_id, avg_embedding(u.description, vectors));
  return t;
}

namespace detail {

// Scores test ids from a training seed set; nullopt marks an unscorable id.
using Scorer = std::function<std::vector<std::optional<double>>(std::span<const SeedLabel> train,
                                                                 std::span<const std::string> test, std::uint64_t salt)>;

struct Candidate {
  nlohmann::ordered_json params;
  Scorer score;
};

inline nlohmann::ordered_json walk_json(const WalkConfig& w) {
  return {{"p", w.p}, {"q", w.q}, {"l", w.walk_length}, {"r", w.walks_per_node}, {"k", w.window}, {"d", w.dim}};
}

inline void add_embedding_candidates(std::vector<Candidate>& out, std::shared_ptr<const EmbeddingTable> table,
                                     const nlohmann::ordered_json& base, std::span<const double> c_grid) {
  for (double c : c_grid) {
    auto params = base;
    params["C"] = c;
    out.push_back({params, [table, c](std::span<const SeedLabel> train, std::span<const std::string> test, std::uint64_t) {
                     return score_embeddings(*table, embed_classifier(*table, train, c), test);
                   }});
  }
}

inline std::vector<Candidate> make_candidates(ModelId model, const Dataset& data, const CvConfig& cfg) {
  std::vector<Candidate> out;
  switch (model) {
    case ModelId::RetweetBertOneNeg:
    case ModelId::RetweetBertMultNeg: {
      const auto sampling = model == ModelId::RetweetBertOneNeg ? Sampling::OneNeg : Sampling::MultNeg;
      auto table = std::make_shared<const EmbeddingTable>(
          profile_embeddings(unsupervised_encoder(data, cfg, sampling), data.users));
      add_embedding_candidates(out, table, nlohmann::ordered_json::object(), cfg.c_grid);
      break;
    }
    case ModelId::AvgVectors: {
      if (!data.vectors) throw InputError("avg-vectors needs an external vector file");
      auto table = std::make_shared<const EmbeddingTable>(vector_embeddings(*data.vectors, data.users));
      add_embedding_candidates(out, table, nlohmann::ordered_json::object(), cfg.c_grid);
      break;
    }
    case ModelId::Node2Vec:
      for (const auto& w : cfg.walk_grid) {
        auto table = std::make_shared<const EmbeddingTable>(node2vec_embed(data.graph, w));
        add_embedding_candidates(out, table, walk_json(w), cfg.c_grid);
      }
      break;
    case ModelId::LabelProp: {
      const auto* g = &data.graph;
      const auto opt = cfg.label_prop;
      out.push_back({{{"weighted", opt.weighted}, {"max_iter", opt.max_iter}},
                     [g, opt](std::span<const SeedLabel> train, std::span<const std::string> test, std::uint64_t) {
                       const auto labels = label_propagation(*g, train, opt);
                       std::vector<std::optional<double>> scores;
                       for (const auto& id : test) {
                         auto node = g->find(id);
                         if (!node || !labels[*node]) scores.emplace_back();
                         else scores.emplace_back(*labels[*node] == Polarity::Right ? 1.0 : 0.0);
                       }
                       return scores;
                     }});
      break;
    }
    case ModelId::Random: {
      const auto seed = cfg.rng_seed;
      out.push_back({nlohmann::ordered_json::object(),
                     [seed](std::span<const SeedLabel> train, std::span<const std::string> test, std::uint64_t salt) {
                       Rng rng(splitmix64(seed ^ splitmix64(salt + 1)));
                       std::vector<std::optional<double>> scores;
                       for (auto p : random_predictor(train, test.size(), rng)) scores.emplace_back(p == Polarity::Right ? 1.0 : 0.0);
                       return scores;
                     }});
      break;
    }
    case ModelId::Majority:
      out.push_back({nlohmann::ordered_json::object(),
                     [](std::span<const SeedLabel> train, std::span<const std::string> test, std::uint64_t) {
                       const double s = majority_class(train) == Polarity::Right ? 1.0 : 0.0;
                       return std::vector<std::optional<double>>(test.size(), s);
                     }});
      break;
  }
  return out;
}

inline FoldResult score_fold(const Candidate& cand, std::span<const SeedLabel> train, std::span<const SeedLabel> test,
                             std::uint64_t salt) {
  std::vector<std::string> ids;
  for (const auto& s : test) ids.push_back(s.user_id);
  const auto scores = cand.score(train, ids, salt);
  std::vector<Polarity> y;
  std::vector<double> s;
  FoldResult fr;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!scores[i]) {
      ++fr.n_excluded;
      continue;
    }
    y.push_back(test[i].polarity);
    s.push_back(*scores[i]);
  }
  if (y.empty()) throw InputError("model could not score any test seed");
  fr.metrics = compute_metrics(y, s);
  return fr;
}

}  // namespace detail

/// Stratified k-fold evaluation of a registered model on the seed users.
/// Unsupervised phases see the full graph once; only the supervised part is
/// refit per fold. When the model has a hyperparameter grid, the setting with
/// the best mean macro-F1 is reported (the first one wins ties).
inline CvResult cross_validate(std::string_view model_id, const Dataset& data, const CvConfig& cfg) {
  const auto model = parse_model_id(model_id);
  const auto plan = stratified_kfold(data.seeds, cfg.k, cfg.rng_seed);
  std::unordered_map<std::string, const SeedLabel*> by_id;
  for (const auto& s : data.seeds) by_id.emplace(s.user_id, &s);

  std::vector<std::vector<SeedLabel>> fold_seeds(plan.folds.size());
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    for (const auto& id : plan.folds[f]) fold_seeds[f].push_back(*by_id.at(id));
  }

  const auto candidates = detail::make_candidates(model, data, cfg);
  CvResult best;
  double best_f1 = -1.0;
  for (const auto& cand : candidates) {
    CvResult r;
    r.model = std::string(model_id);
    r.selected = cand.params;
    for (std::size_t f = 0; f < fold_seeds.size(); ++f) {
      std::vector<SeedLabel> train;
      for (std::size_t g = 0; g < fold_seeds.size(); ++g) {
        if (g != f || fold_seeds.size() == 1) train.insert(train.end(), fold_seeds[g].begin(), fold_seeds[g].end());
      }
      r.folds.push_back(detail::score_fold(cand, train, fold_seeds[f], f));
      r.n_excluded += r.folds.back().n_excluded;
    }
    std::vector<MetricReport> reports;
    for (const auto& fr : r.folds) reports.push_back(fr.metrics);
    r.mean = mean_report(reports);
    log_debug("eval", r.model + " " + cand.params.dump() + " macro_f1=" + format_real(r.mean.macro_f1, 6));
    if (r.mean.macro_f1 > best_f1) {
      best_f1 = r.mean.macro_f1;
      best = std::move(r);
    }
  }
  log_info("eval", best.model + " selected " + best.selected.dump() + " mean macro_f1=" +
                       format_real(best.mean.macro_f1, 6) + " acc=" + format_real(best.mean.accuracy, 6) +
                       (best.n_excluded ? " excluded=" + std::to_string(best.n_excluded) : ""));
  return best;
}

/// Fits `model` on all seeds with the hyperparameters cross-validation picks
/// and scores a separately labeled held-out set. Users the model cannot
/// score (e.g. unreachable from any seed) are excluded and counted.
inline FoldResult evaluate_holdout(std::string_view model_id, const Dataset& data, const CvConfig& cfg,
                                   std::span<const SeedLabel> holdout) {
  const auto chosen = cross_validate(model_id, data, cfg);
  const auto candidates = detail::make_candidates(parse_model_id(model_id), data, cfg);
  for (const auto& cand : candidates) {
    if (cand.params == chosen.selected) return detail::score_fold(cand, data.seeds, holdout, cfg.k);
  }
  throw LookupError("selected hyperparameters not found among candidates");
}

inline nlohmann::ordered_json report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["acc"] = r.accuracy;
  j["auc"] = r.auc ? nlohmann::ordered_json(*r.auc) : nlohmann::ordered_json(nullptr);
  j["f1"] = r.macro_f1;
  j["n"] = r.n;
  for (int c = 0; c < 2; ++c) {
    const auto& m = r.per_class[c];
    j[std::string(to_string(static_cast<Polarity>(c)))] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
  }
  return j;
}

/// metrics.json body: {model, folds:[...], mean:{...}, selected, n_excluded, config_hash}.
inline nlohmann::ordered_json metrics_json(const CvResult& r, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : r.folds) {
    auto fj = report_json(f.metrics);
    fj["n_excluded"] = f.n_excluded;
    j["folds"].push_back(fj);
  }
  j["mean"] = report_json(r.mean);
  j["selected"] = r.selected;
  j["n_excluded"] = r.n_excluded;
  j["config_hash"] = config_hash;
  return j;
}

}  // namespace rtbert
