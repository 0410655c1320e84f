#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rtbert/analysis.hpp"
#include "rtbert/baselines.hpp"
#include "rtbert/corpus.hpp"
#include "rtbert/encoder.hpp"
#include "rtbert/error.hpp"
#include "rtbert/eval.hpp"
#include "rtbert/graph.hpp"
#include "rtbert/log.hpp"
#include "rtbert/logistic.hpp"
#include "rtbert/rng.hpp"
#include "rtbert/rtbert.hpp"
#include "rtbert/seeding.hpp"
#include "rtbert/synth.hpp"

namespace rtbert {

// ---------------------------------------------------------------------------
// Configuration

struct PathConfig {
  std::string data_dir;  // raw inputs; empty means the output directory
  std::string users = "users.jsonl";
  std::string edges = "edges.csv";
  std::string endorsements = "endorsements.csv";
  std::string vectors = "vectors.txt";  // optional
  std::string lexicon;                  // empty: built-in hashtag table
  std::string media;                    // empty: built-in outlet table
  std::string holdout;                  // optional user_id,polarity file
};

struct WalkGrid {
  std::vector<double> p{1.0};
  std::vector<double> q{1.0};
  std::vector<std::size_t> walk_length{20};
  std::vector<std::size_t> walks_per_node{10};
  std::vector<std::size_t> window{10};
  std::vector<std::size_t> dim{128};
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  bool deterministic = true;
  PathConfig paths;
  PreprocessOptions preprocess;
  SeedOptions seeding;
  EncoderShape encoder;
  TripletConfig triplet;
  WalkConfig walk;  // values not swept by walk_grid
  WalkGrid walk_grid;
  LabelPropOptions label_prop;
  std::size_t k = 5;
  std::vector<double> c_grid{1, 10, 100, 1000};
  std::string model = "retweet-bert-multneg";
  double head_c = 100.0;  // C of the head fitted by `predict`
  double partition_q = 0.2;
  std::size_t top_n = 10;
  SynthConfig synth;
};

namespace detail {

// Reads one JSON object, rejecting unknown keys and wrong types with the
// dotted field path.
class Section {
 public:
  Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const nlohmann::json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, bool& out) {
    if (auto v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected a boolean");
      out = v->get<bool>();
    }
  }

  void get(const std::string& key, std::string& out) {
    if (auto v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void get(const std::string& key, double& out) {
    if (auto v = find(key)) out = number(*v, field(key));
  }

  template <typename Int>
    requires std::is_integral_v<Int>
  void get(const std::string& key, Int& out) {
    if (auto v = find(key)) out = integer<Int>(*v, field(key));
  }

  template <typename T>
  void get(const std::string& key, std::vector<T>& out) {
    auto v = find(key);
    if (!v) return;
    if (!v->is_array() || v->empty()) throw ConfigError(field(key), "expected a non-empty array");
    std::vector<T> values;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto path = field(key) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_integral_v<T>) values.push_back(integer<T>((*v)[i], path));
      else values.push_back(number((*v)[i], path));
    }
    out = std::move(values);
  }

  std::optional<Section> sub(const std::string& key) {
    auto v = find(key);
    if (!v) return std::nullopt;
    return Section(*v, field(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  static double number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
  }

  template <typename Int>
  static Int integer(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.is_number_unsigned()) return static_cast<Int>(v.get<std::uint64_t>());
      if (v.get<std::int64_t>() < 0) throw ConfigError(path, "expected a non-negative integer");
    }
    return static_cast<Int>(v.get<std::int64_t>());
  }

  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path, what);
}

}  // namespace detail

inline std::vector<WalkConfig> expand_walk_grid(const PipelineConfig& c);

inline PipelineConfig parse_config(const nlohmann::json& j) {
  PipelineConfig c;
  detail::Section root(j, "");
  root.get("seed", c.seed);
  root.get("deterministic", c.deterministic);

  if (auto s = root.sub("paths")) {
    s->get("data_dir", c.paths.data_dir);
    s->get("users", c.paths.users);
    s->get("edges", c.paths.edges);
    s->get("endorsements", c.paths.endorsements);
    s->get("vectors", c.paths.vectors);
    s->get("lexicon", c.paths.lexicon);
    s->get("media", c.paths.media);
    s->get("holdout", c.paths.holdout);
    s->finish();
  }
  if (auto s = root.sub("preprocess")) {
    s->get("min_tweets", c.preprocess.min_tweets);
    s->get("drop_bot_quantile", c.preprocess.drop_bot_quantile);
    s->get("min_degree", c.preprocess.min_degree);
    s->get("min_weight", c.preprocess.min_weight);
    detail::require(c.preprocess.drop_bot_quantile >= 0 && c.preprocess.drop_bot_quantile < 1,
                    "preprocess.drop_bot_quantile", "must be in [0,1)");
    detail::require(c.preprocess.min_weight >= 1, "preprocess.min_weight", "must be >= 1");
    s->finish();
  }
  if (auto s = root.sub("seeding")) {
    s->get("min_endorsements", c.seeding.min_endorsements);
    std::string mode = c.seeding.media_mean == MediaMean::CountWeighted ? "count-weighted" : "per-outlet";
    s->get("media_mean", mode);
    if (mode == "count-weighted") c.seeding.media_mean = MediaMean::CountWeighted;
    else if (mode == "per-outlet") c.seeding.media_mean = MediaMean::PerOutlet;
    else throw ConfigError("seeding.media_mean", "expected \"count-weighted\" or \"per-outlet\"");
    s->finish();
  }
  if (auto s = root.sub("encoder")) {
    s->get("vocab_dim", c.encoder.vocab_dim);
    s->get("embed_dim", c.encoder.embed_dim);
    s->get("token_hash_seed", c.encoder.token_hash_seed);
    s->get("init_scale", c.encoder.init_scale);
    detail::require(c.encoder.vocab_dim >= 1, "encoder.vocab_dim", "must be positive");
    detail::require(c.encoder.embed_dim >= 2, "encoder.embed_dim", "must be >= 2");
    s->finish();
  }
  if (auto s = root.sub("triplet")) {
    s->get("margin", c.triplet.margin);
    std::string sampling(to_string(c.triplet.sampling));
    s->get("sampling", sampling);
    try {
      c.triplet.sampling = parse_sampling(sampling);
    } catch (const InputError& e) {
      throw ConfigError("triplet.sampling", e.what());
    }
    s->get("batch_size", c.triplet.batch_size);
    s->get("epochs", c.triplet.epochs);
    s->get("learning_rate", c.triplet.learning_rate);
    try {
      c.triplet.validate();
    } catch (const InputError& e) {
      throw ConfigError("triplet", e.what());
    }
    s->finish();
  }
  if (auto s = root.sub("walk")) {
    s->get("negative_samples", c.walk.negative_samples);
    s->get("epochs", c.walk.epochs);
    s->get("learning_rate", c.walk.learning_rate);
    if (auto g = s->sub("grid")) {
      g->get("p", c.walk_grid.p);
      g->get("q", c.walk_grid.q);
      g->get("walk_length", c.walk_grid.walk_length);
      g->get("walks_per_node", c.walk_grid.walks_per_node);
      g->get("window", c.walk_grid.window);
      g->get("dim", c.walk_grid.dim);
      for (double v : c.walk_grid.p) detail::require(v > 0, "walk.grid.p", "values must be positive");
      for (double v : c.walk_grid.q) detail::require(v > 0, "walk.grid.q", "values must be positive");
      g->finish();
    }
    for (const auto& w : expand_walk_grid(c)) {
      try {
        w.validate();
      } catch (const InputError& e) {
        throw ConfigError("walk", e.what());
      }
    }
    s->finish();
  }
  if (auto s = root.sub("eval")) {
    s->get("k", c.k);
    s->get("c_grid", c.c_grid);
    s->get("model", c.model);
    detail::require(c.k >= 1, "eval.k", "must be >= 1");
    for (double v : c.c_grid) detail::require(v > 0, "eval.c_grid", "values must be positive");
    try {
      parse_model_id(c.model);
    } catch (const LookupError& e) {
      throw ConfigError("eval.model", e.what());
    }
    if (auto lp = s->sub("label_prop")) {
      lp->get("max_iter", c.label_prop.max_iter);
      lp->get("weighted", c.label_prop.weighted);
      lp->finish();
    }
    s->finish();
  }
  if (auto s = root.sub("predict")) {
    s->get("c", c.head_c);
    detail::require(c.head_c > 0, "predict.c", "must be positive");
    s->finish();
  }
  if (auto s = root.sub("analysis")) {
    s->get("q", c.partition_q);
    s->get("top_n", c.top_n);
    detail::require(c.partition_q > 0 && c.partition_q < 0.5, "analysis.q", "must be in (0,0.5)");
    s->finish();
  }
  if (auto s = root.sub("synth")) {
    auto& y = c.synth;
    s->get("n_left", y.n_left);
    s->get("n_right", y.n_right);
    s->get("p_in_left", y.p_in_left);
    s->get("p_in_right", y.p_in_right);
    s->get("p_out", y.p_out);
    s->get("vocab_size", y.vocab_size);
    s->get("min_tokens", y.min_tokens);
    s->get("max_tokens", y.max_tokens);
    s->get("keyword_mix", y.keyword_mix);
    s->get("seed_fraction", y.seed_fraction);
    s->get("vector_dim", y.vector_dim);
    s->get("noise_rate", y.noise_rate);
    s->get("weak_edge_rate", y.weak_edge_rate);
    try {
      y.validate();
    } catch (const InputError& e) {
      throw ConfigError("synth", e.what());
    }
    s->finish();
  }
  root.finish();
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing input file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

/// Canonical form of every setting, including defaults.
inline nlohmann::ordered_json config_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["deterministic"] = c.deterministic;
  j["paths"] = {{"data_dir", c.paths.data_dir}, {"users", c.paths.users}, {"edges", c.paths.edges},
                {"endorsements", c.paths.endorsements}, {"vectors", c.paths.vectors}, {"lexicon", c.paths.lexicon},
                {"media", c.paths.media}, {"holdout", c.paths.holdout}};
  j["preprocess"] = {{"min_tweets", c.preprocess.min_tweets}, {"drop_bot_quantile", c.preprocess.drop_bot_quantile},
                     {"min_degree", c.preprocess.min_degree}, {"min_weight", c.preprocess.min_weight}};
  j["seeding"] = {{"min_endorsements", c.seeding.min_endorsements},
                  {"media_mean", c.seeding.media_mean == MediaMean::CountWeighted ? "count-weighted" : "per-outlet"}};
  j["encoder"] = {{"vocab_dim", c.encoder.vocab_dim}, {"embed_dim", c.encoder.embed_dim},
                  {"token_hash_seed", c.encoder.token_hash_seed}, {"init_scale", c.encoder.init_scale}};
  j["triplet"] = {{"margin", c.triplet.margin}, {"sampling", std::string(to_string(c.triplet.sampling))},
                  {"batch_size", c.triplet.batch_size}, {"epochs", c.triplet.epochs},
                  {"learning_rate", c.triplet.learning_rate}};
  const auto& g = c.walk_grid;
  j["walk"] = {{"negative_samples", c.walk.negative_samples}, {"epochs", c.walk.epochs},
               {"learning_rate", c.walk.learning_rate},
               {"grid", {{"p", g.p}, {"q", g.q}, {"walk_length", g.walk_length}, {"walks_per_node", g.walks_per_node},
                         {"window", g.window}, {"dim", g.dim}}}};
  j["eval"] = {{"k", c.k}, {"c_grid", c.c_grid}, {"model", c.model},
               {"label_prop", {{"max_iter", c.label_prop.max_iter}, {"weighted", c.label_prop.weighted}}}};
  j["predict"] = {{"c", c.head_c}};
  j["analysis"] = {{"q", c.partition_q}, {"top_n", c.top_n}};
  const auto& y = c.synth;
  j["synth"] = {{"n_left", y.n_left}, {"n_right", y.n_right}, {"p_in_left", y.p_in_left},
                {"p_in_right", y.p_in_right}, {"p_out", y.p_out}, {"vocab_size", y.vocab_size},
                {"min_tokens", y.min_tokens}, {"max_tokens", y.max_tokens}, {"keyword_mix", y.keyword_mix},
                {"seed_fraction", y.seed_fraction}, {"vector_dim", y.vector_dim}, {"noise_rate", y.noise_rate},
                {"weak_edge_rate", y.weak_edge_rate}};
  return j;
}

/// 16 hex digits of FNV-1a over the canonical config dump.
inline std::string config_hash(const PipelineConfig& c) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(config_json(c).dump());
  return os.str();
}

/// Cartesian product of the walk grid over the fixed walk settings; the
/// walk rng seed comes from the master seed.
inline std::vector<WalkConfig> expand_walk_grid(const PipelineConfig& c) {
  std::vector<WalkConfig> out;
  const auto& g = c.walk_grid;
  for (double p : g.p)
    for (double q : g.q)
      for (auto l : g.walk_length)
        for (auto r : g.walks_per_node)
          for (auto k : g.window)
            for (auto d : g.dim) {
              WalkConfig w = c.walk;
              w.p = p;
              w.q = q;
              w.walk_length = l;
              w.walks_per_node = r;
              w.window = k;
              w.dim = d;
              w.rng_seed = derive_seed(c.seed, "node2vec");
              out.push_back(w);
            }
  return out;
}

/// Cross-validation settings with every stage seed derived from the master seed.
inline CvConfig cv_config(const PipelineConfig& c) {
  CvConfig cv;
  cv.k = c.k;
  cv.rng_seed = derive_seed(c.seed, "eval");
  cv.c_grid = c.c_grid;
  cv.encoder = c.encoder;
  cv.encoder_init_seed = derive_seed(c.seed, "encoder-init");
  cv.triplet = c.triplet;
  cv.triplet.rng_seed = derive_seed(c.seed, "train");
  cv.walk_grid = expand_walk_grid(c);
  cv.label_prop = c.label_prop;
  return cv;
}

// ---------------------------------------------------------------------------
// Stages. Each reads and writes fixed file names under `out_dir`; raw
// inputs come from paths.data_dir.

namespace files {
inline constexpr const char* users = "users.filtered.jsonl";
inline constexpr const char* edges = "edges.filtered.csv";
inline constexpr const char* endorsements = "endorsements.filtered.csv";
inline constexpr const char* graph = "graph.csv";
inline constexpr const char* seeds = "seeds.csv";
inline constexpr const char* seed_summary = "seed_summary.json";
inline constexpr const char* encoder = "encoder.bin";
inline constexpr const char* train_log = "train.json";
inline constexpr const char* metrics = "metrics.json";
inline constexpr const char* head = "head.json";
inline constexpr const char* scores = "scores.csv";
inline constexpr const char* report_json = "report.json";
inline constexpr const char* report_csv = "report.csv";
inline constexpr const char* partition = "partition.csv";
}  // namespace files

class Pipeline {
 public:
  Pipeline(PipelineConfig cfg, std::filesystem::path out_dir) : cfg_(std::move(cfg)), out_(std::move(out_dir)) {}

  const PipelineConfig& config() const { return cfg_; }
  const std::filesystem::path& out_dir() const { return out_; }

  std::filesystem::path data_path(const std::string& name) const {
    const std::filesystem::path dir = cfg_.paths.data_dir.empty() ? out_ : std::filesystem::path(cfg_.paths.data_dir);
    return dir / name;
  }

  void synth() {
    auto sc = cfg_.synth;
    sc.rng_seed = derive_seed(cfg_.seed, "synth");
    const auto corpus = generate_synthetic(sc);
    write_synthetic(out_, corpus);
    log_info("synth", "wrote " + std::to_string(corpus.users.size()) + " users and " +
                          std::to_string(corpus.edges.size()) + " edge rows to " + out_.string());
  }

  void ingest() {
    const auto users = load_users(require_file(data_path(cfg_.paths.users)));
    const auto edges = load_edges(require_file(data_path(cfg_.paths.edges)));
    const auto ws = preprocess(users, edges, cfg_.preprocess);
    prepare_out();
    save_users(out_ / files::users, ws.users);
    save_edges(out_ / files::edges, ws.edges);

    const auto endorse_path = data_path(cfg_.paths.endorsements);
    std::vector<EndorsementRecord> kept;
    if (std::filesystem::exists(endorse_path)) {
      std::unordered_set<std::string> ids;
      for (const auto& u : ws.users) ids.insert(u.user_id);
      for (auto& e : load_endorsements(endorse_path)) {
        if (ids.count(e.user_id)) kept.push_back(std::move(e));
      }
    } else {
      log_warn("ingest", "no endorsement file at " + endorse_path.string() + "; media seeding disabled");
    }
    save_endorsements(out_ / files::endorsements, kept);
    log_info("ingest", std::to_string(users.size()) + " users in, " + std::to_string(ws.users.size()) + " kept; " +
                           std::to_string(ws.edges.size()) + " edge rows kept");
  }

  void build_graph_stage() {
    const auto users = load_users(require_file(out_ / files::users));
    const auto edges = load_edges(require_file(out_ / files::edges));
    const auto g = build_graph(edges, cfg_.preprocess.min_weight, user_ids(users));
    save_graph_csv(out_ / files::graph, g);
    const auto st = degree_stats(g);
    log_info("build-graph", "nodes=" + std::to_string(st.node_count) + " edges=" + std::to_string(st.edge_count) +
                                " mean_total_degree=" + format_real(st.mean_total_degree, 6));
  }

  void seed() {
    const auto users = load_users(require_file(out_ / files::users));
    const auto endorsements = load_endorsements(require_file(out_ / files::endorsements));
    const auto lex = cfg_.paths.lexicon.empty() ? default_lexicon()
                                                : load_lexicon(require_file(data_path(cfg_.paths.lexicon)));
    const auto media = cfg_.paths.media.empty() ? default_media_table()
                                                : load_media_table(require_file(data_path(cfg_.paths.media)));
    const auto r = generate_seeds(users, endorsements, lex, media, cfg_.seeding);
    save_seeds(out_ / files::seeds, r.seeds);
    const auto& s = r.summary;
    nlohmann::ordered_json j{{"n_hashtag", s.n_hashtag}, {"n_media", s.n_media},     {"n_overlap", s.n_overlap},
                             {"n_conflict", s.n_conflict}, {"n_seeds", s.n_seeds},   {"n_left", s.n_left},
                             {"n_right", s.n_right},       {"left_fraction", s.left_fraction}};
    write_json(out_ / files::seed_summary, j);
    log_info("seed", "seeds=" + std::to_string(s.n_seeds) + " left=" + std::to_string(s.n_left) +
                         " right=" + std::to_string(s.n_right) + " conflicts=" + std::to_string(s.n_conflict));
  }

  void train() {
    const auto users = load_users(require_file(out_ / files::users));
    const auto g = load_graph(users);
    auto tc = cfg_.triplet;
    tc.rng_seed = derive_seed(cfg_.seed, "train");
    const auto init = make_encoder(cfg_.encoder, derive_seed(cfg_.seed, "encoder-init"));
    const auto r = train_unsupervised(g, users, init, tc);
    save_encoder(out_ / files::encoder, r.params);
    write_json(out_ / files::train_log, {{"sampling", std::string(to_string(tc.sampling))},
                                         {"epoch_loss", r.epoch_loss},
                                         {"skipped_pairs", r.skipped_pairs}});
  }

  /// Cross-validates `model` (config default when empty); with a holdout
  /// file, also scores it using all seeds for training.
  CvResult evaluate(std::string model = {}, std::string holdout = {}) {
    if (model.empty()) model = cfg_.model;
    if (holdout.empty()) holdout = cfg_.paths.holdout;
    const auto data = dataset(model);
    const auto cv = cv_config(cfg_);
    const auto r = cross_validate(model, data, cv);
    auto j = metrics_json(r, config_hash(cfg_));
    if (!holdout.empty()) {
      const std::filesystem::path hp(holdout);
      const auto path = require_file(hp.is_absolute() ? hp : data_path(holdout));
      const auto labels = holdout_labels(load_truth(path), data);
      const auto h = evaluate_holdout(model, data, cv, labels);
      auto hj = report_json(h.metrics);
      hj["n_excluded"] = h.n_excluded;
      j["holdout"] = hj;
    }
    write_json(out_ / files::metrics, j);
    return r;
  }

  void predict() {
    const auto users = load_users(require_file(out_ / files::users));
    const auto seeds = load_seeds(require_file(out_ / files::seeds));
    const auto params = load_encoder(require_file(out_ / files::encoder));
    const auto head = fit_head(params, users, seeds, cfg_.head_c);
    save_head(out_ / files::head, head);
    std::vector<PolarityScore> scores;
    scores.reserve(users.size());
    for (const auto& u : users) scores.push_back(rtbert::predict(params, head, u));
    save_scores(out_ / files::scores, scores);
    log_info("predict", "scored " + std::to_string(scores.size()) + " users");
  }

  EchoReport analyze() {
    const auto users = load_users(require_file(out_ / files::users));
    const auto g = load_graph(users);
    const auto scores = load_scores(require_file(out_ / files::scores));
    const auto rep = echo_report(g, scores, cfg_.partition_q, cfg_.top_n);
    write_json(out_ / files::report_json, echo_report_json(rep));
    save_echo_csv(out_ / files::report_csv, rep);
    save_partition(out_ / files::partition, partition(scores, cfg_.partition_q));
    return rep;
  }

  void run_all() {
    ingest();
    build_graph_stage();
    seed();
    train();
    evaluate();
    predict();
    analyze();
  }

 private:
  static std::filesystem::path require_file(const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) throw IoError("missing input file: " + p.string());
    return p;
  }

  static std::vector<std::string> user_ids(std::span<const UserRecord> users) {
    std::vector<std::string> ids;
    ids.reserve(users.size());
    for (const auto& u : users) ids.push_back(u.user_id);
    return ids;
  }

  static void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
  }

  void prepare_out() const { std::filesystem::create_directories(out_); }

  RetweetGraph load_graph(std::span<const UserRecord> users) const {
    return load_graph_csv(require_file(out_ / files::graph), 1, user_ids(users));
  }


  Dataset dataset(const std::string& model) const {
    const auto id = parse_model_id(model);
    Dataset d;
    d.users = load_users(require_file(out_ / files::users));
    d.graph = load_graph(d.users);
    d.seeds = load_seeds(require_file(out_ / files::seeds));
    if (id == ModelId::AvgVectors) d.vectors = load_vectors(require_file(data_path(cfg_.paths.vectors)));
    // Reuse the trained encoder when its sampling matches the model.
    const auto enc = out_ / files::encoder;
    if ((id == ModelId::RetweetBertOneNeg || id == ModelId::RetweetBertMultNeg) && std::filesystem::exists(enc)) {
      const auto sampling = id == ModelId::RetweetBertOneNeg ? Sampling::OneNeg : Sampling::MultNeg;
      if (sampling == cfg_.triplet.sampling) d.encoders.emplace(sampling, load_encoder(enc));
    }
    return d;
  }

  // Holdout users must be in the working set and must not be seeds.
  static std::vector<SeedLabel> holdout_labels(const std::vector<SeedLabel>& all, const Dataset& data) {
    std::unordered_set<std::string> seeds, users;
    for (const auto& s : data.seeds) seeds.insert(s.user_id);
    for (const auto& u : data.users) users.insert(u.user_id);
    std::vector<SeedLabel> out;
    for (const auto& s : all) {
      if (users.count(s.user_id) && !seeds.count(s.user_id)) out.push_back(s);
    }
    if (out.empty()) throw InputError("holdout file has no non-seed users from the working set");
    log_info("evaluate", "holdout users=" + std::to_string(out.size()) + " (of " + std::to_string(all.size()) + ")");
    return out;
  }

  PipelineConfig cfg_;
  std::filesystem::path out_;
};

}  // namespace rtbert
