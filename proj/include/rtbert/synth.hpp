#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rtbert/baselines.hpp"
#include "rtbert/corpus.hpp"
#include "rtbert/csv.hpp"
#include "rtbert/error.hpp"
#include "rtbert/rng.hpp"
#include "rtbert/seeding.hpp"

namespace rtbert {

/// Two-community planted corpus. Directed edges follow a stochastic block
/// model (p_in_left, p_in_right inside communities, p_out across). Profiles
/// draw each token from the user's own community vocabulary with probability
/// keyword_mix and from the other community's otherwise.
struct SynthConfig {
  std::size_t n_left = 1500;
  std::size_t n_right = 500;
  double p_in_left = 0.010;
  double p_in_right = 0.020;
  double p_out = 0.001;
  std::size_t vocab_size = 200;  // words per community
  std::size_t min_tokens = 8;
  std::size_t max_tokens = 16;
  double keyword_mix = 0.8;
  double seed_fraction = 0.3;
  std::size_t vector_dim = 32;     // external vector file dimension
  double noise_rate = 0.02;        // share of users failing each preprocessing filter
  double weak_edge_rate = 0.0005;  // within-community single-retweet rows
  std::uint64_t rng_seed = 0;

  void validate() const {
    for (double p : {p_in_left, p_in_right, p_out, keyword_mix, seed_fraction, noise_rate, weak_edge_rate}) {
      if (!(p >= 0.0 && p <= 1.0)) throw InputError("synthetic probabilities and fractions must be in [0,1]");
    }
    if (n_left + n_right < 2) throw InputError("synthetic corpus needs at least two users");
    if (vocab_size < 1 || min_tokens < 1 || max_tokens < min_tokens || vector_dim < 1) {
      throw InputError("synthetic vocabulary and profile lengths must be positive with min_tokens <= max_tokens");
    }
  }
};

struct SynthCorpus {
  std::vector<UserRecord> users;
  std::vector<RawEdge> edges;
  std::vector<EndorsementRecord> endorsements;
  std::vector<std::pair<std::string, Polarity>> truth;  // planted community per user
  std::vector<std::pair<std::string, std::vector<double>>> vectors;
};

namespace detail {

inline std::string pseudo_word(char prefix, std::size_t index) {
  static constexpr const char* syllables[] = {"ka", "lo", "mi", "ne", "ru", "ta", "vo", "zi",
                                              "be", "do", "fa", "gu", "hi", "jo", "pe", "su"};
  std::string w(1, prefix);
  do {
    w += syllables[index % 16];
    index /= 16;
  } while (index);
  return w;
}

}  // namespace detail

inline SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);
  const std::size_t n = cfg.n_left + cfg.n_right;
  SynthCorpus out;

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  const int width = static_cast<int>(std::to_string(n).size());
  auto user_id = [&](std::size_t i) {
    auto s = std::to_string(perm[i]);
    return "u" + std::string(static_cast<std::size_t>(width) - s.size(), '0') + s;
  };
  auto side = [&](std::size_t i) { return i < cfg.n_left ? Polarity::Left : Polarity::Right; };

  std::array<std::vector<std::string>, 2> vocab;
  for (std::size_t w = 0; w < cfg.vocab_size; ++w) {
    vocab[0].push_back(detail::pseudo_word('l', w));
    vocab[1].push_back(detail::pseudo_word('r', w));
  }

  const std::array<std::vector<std::string>, 2> tags = {
      std::vector<std::string>{"Resist", "FBR", "TheResistance", "Resistance", "Biden2020", "VoteBlue",
                               "VoteBlueNoMatterWho", "Bernie2020", "BlueWave", "BackTheBlue", "NotMyPresident",
                               "NeverTrump", "Resister", "VoteBlue2020", "ImpeachTrump", "BlueWave2020", "YangGang"},
      std::vector<std::string>{"MAGA", "KAG", "Trump2020", "WWG1WGA", "QAnon", "Trump", "KAG2020", "Conservative",
                               "BuildTheWall", "AmericaFirst", "TheGreatAwakening", "TrumpTrain"}};
  std::array<std::vector<std::string>, 2> partisan_media;
  std::vector<std::string> center_media, all_media;
  const auto media = default_media_table();
  for (const auto& o : media.outlets()) {
    all_media.push_back(o.handle);
    if (o.rating <= 2) partisan_media[0].push_back(o.handle);
    else if (o.rating >= 4) partisan_media[1].push_back(o.handle);
    else center_media.push_back(o.handle);
  }
  auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[uniform_index(rng, v.size())]; };
  std::geometric_distribution<int> extra(0.5);
  std::uniform_int_distribution<std::size_t> length(cfg.min_tokens, cfg.max_tokens);

  // Profiles and activity metadata.
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(side(i));
    UserRecord u;
    u.user_id = user_id(i);
    const auto len = length(rng);
    for (std::size_t t = 0; t < len; ++t) {
      const int from = uniform01(rng) < cfg.keyword_mix ? c : 1 - c;
      if (t) u.description += ' ';
      u.description += pick(vocab[from]);
    }
    u.verified = uniform01(rng) < 0.08;
    u.in_us = !(uniform01(rng) < cfg.noise_rate);
    u.tweet_count = uniform01(rng) < cfg.noise_rate ? 1 : 2 + extra(rng) * 3;
    if (uniform01(rng) < cfg.noise_rate / 2) u.description.clear();
    if (uniform01(rng) >= 0.05) u.bot_score = uniform01(rng);
    out.users.push_back(std::move(u));
    out.truth.emplace_back(user_id(i), side(i));
  }

  // Pseudo-labelable users: a seed_fraction of each community carries a
  // partisan hashtag, partisan media endorsements, or both.
  std::vector<char> is_seed(n, 0);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<int>(side(i)) == c) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto k = static_cast<std::size_t>(std::llround(cfg.seed_fraction * static_cast<double>(members.size())));
    for (std::size_t s = 0; s < k; ++s) {
      const auto i = members[s];
      is_seed[i] = 1;
      const double kind = uniform01(rng);
      if (kind < 0.55) {
        auto& d = out.users[i].description;
        d += (d.empty() ? "#" : " #") + pick(tags[c]);
      }
      if (kind >= 0.45) {
        std::int64_t total = 0;
        while (total < 2) {
          const std::int64_t cnt = 1 + extra(rng) % 2;
          out.endorsements.push_back({out.users[i].user_id, pick(partisan_media[c]), cnt});
          total += cnt;
        }
      }
    }
  }
  // Endorsements that never label anyone: single mentions, or centrist outlets only.
  for (std::size_t i = 0; i < n; ++i) {
    if (is_seed[i]) continue;
    const double r = uniform01(rng);
    if (r < 0.15) {
      out.endorsements.push_back({out.users[i].user_id, pick(all_media), 1});
    } else if (r < 0.25) {
      out.endorsements.push_back({out.users[i].user_id, pick(center_media), 2 + extra(rng)});
    }
  }

  // Retweets.
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      const bool same = side(u) == side(v);
      const double p = same ? (side(u) == Polarity::Left ? cfg.p_in_left : cfg.p_in_right) : cfg.p_out;
      if (uniform01(rng) < p) out.edges.push_back({user_id(u), user_id(v), 2 + extra(rng)});
      if (same && uniform01(rng) < cfg.weak_edge_rate) out.edges.push_back({user_id(u), user_id(v), 1});
    }
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < 2; ++c) {
    for (const auto& w : vocab[c]) {
      std::vector<double> v(cfg.vector_dim);
      for (double& x : v) x = normal(rng);
      out.vectors.emplace_back(w, std::move(v));
    }
  }
  return out;
}

inline void save_truth(const std::filesystem::path& path, const std::vector<std::pair<std::string, Polarity>>& truth) {
  csv::Writer w(path, {"user_id", "polarity"});
  for (const auto& [id, p] : truth) w.row({id, std::string(to_string(p))});
  w.close();
}

inline std::vector<SeedLabel> load_truth(const std::filesystem::path& path) {
  std::vector<SeedLabel> labels;
  for (const auto& row : csv::read(path, {"user_id", "polarity"})) {
    if (row.fields.size() != 2) throw InputError(path.string() + ":" + std::to_string(row.line_number) + ": expected 2 fields");
    labels.push_back({row.fields[0], parse_polarity(row.fields[1]), SeedSource::Hashtag});
  }
  return labels;
}

/// Writes users.jsonl, edges.csv, endorsements.csv, truth.csv, vectors.txt,
/// lexicon.csv and media.csv into `dir`.
inline void write_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  save_users(dir / "users.jsonl", corpus.users);
  save_edges(dir / "edges.csv", corpus.edges);
  save_endorsements(dir / "endorsements.csv", corpus.endorsements);
  save_truth(dir / "truth.csv", corpus.truth);
  save_vectors(dir / "vectors.txt", corpus.vectors);
  save_lexicon(dir / "lexicon.csv", default_lexicon());
  save_media_table(dir / "media.csv", default_media_table());
}

}  // namespace rtbert
