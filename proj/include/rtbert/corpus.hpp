#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rtbert/csv.hpp"
#include "rtbert/error.hpp"
#include "rtbert/log.hpp"
#include "rtbert/text.hpp"

namespace rtbert {

struct UserRecord {
  std::string user_id;
  std::string description;
  bool verified = false;
  bool in_us = true;
  std::int64_t tweet_count = 0;
  std::optional<double> bot_score;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

/// `src` retweeted `dst` `count` times.
struct RawEdge {
  std::string src;
  std::string dst;
  std::int64_t count = 1;

  friend bool operator==(const RawEdge&, const RawEdge&) = default;
};

struct EndorsementRecord {
  std::string user_id;
  std::string media_handle;
  std::int64_t count = 1;

  friend bool operator==(const EndorsementRecord&, const EndorsementRecord&) = default;
};

namespace detail {

inline UserRecord user_from_json(const nlohmann::json& j) {
  UserRecord u;
  u.user_id = j.at("user_id").get<std::string>();
  if (u.user_id.empty()) throw InputError("empty user_id");
  u.description = j.at("description").is_null() ? std::string() : j.at("description").get<std::string>();
  u.verified = j.at("verified").get<bool>();
  u.in_us = j.at("in_us").get<bool>();
  u.tweet_count = j.at("tweet_count").get<std::int64_t>();
  if (u.tweet_count < 0) throw InputError("negative tweet_count");
  if (auto it = j.find("bot_score"); it != j.end() && !it->is_null()) {
    const double s = it->get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw InputError("bot_score outside [0,1]");
    u.bot_score = s;
  }
  return u;
}

inline std::int64_t parse_count(const std::string& s) {
  std::size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw InputError("trailing characters in count '" + s + "'");
  return v;
}

}  // namespace detail

/// Reads users.jsonl. Malformed lines are skipped with a warning naming the
/// line; a repeated user_id keeps the first record.
inline std::vector<UserRecord> load_users(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<UserRecord> users;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    UserRecord u;
    try {
      u = detail::user_from_json(nlohmann::json::parse(line));
    } catch (const std::exception& e) {
      log_warn("corpus", path.filename().string() + ":" + std::to_string(line_number) + ": skipped malformed record (" +
                             e.what() + ")");
      continue;
    }
    if (!seen.insert(u.user_id).second) {
      log_warn("corpus", path.filename().string() + ":" + std::to_string(line_number) + ": duplicate user_id '" +
                             u.user_id + "', keeping first");
      continue;
    }
    users.push_back(std::move(u));
  }
  return users;
}

inline void save_users(const std::filesystem::path& path, std::span<const UserRecord> users) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& u : users) {
    nlohmann::ordered_json j;
    j["user_id"] = u.user_id;
    j["description"] = u.description;
    j["verified"] = u.verified;
    j["in_us"] = u.in_us;
    j["tweet_count"] = u.tweet_count;
    if (u.bot_score) j["bot_score"] = *u.bot_score;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/// Reads edges.csv (src,dst,count). Self-retweets and rows with count < 1 are dropped.
inline std::vector<RawEdge> load_edges(const std::filesystem::path& path) {
  std::vector<RawEdge> edges;
  for (const auto& row : csv::read(path, {"src", "dst", "count"})) {
    const auto where = path.filename().string() + ":" + std::to_string(row.line_number);
    try {
      if (row.fields.size() != 3) throw InputError("expected 3 fields");
      RawEdge e{row.fields[0], row.fields[1], detail::parse_count(row.fields[2])};
      if (e.src.empty() || e.dst.empty()) throw InputError("empty user id");
      if (e.count < 1) throw InputError("count must be positive");
      if (e.src == e.dst) {
        log_debug("corpus", where + ": dropped self-retweet");
        continue;
      }
      edges.push_back(std::move(e));
    } catch (const std::exception& e) {
      log_warn("corpus", where + ": skipped malformed edge (" + e.what() + ")");
    }
  }
  return edges;
}

inline void save_edges(const std::filesystem::path& path, std::span<const RawEdge> edges) {
  csv::Writer w(path, {"src", "dst", "count"});
  for (const auto& e : edges) w.row({e.src, e.dst, std::to_string(e.count)});
  w.close();
}

inline std::vector<EndorsementRecord> load_endorsements(const std::filesystem::path& path) {
  std::vector<EndorsementRecord> records;
  for (const auto& row : csv::read(path, {"user_id", "media_handle", "count"})) {
    try {
      if (row.fields.size() != 3) throw InputError("expected 3 fields");
      EndorsementRecord r{row.fields[0], row.fields[1], detail::parse_count(row.fields[2])};
      if (r.count < 1) throw InputError("count must be positive");
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      log_warn("corpus", path.filename().string() + ":" + std::to_string(row.line_number) +
                             ": skipped malformed endorsement (" + e.what() + ")");
    }
  }
  return records;
}

inline void save_endorsements(const std::filesystem::path& path, std::span<const EndorsementRecord> records) {
  csv::Writer w(path, {"user_id", "media_handle", "count"});
  for (const auto& r : records) w.row({r.user_id, r.media_handle, std::to_string(r.count)});
  w.close();
}

struct PreprocessOptions {
  std::int64_t min_tweets = 2;
  double drop_bot_quantile = 0.10;
  std::int64_t min_degree = 10;
  std::int64_t min_weight = 2;
};

struct WorkingSet {
  std::vector<UserRecord> users;  // sorted by user_id
  std::vector<RawEdge> edges;     // sorted by (src, dst, count)
};

/// Bot-score cutoff that drops the top `quantile` fraction of `scores`
/// (floor(quantile * n) users). Users scoring >= the cutoff are bots.
/// Returns nullopt when nothing should be dropped.
inline std::optional<double> bot_score_cutoff(std::vector<double> scores, double quantile) {
  if (!(quantile >= 0.0 && quantile < 1.0)) throw InputError("drop_bot_quantile must be in [0,1)");
  const auto drop = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(scores.size()) + 1e-9));
  if (drop == 0) return std::nullopt;
  std::sort(scores.begin(), scores.end(), std::greater<>());
  return scores[drop - 1];
}

/// The filters behind `preprocess`, with the bot filter as an absolute
/// cutoff. This form is idempotent.
inline WorkingSet preprocess_with_cutoff(std::span<const UserRecord> users, std::span<const RawEdge> edges,
                                         const PreprocessOptions& opt, std::optional<double> bot_cutoff) {
  std::map<std::string, const UserRecord*> kept;
  std::size_t n_location = 0, n_inactive = 0, n_empty = 0, n_bot = 0;
  for (const auto& u : users) {
    if (kept.count(u.user_id)) continue;
    if (!u.in_us) { ++n_location; continue; }
    if (u.tweet_count < opt.min_tweets) { ++n_inactive; continue; }
    if (u.description.find_first_not_of(" \t\r\n") == std::string::npos) { ++n_empty; continue; }
    if (bot_cutoff && u.bot_score && *u.bot_score >= *bot_cutoff) { ++n_bot; continue; }
    kept.emplace(u.user_id, &u);
  }

  // Merge duplicate (src,dst) rows, then keep pairs heavy enough to count as graph edges.
  std::map<std::pair<std::string, std::string>, std::int64_t> merged;
  for (const auto& e : edges) {
    if (e.src == e.dst || !kept.count(e.src) || !kept.count(e.dst)) continue;
    merged[{e.src, e.dst}] += e.count;
  }

  std::set<std::string> alive;
  for (const auto& [id, _] : kept) alive.insert(id);
  std::size_t n_degree = 0;
  for (;;) {
    std::unordered_map<std::string, std::int64_t> degree;
    for (const auto& [key, w] : merged) {
      if (w < opt.min_weight || !alive.count(key.first) || !alive.count(key.second)) continue;
      ++degree[key.first];
      ++degree[key.second];
    }
    std::vector<std::string> drop;
    for (const auto& id : alive) {
      auto it = degree.find(id);
      if ((it == degree.end() ? 0 : it->second) < opt.min_degree) drop.push_back(id);
    }
    if (drop.empty()) break;
    n_degree += drop.size();
    for (const auto& id : drop) alive.erase(id);
  }

  WorkingSet out;
  for (const auto& id : alive) out.users.push_back(*kept.at(id));
  for (const auto& e : edges) {
    if (e.src != e.dst && alive.count(e.src) && alive.count(e.dst)) out.edges.push_back(e);
  }
  std::sort(out.edges.begin(), out.edges.end(), [](const RawEdge& a, const RawEdge& b) {
    return std::tie(a.src, a.dst, a.count) < std::tie(b.src, b.dst, b.count);
  });
  log_info("corpus", "preprocess: " + std::to_string(users.size()) + " users in, removed location=" +
                         std::to_string(n_location) + " inactive=" + std::to_string(n_inactive) +
                         " no_profile=" + std::to_string(n_empty) + " bot=" + std::to_string(n_bot) +
                         " low_degree=" + std::to_string(n_degree) + ", kept " + std::to_string(out.users.size()) +
                         " users / " + std::to_string(out.edges.size()) + " edge rows");
  return out;
}

/// Applies, in order: location, activity (tweet_count < min_tweets), empty
/// profile, and bot-score filters; drops edges touching removed users; then
/// removes users whose degree on weight-filtered edges is below min_degree,
/// repeating until nothing changes. The bot quantile is taken over users that
/// pass the first three filters and carry a score.
inline WorkingSet preprocess(std::span<const UserRecord> users, std::span<const RawEdge> edges,
                             const PreprocessOptions& opt = {}) {
  std::vector<double> scores;
  std::unordered_set<std::string> seen;
  for (const auto& u : users) {
    if (!seen.insert(u.user_id).second) continue;
    if (!u.in_us || u.tweet_count < opt.min_tweets) continue;
    if (u.description.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (u.bot_score) scores.push_back(*u.bot_score);
  }
  return preprocess_with_cutoff(users, edges, opt, bot_score_cutoff(std::move(scores), opt.drop_bot_quantile));
}

}  // namespace rtbert
