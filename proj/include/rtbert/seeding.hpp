#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rtbert/corpus.hpp"
#include "rtbert/csv.hpp"
#include "rtbert/error.hpp"
#include "rtbert/text.hpp"

namespace rtbert {

enum class Polarity : std::uint8_t { Left = 0, Right = 1 };
enum class SeedSource : std::uint8_t { Hashtag, Media, Both };

inline std::string_view to_string(Polarity p) { return p == Polarity::Left ? "left" : "right"; }

inline std::string_view to_string(SeedSource s) {
  switch (s) {
    case SeedSource::Hashtag: return "hashtag";
    case SeedSource::Media: return "media";
    case SeedSource::Both: return "both";
  }
  return "?";
}

inline Polarity parse_polarity(std::string_view s) {
  const auto l = to_lower_ascii(s);
  if (l == "left") return Polarity::Left;
  if (l == "right") return Polarity::Right;
  throw InputError("unknown polarity '" + std::string(s) + "'");
}

inline SeedSource parse_seed_source(std::string_view s) {
  const auto l = to_lower_ascii(s);
  if (l == "hashtag") return SeedSource::Hashtag;
  if (l == "media") return SeedSource::Media;
  if (l == "both") return SeedSource::Both;
  throw InputError("unknown seed source '" + std::string(s) + "'");
}

/// Case-insensitive hashtag sets, stored lowercased without '#'.
class HashtagLexicon {
 public:
  HashtagLexicon() = default;

  void add(std::string_view hashtag, Polarity side) {
    auto tag = to_lower_ascii(hashtag);
    if (!tag.empty() && tag.front() == '#') tag.erase(0, 1);
    if (tag.empty()) throw InputError("empty hashtag");
    auto& mine = side == Polarity::Left ? left_ : right_;
    const auto& other = side == Polarity::Left ? right_ : left_;
    if (other.count(tag)) throw InputError("hashtag '" + tag + "' listed on both sides");
    mine.insert(std::move(tag));
  }

  std::optional<Polarity> side_of(std::string_view lowered_tag) const {
    const std::string key(lowered_tag);
    if (left_.count(key)) return Polarity::Left;
    if (right_.count(key)) return Polarity::Right;
    return std::nullopt;
  }

  const std::unordered_set<std::string>& left() const { return left_; }
  const std::unordered_set<std::string>& right() const { return right_; }

 private:
  std::unordered_set<std::string> left_, right_;
};

struct MediaOutlet {
  std::string handle;  // as published, e.g. "@FoxNews"
  std::string url;
  int rating = 3;      // 1 (left) .. 5 (right)
};

/// Media bias ratings keyed by normalized handle (lowercase, no '@', no spaces, no '*').
class MediaTable {
 public:
  static std::string normalize(std::string_view handle) {
    std::string out;
    for (char c : handle) {
      if (c == '@' || c == '*' || c == ' ' || c == '\t') continue;
      out.push_back(c);
    }
    return to_lower_ascii(out);
  }

  void add(MediaOutlet outlet) {
    if (outlet.rating < 1 || outlet.rating > 5) throw InputError("media rating must be an integer in [1,5]");
    auto key = normalize(outlet.handle);
    if (key.empty()) throw InputError("empty media handle");
    index_[key] = outlets_.size();
    outlets_.push_back(std::move(outlet));
  }

  std::optional<int> rating(std::string_view handle) const {
    auto it = index_.find(normalize(handle));
    if (it == index_.end()) return std::nullopt;
    return outlets_[it->second].rating;
  }

  std::span<const MediaOutlet> outlets() const { return outlets_; }
  std::size_t size() const { return outlets_.size(); }

 private:
  std::vector<MediaOutlet> outlets_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// The 17 left-leaning and 12 right-leaning profile hashtags.
inline HashtagLexicon default_lexicon() {
  HashtagLexicon lex;
  for (const char* t : {"Resist", "FBR", "TheResistance", "Resistance", "Biden2020", "VoteBlue",
                        "VoteBlueNoMatterWho", "Bernie2020", "BlueWave", "BackTheBlue", "NotMyPresident",
                        "NeverTrump", "Resister", "VoteBlue2020", "ImpeachTrump", "BlueWave2020", "YangGang"}) {
    lex.add(t, Polarity::Left);
  }
  for (const char* t : {"MAGA", "KAG", "Trump2020", "WWG1WGA", "QAnon", "Trump", "KAG2020", "Conservative",
                        "BuildTheWall", "AmericaFirst", "TheGreatAwakening", "TrumpTrain"}) {
    lex.add(t, Polarity::Right);
  }
  return lex;
}

/// The 29 outlets with their 1-5 bias ratings.
inline MediaTable default_media_table() {
  MediaTable t;
  const std::vector<MediaOutlet> rows = {
      {"@ABC", "abcnews.go.com", 2},          {"@BBCWorld", "bbc.com", 3},
      {"@BreitbartNews", "breitbart.com", 5}, {"@BostonGlobe", "bostonglobe.com", 2},
      {"@businessinsider", "businessinsider.com", 3}, {"@BuzzFeedNews", "buzzfeednews.com", 1},
      {"@CBSNews", "cbsnews.com", 2},         {"@chicagotribune", "chicagotribune.com", 3},
      {"@CNBC", "cnbc.com", 3},               {"@CNN", "cnn.com", 2},
      {"@DailyCaller", "dailycaller.com", 5}, {"@DailyMail", "dailymail.co.uk", 5},
      {"@FoxNews", "foxnews.com", 4},         {"@HuffPost", "huffpost.com", 1},
      {"InfoWars", "infowars.com", 5},        {"@latimes", "latimes.com", 2},
      {"@MSNBC", "msnbc.com", 1},             {"@NBCNews", "nbcnews.com", 2},
      {"@nytimes", "nytimes.com", 2},         {"@NPR", "npr.org", 3},
      {"@OANN", "oann.com", 4},               {"@PBS", "pbs.org", 3},
      {"@Reuters", "reuters.com", 3},         {"@guardian", "theguardian.com", 2},
      {"@USATODAY", "usatoday.com", 3},       {"@YahooNews", "yahoo.com", 2},
      {"@VICE", "vice.com", 1},               {"@washingtonpost", "washingtonpost.com", 2},
      {"@WSJ", "wsj.com", 3},
  };
  for (const auto& r : rows) t.add(r);
  return t;
}

inline HashtagLexicon load_lexicon(const std::filesystem::path& path) {
  HashtagLexicon lex;
  for (const auto& row : csv::read(path, {"hashtag", "side"})) {
    if (row.fields.size() != 2) {
      throw InputError(path.string() + ":" + std::to_string(row.line_number) + ": expected 2 fields");
    }
    lex.add(row.fields[0], parse_polarity(row.fields[1]));
  }
  return lex;
}

inline void save_lexicon(const std::filesystem::path& path, const HashtagLexicon& lex) {
  csv::Writer w(path, {"hashtag", "side"});
  for (Polarity side : {Polarity::Left, Polarity::Right}) {
    const auto& set = side == Polarity::Left ? lex.left() : lex.right();
    std::vector<std::string> tags(set.begin(), set.end());
    std::sort(tags.begin(), tags.end());
    for (const auto& t : tags) w.row({t, std::string(to_string(side))});
  }
  w.close();
}

inline MediaTable load_media_table(const std::filesystem::path& path) {
  MediaTable t;
  for (const auto& row : csv::read(path, {"handle", "url", "rating"})) {
    const auto where = path.string() + ":" + std::to_string(row.line_number);
    if (row.fields.size() != 3) throw InputError(where + ": expected 3 fields");
    std::size_t pos = 0;
    int rating = 0;
    try {
      rating = std::stoi(row.fields[2], &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != row.fields[2].size()) throw InputError(where + ": rating must be an integer");
    t.add({row.fields[0], row.fields[1], rating});
  }
  return t;
}

inline void save_media_table(const std::filesystem::path& path, const MediaTable& t) {
  csv::Writer w(path, {"handle", "url", "rating"});
  for (const auto& o : t.outlets()) w.row({o.handle, o.url, std::to_string(o.rating)});
  w.close();
}

/// Majority side among lexicon hashtags in the profile; ties (including none) give nullopt.
inline std::optional<Polarity> hashtag_label(std::string_view description, const HashtagLexicon& lex) {
  int left = 0, right = 0;
  for (const auto& tag : extract_hashtags(description)) {
    if (auto side = lex.side_of(tag)) (*side == Polarity::Left ? left : right) += 1;
  }
  if (left > right) return Polarity::Left;
  if (right > left) return Polarity::Right;
  return std::nullopt;
}

enum class MediaMean { CountWeighted, PerOutlet };

/// Mean bias rating of the outlets a user endorsed, or nullopt when the user
/// has fewer than `min_endorsements` endorsements of known outlets. Unknown
/// handles are ignored. CountWeighted weights each outlet by its endorsement
/// count; PerOutlet averages distinct outlets equally.
inline std::optional<double> media_score(std::span<const EndorsementRecord> endorsements, const MediaTable& media,
                                         std::int64_t min_endorsements = 2,
                                         MediaMean mode = MediaMean::CountWeighted) {
  std::map<std::string, std::pair<int, std::int64_t>> per_outlet;  // key -> (rating, count)
  std::int64_t total = 0;
  for (const auto& e : endorsements) {
    auto rating = media.rating(e.media_handle);
    if (!rating) continue;
    auto& slot = per_outlet[MediaTable::normalize(e.media_handle)];
    slot.first = *rating;
    slot.second += e.count;
    total += e.count;
  }
  if (total < min_endorsements || per_outlet.empty()) return std::nullopt;
  double num = 0.0, den = 0.0;
  for (const auto& [_, rc] : per_outlet) {
    const double w = mode == MediaMean::CountWeighted ? static_cast<double>(rc.second) : 1.0;
    num += w * rc.first;
    den += w;
  }
  return num / den;
}

/// <= 2 is Left, >= 4 is Right, anything between is unlabeled.
inline std::optional<Polarity> media_label(double score) {
  if (score <= 2.0) return Polarity::Left;
  if (score >= 4.0) return Polarity::Right;
  return std::nullopt;
}

struct SeedDecision {
  Polarity polarity;
  SeedSource source;

  friend bool operator==(const SeedDecision&, const SeedDecision&) = default;
};

/// Merges the two rules. On disagreement the hashtag rule wins.
inline std::optional<SeedDecision> combine(std::optional<Polarity> hashtag, std::optional<Polarity> media) {
  if (hashtag && media) {
    if (*hashtag == *media) return SeedDecision{*hashtag, SeedSource::Both};
    return SeedDecision{*hashtag, SeedSource::Hashtag};
  }
  if (hashtag) return SeedDecision{*hashtag, SeedSource::Hashtag};
  if (media) return SeedDecision{*media, SeedSource::Media};
  return std::nullopt;
}

struct SeedLabel {
  std::string user_id;
  Polarity polarity;
  SeedSource source;

  friend bool operator==(const SeedLabel&, const SeedLabel&) = default;
};

struct SeedSummary {
  std::size_t n_hashtag = 0;   // users the hashtag rule labels
  std::size_t n_media = 0;     // users the media rule labels
  std::size_t n_overlap = 0;   // users both rules label
  std::size_t n_conflict = 0;  // overlap users where the rules disagree
  std::size_t n_seeds = 0;
  std::size_t n_left = 0;
  std::size_t n_right = 0;
  double left_fraction = 0.0;
};

struct SeedOptions {
  std::int64_t min_endorsements = 2;
  MediaMean media_mean = MediaMean::CountWeighted;
};

struct SeedResult {
  std::vector<SeedLabel> seeds;  // sorted by user_id
  SeedSummary summary;
};

inline SeedResult generate_seeds(std::span<const UserRecord> users, std::span<const EndorsementRecord> endorsements,
                                 const HashtagLexicon& lex, const MediaTable& media, const SeedOptions& opt = {}) {
  std::unordered_map<std::string, std::vector<EndorsementRecord>> by_user;
  for (const auto& e : endorsements) by_user[e.user_id].push_back(e);

  SeedResult result;
  auto& s = result.summary;
  for (const auto& u : users) {
    const auto tag_side = hashtag_label(u.description, lex);
    std::optional<Polarity> media_side;
    if (auto it = by_user.find(u.user_id); it != by_user.end()) {
      if (auto score = media_score(it->second, media, opt.min_endorsements, opt.media_mean)) {
        media_side = media_label(*score);
      }
    }
    s.n_hashtag += tag_side.has_value();
    s.n_media += media_side.has_value();
    if (tag_side && media_side) {
      ++s.n_overlap;
      s.n_conflict += (*tag_side != *media_side);
    }
    if (auto d = combine(tag_side, media_side)) {
      result.seeds.push_back({u.user_id, d->polarity, d->source});
      (d->polarity == Polarity::Left ? s.n_left : s.n_right) += 1;
    }
  }
  std::sort(result.seeds.begin(), result.seeds.end(),
            [](const SeedLabel& a, const SeedLabel& b) { return a.user_id < b.user_id; });
  s.n_seeds = result.seeds.size();
  if (s.n_seeds) s.left_fraction = static_cast<double>(s.n_left) / static_cast<double>(s.n_seeds);
  return result;
}

inline void save_seeds(const std::filesystem::path& path, std::span<const SeedLabel> seeds) {
  csv::Writer w(path, {"user_id", "polarity", "source"});
  for (const auto& s : seeds) w.row({s.user_id, std::string(to_string(s.polarity)), std::string(to_string(s.source))});
  w.close();
}

inline std::vector<SeedLabel> load_seeds(const std::filesystem::path& path) {
  std::vector<SeedLabel> seeds;
  for (const auto& row : csv::read(path, {"user_id", "polarity", "source"})) {
    if (row.fields.size() != 3) {
      throw InputError(path.string() + ":" + std::to_string(row.line_number) + ": expected 3 fields");
    }
    seeds.push_back({row.fields[0], parse_polarity(row.fields[1]), parse_seed_source(row.fields[2])});
  }
  return seeds;
}

}  // namespace rtbert
