#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rtbert/csv.hpp"
#include "rtbert/error.hpp"
#include "rtbert/graph.hpp"
#include "rtbert/rtbert.hpp"
#include "rtbert/text.hpp"

namespace rtbert {

enum class Tag : std::uint8_t { FarLeft = 0, Middle = 1, FarRight = 2 };

inline std::string_view to_string(Tag t) {
  switch (t) {
    case Tag::FarLeft: return "far_left";
    case Tag::Middle: return "middle";
    case Tag::FarRight: return "far_right";
  }
  return "?";
}

struct PartitionTag {
  std::string user_id;
  Tag tag;

  friend bool operator==(const PartitionTag&, const PartitionTag&) = default;
};

using TagMap = std::unordered_map<std::string, Tag>;

/// Bottom and top floor(q*N) users by p_right become FarLeft and FarRight.
/// Scores are ordered by (p_right, user_id), so equal scores split at the
/// boundary by user_id. Output is sorted by user_id.
inline std::vector<PartitionTag> partition(std::span<const PolarityScore> scores, double q = 0.2) {
  if (!(q > 0.0 && q < 0.5)) throw InputError("partition quantile must be in (0, 0.5)");
  const auto n = scores.size();
  if (static_cast<double>(n) < 2.0 / q) {
    throw InputError("need at least " + format_real(std::ceil(2.0 / q), 6) + " scored users for q=" + format_real(q, 6));
  }
  const auto m = static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9));
  std::vector<const PolarityScore*> order;
  for (const auto& s : scores) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const PolarityScore* a, const PolarityScore* b) {
    if (a->p_right != b->p_right) return a->p_right < b->p_right;
    return a->user_id < b->user_id;
  });
  std::vector<PartitionTag> tags;
  for (std::size_t i = 0; i < n; ++i) {
    const Tag t = i < m ? Tag::FarLeft : (i >= n - m ? Tag::FarRight : Tag::Middle);
    tags.push_back({order[i]->user_id, t});
  }
  std::sort(tags.begin(), tags.end(), [](const PartitionTag& a, const PartitionTag& b) { return a.user_id < b.user_id; });
  return tags;
}

inline TagMap tag_map(std::span<const PartitionTag> tags) {
  TagMap m;
  for (const auto& t : tags) m.emplace(t.user_id, t.tag);
  return m;
}

struct RankedAccount {
  std::string user_id;
  std::size_t group_retweeters = 0;  // unique retweeters carrying the group tag
  std::size_t total_retweeters = 0;  // unique retweeters overall
};

/// Accounts ranked by how many unique retweeters from `group` they have;
/// ties go to more total retweeters, then to user_id. Accounts with no such
/// retweeter are not listed.
inline std::vector<RankedAccount> top_retweeted(const RetweetGraph& g, const TagMap& tags, Tag group, std::size_t n) {
  std::vector<RankedAccount> ranked;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    std::size_t count = 0;
    for (const auto& nb : g.in(v)) {
      auto it = tags.find(g.name(nb.node));
      if (it != tags.end() && it->second == group) ++count;
    }
    if (count) ranked.push_back({g.name(v), count, g.in(v).size()});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedAccount& a, const RankedAccount& b) {
    if (a.group_retweeters != b.group_retweeters) return a.group_retweeters > b.group_retweeters;
    if (a.total_retweeters != b.total_retweeters) return a.total_retweeters > b.total_retweeters;
    return a.user_id < b.user_id;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

/// 1-based rank of every node by unique retweeter count (ties by user_id).
inline std::vector<std::size_t> retweeter_ranks(const RetweetGraph& g) {
  std::vector<NodeId> order(g.node_count());
  for (NodeId u = 0; u < order.size(); ++u) order[u] = u;
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (g.in(a).size() != g.in(b).size()) return g.in(a).size() > g.in(b).size();
    return a < b;  // node ids follow user_id order
  });
  std::vector<std::size_t> rank(g.node_count());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i + 1;
  return rank;
}

struct AudienceProfile {
  std::string target;
  std::array<std::size_t, 3> counts{};               // unique retweeters per Tag
  std::optional<std::array<double, 3>> fractions;  // absent without tagged retweeters
  std::size_t total_retweeters = 0;
  std::size_t overall_rank = 0;
};

namespace detail {

inline AudienceProfile audience_of(const RetweetGraph& g, const TagMap& tags, NodeId v, std::size_t rank) {
  AudienceProfile a;
  a.target = g.name(v);
  a.total_retweeters = g.in(v).size();
  a.overall_rank = rank;
  std::size_t tagged = 0;
  for (const auto& nb : g.in(v)) {
    auto it = tags.find(g.name(nb.node));
    if (it == tags.end()) continue;
    ++a.counts[static_cast<int>(it->second)];
    ++tagged;
  }
  if (tagged) {
    std::array<double, 3> f{};
    for (int t = 0; t < 3; ++t) f[t] = static_cast<double>(a.counts[t]) / static_cast<double>(tagged);
    a.fractions = f;
  }
  return a;
}

}  // namespace detail

/// Tag mix of the unique retweeters of `target`; untagged retweeters are left out of the fractions.
inline AudienceProfile audience_profile(const RetweetGraph& g, const TagMap& tags, std::string_view target) {
  const auto v = g.id_of(target);
  return detail::audience_of(g, tags, v, retweeter_ranks(g)[v]);
}

struct GroupReport {
  Tag group;
  std::vector<RankedAccount> accounts;
  std::vector<AudienceProfile> audiences;  // parallel to accounts
  double mean_own_fraction = 0.0;          // mean share of retweeters tagged `group`
  double mean_far_left_fraction = 0.0;
  double mean_far_right_fraction = 0.0;
};

struct EchoReport {
  double q = 0.2;
  std::size_t top_n = 10;
  std::array<std::size_t, 3> partition_sizes{};
  GroupReport far_left;   // accounts most retweeted by FarLeft users
  GroupReport far_right;  // accounts most retweeted by FarRight users
};

/// Partitions users by score, then for each extreme lists its top-n most
/// retweeted accounts with their audience mix and overall rank.
inline EchoReport echo_report(const RetweetGraph& g, std::span<const PolarityScore> scores, double q = 0.2,
                              std::size_t n = 10) {
  EchoReport rep;
  rep.q = q;
  rep.top_n = n;
  const auto tags = tag_map(partition(scores, q));
  for (const auto& [_, t] : tags) ++rep.partition_sizes[static_cast<int>(t)];
  const auto ranks = retweeter_ranks(g);
  for (Tag group : {Tag::FarLeft, Tag::FarRight}) {
    auto& gr = group == Tag::FarLeft ? rep.far_left : rep.far_right;
    gr.group = group;
    gr.accounts = top_retweeted(g, tags, group, n);
    std::size_t with_fractions = 0;
    for (const auto& acc : gr.accounts) {
      const auto v = g.id_of(acc.user_id);
      gr.audiences.push_back(detail::audience_of(g, tags, v, ranks[v]));
      if (const auto& f = gr.audiences.back().fractions) {
        gr.mean_own_fraction += (*f)[static_cast<int>(group)];
        gr.mean_far_left_fraction += (*f)[static_cast<int>(Tag::FarLeft)];
        gr.mean_far_right_fraction += (*f)[static_cast<int>(Tag::FarRight)];
        ++with_fractions;
      }
    }
    if (with_fractions) {
      const double k = static_cast<double>(with_fractions);
      gr.mean_own_fraction /= k;
      gr.mean_far_left_fraction /= k;
      gr.mean_far_right_fraction /= k;
    }
  }
  return rep;
}

inline nlohmann::ordered_json echo_report_json(const EchoReport& rep) {
  nlohmann::ordered_json j;
  j["q"] = rep.q;
  j["top_n"] = rep.top_n;
  j["partition_sizes"] = {{"far_left", rep.partition_sizes[0]},
                          {"middle", rep.partition_sizes[1]},
                          {"far_right", rep.partition_sizes[2]}};
  for (const GroupReport* gr : {&rep.far_left, &rep.far_right}) {
    nlohmann::ordered_json g;
    g["mean_own_fraction"] = gr->mean_own_fraction;
    g["mean_far_left_fraction"] = gr->mean_far_left_fraction;
    g["mean_far_right_fraction"] = gr->mean_far_right_fraction;
    g["accounts"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < gr->accounts.size(); ++i) {
      const auto& acc = gr->accounts[i];
      const auto& aud = gr->audiences[i];
      nlohmann::ordered_json a;
      a["account"] = acc.user_id;
      a["group_retweeters"] = acc.group_retweeters;
      a["n_retweeters"] = aud.total_retweeters;
      a["overall_rank"] = aud.overall_rank;
      a["counts"] = {{"far_left", aud.counts[0]}, {"middle", aud.counts[1]}, {"far_right", aud.counts[2]}};
      if (aud.fractions) {
        a["fractions"] = {{"far_left", (*aud.fractions)[0]},
                          {"middle", (*aud.fractions)[1]},
                          {"far_right", (*aud.fractions)[2]}};
      } else {
        a["fractions"] = nullptr;
      }
      g["accounts"].push_back(a);
    }
    j[std::string(to_string(gr->group))] = g;
  }
  return j;
}

/// Flat table: account,group,rank,n_retweeters,frac_left,frac_middle,frac_right.
inline void save_echo_csv(const std::filesystem::path& path, const EchoReport& rep) {
  csv::Writer w(path, {"account", "group", "rank", "n_retweeters", "frac_left", "frac_middle", "frac_right"});
  for (const GroupReport* gr : {&rep.far_left, &rep.far_right}) {
    for (const auto& aud : gr->audiences) {
      std::array<std::string, 3> f{"", "", ""};
      if (aud.fractions) {
        for (int t = 0; t < 3; ++t) f[t] = format_real((*aud.fractions)[t]);
      }
      w.row({aud.target, std::string(to_string(gr->group)), std::to_string(aud.overall_rank),
             std::to_string(aud.total_retweeters), f[0], f[1], f[2]});
    }
  }
  w.close();
}

inline void save_partition(const std::filesystem::path& path, std::span<const PartitionTag> tags) {
  csv::Writer w(path, {"user_id", "tag"});
  for (const auto& t : tags) w.row({t.user_id, std::string(to_string(t.tag))});
  w.close();
}

}  // namespace rtbert
