#include <gtest/gtest.h>

#include "reference_tables.hpp"
#include "rtbert/seeding.hpp"
#include "test_util.hpp"

using namespace rtbert;
namespace ref = rtbert::testing;

namespace {

const HashtagLexicon& lex() {
  static const auto l = default_lexicon();
  return l;
}

const MediaTable& media() {
  static const auto m = default_media_table();
  return m;
}

std::vector<EndorsementRecord> endorse(std::initializer_list<std::pair<const char*, std::int64_t>> rows) {
  std::vector<EndorsementRecord> out;
  for (const auto& [h, c] : rows) out.push_back({"u", h, c});
  return out;
}

UserRecord user(std::string id, std::string desc) {
  UserRecord u;
  u.user_id = std::move(id);
  u.description = std::move(desc);
  u.tweet_count = 3;
  return u;
}

}  // namespace

TEST(RuleTables, EveryHashtagRow) {
  EXPECT_EQ(lex().left().size(), 17u);
  EXPECT_EQ(lex().right().size(), 12u);
  for (auto tag : ref::kLeftHashtags) {
    EXPECT_EQ(hashtag_label("#" + std::string(tag), lex()), Polarity::Left) << tag;
  }
  for (auto tag : ref::kRightHashtags) {
    EXPECT_EQ(hashtag_label("#" + std::string(tag), lex()), Polarity::Right) << tag;
  }
}

TEST(RuleTables, EveryMediaRow) {
  ASSERT_EQ(media().size(), 29u);
  for (const auto& row : ref::kOutlets) {
    EXPECT_EQ(media().rating(row.handle), row.rating) << row.handle;
    const auto score = media_score(endorse({{row.handle.data(), 2}}), media());
    ASSERT_TRUE(score.has_value()) << row.handle;
    EXPECT_DOUBLE_EQ(*score, row.rating);
  }
  for (const auto& o : media().outlets()) {
    EXPECT_GE(o.rating, 1);
    EXPECT_LE(o.rating, 5);
  }
}

TEST(HashtagLabel, Examples) {
  EXPECT_EQ(hashtag_label("Mom. #Resist #VoteBlue", lex()), Polarity::Left);
  EXPECT_EQ(hashtag_label("#MAGA all the way", lex()), Polarity::Right);
  EXPECT_EQ(hashtag_label("#Resist #MAGA", lex()), std::nullopt);
  EXPECT_EQ(hashtag_label("no tags here", lex()), std::nullopt);
}

TEST(HashtagLabel, CaseInsensitive) {
  EXPECT_EQ(hashtag_label("#maga", lex()), hashtag_label("#MAGA", lex()));
  EXPECT_EQ(hashtag_label("#rEsIsT", lex()), Polarity::Left);
}

TEST(HashtagLabel, WholeTokensOnly) {
  EXPECT_EQ(hashtag_label("#MAGA2024", lex()), std::nullopt);
  EXPECT_EQ(hashtag_label("MAGA Resist", lex()), std::nullopt);
  EXPECT_EQ(hashtag_label("#MAGA, #KAG; #Resist", lex()), Polarity::Right);
}

TEST(Lexicon, OverlapRejected) {
  HashtagLexicon l;
  l.add("#Foo", Polarity::Left);
  EXPECT_THROW(l.add("foo", Polarity::Right), InputError);
}

TEST(MediaScore, Examples) {
  EXPECT_DOUBLE_EQ(*media_score(endorse({{"FoxNews", 2}}), media()), 4.0);
  EXPECT_FALSE(media_score(endorse({{"CNN", 1}}), media()).has_value());
  EXPECT_DOUBLE_EQ(*media_score(endorse({{"HuffPost", 1}, {"MSNBC", 1}}), media()), 1.0);
}

TEST(MediaScore, CountWeightedVersusPerOutlet) {
  const auto e = endorse({{"@FoxNews", 3}, {"@CNN", 1}});
  EXPECT_DOUBLE_EQ(*media_score(e, media()), (4.0 * 3 + 2.0 * 1) / 4);
  EXPECT_DOUBLE_EQ(*media_score(e, media(), 2, MediaMean::PerOutlet), 3.0);
}

TEST(MediaScore, UnknownHandlesIgnored) {
  EXPECT_FALSE(media_score(endorse({{"SomeBlog", 5}, {"CNN", 1}}), media()).has_value());
  EXPECT_DOUBLE_EQ(*media_score(endorse({{"SomeBlog", 5}, {"CNN", 2}}), media()), 2.0);
}

TEST(MediaLabel, Boundaries) {
  EXPECT_EQ(media_label(2.0), Polarity::Left);
  EXPECT_EQ(media_label(4.0), Polarity::Right);
  EXPECT_EQ(media_label(3.0), std::nullopt);
  EXPECT_EQ(media_label(2.0000001), std::nullopt);
  EXPECT_EQ(media_label(1.0), Polarity::Left);
}

TEST(Combine, Examples) {
  EXPECT_EQ(combine(Polarity::Left, std::nullopt), (SeedDecision{Polarity::Left, SeedSource::Hashtag}));
  EXPECT_EQ(combine(Polarity::Left, Polarity::Right), (SeedDecision{Polarity::Left, SeedSource::Hashtag}));
  EXPECT_EQ(combine(Polarity::Right, Polarity::Right), (SeedDecision{Polarity::Right, SeedSource::Both}));
}

TEST(Combine, TotalOverAllNineInputs) {
  const std::array<std::optional<Polarity>, 3> values{std::nullopt, Polarity::Left, Polarity::Right};
  for (auto h : values) {
    for (auto m : values) {
      const auto d = combine(h, m);
      EXPECT_EQ(d.has_value(), h.has_value() || m.has_value());
      if (!d) continue;
      if (h) EXPECT_EQ(d->polarity, *h);
      else EXPECT_EQ(d->polarity, *m);
      if (h && m && *h == *m) EXPECT_EQ(d->source, SeedSource::Both);
      else if (h) EXPECT_EQ(d->source, SeedSource::Hashtag);
      else EXPECT_EQ(d->source, SeedSource::Media);
      EXPECT_EQ(combine(h, m), d);
    }
  }
}

TEST(GenerateSeeds, NoMatchesGiveEmptyResult) {
  const std::vector<UserRecord> users{user("a", "hello"), user("b", "world")};
  const auto r = generate_seeds(users, {}, lex(), media());
  EXPECT_TRUE(r.seeds.empty());
  EXPECT_EQ(r.summary.n_hashtag, 0u);
  EXPECT_EQ(r.summary.n_media, 0u);
  EXPECT_EQ(r.summary.n_overlap, 0u);
  EXPECT_EQ(r.summary.n_conflict, 0u);
  EXPECT_EQ(r.summary.n_seeds, 0u);
}

TEST(GenerateSeeds, SingleHashtagUser) {
  const std::vector<UserRecord> users{user("a", "#MAGA")};
  const auto r = generate_seeds(users, {}, lex(), media());
  ASSERT_EQ(r.seeds.size(), 1u);
  EXPECT_EQ(r.seeds[0], (SeedLabel{"a", Polarity::Right, SeedSource::Hashtag}));
  EXPECT_EQ(r.summary.n_hashtag, 1u);
}

TEST(GenerateSeeds, ConflictDefersToHashtag) {
  const std::vector<UserRecord> users{user("a", "#Resist")};
  const std::vector<EndorsementRecord> e{{"a", "@FoxNews", 1}, {"a", "@BreitbartNews", 1}};
  ASSERT_DOUBLE_EQ(*media_score(e, media()), 4.5);
  const auto r = generate_seeds(users, e, lex(), media());
  ASSERT_EQ(r.seeds.size(), 1u);
  EXPECT_EQ(r.seeds[0].polarity, Polarity::Left);
  EXPECT_EQ(r.seeds[0].source, SeedSource::Hashtag);
  EXPECT_EQ(r.summary.n_conflict, 1u);
  EXPECT_EQ(r.summary.n_overlap, 1u);
}

TEST(GenerateSeeds, FractionsSumToOne) {
  std::vector<UserRecord> users;
  std::vector<EndorsementRecord> e;
  for (int i = 0; i < 30; ++i) {
    const auto id = "u" + std::to_string(i);
    users.push_back(user(id, i % 3 == 0 ? "#VoteBlue" : (i % 3 == 1 ? "#KAG" : "plain")));
    if (i % 2 == 0) e.push_back({id, "@MSNBC", 2});
  }
  const auto r = generate_seeds(users, e, lex(), media());
  ASSERT_GT(r.summary.n_seeds, 0u);
  EXPECT_EQ(r.summary.n_left + r.summary.n_right, r.summary.n_seeds);
  const double right_fraction = static_cast<double>(r.summary.n_right) / static_cast<double>(r.summary.n_seeds);
  EXPECT_DOUBLE_EQ(r.summary.left_fraction + right_fraction, 1.0);
}

TEST(SeedFiles, RoundTrip) {
  rtbert::testing::TempDir dir;
  const std::vector<SeedLabel> seeds{{"a", Polarity::Left, SeedSource::Both}, {"b", Polarity::Right, SeedSource::Media}};
  save_seeds(dir / "s.csv", seeds);
  EXPECT_EQ(load_seeds(dir / "s.csv"), seeds);

  save_lexicon(dir / "lex.csv", lex());
  const auto l2 = load_lexicon(dir / "lex.csv");
  EXPECT_EQ(l2.left(), lex().left());
  EXPECT_EQ(l2.right(), lex().right());

  save_media_table(dir / "media.csv", media());
  const auto m2 = load_media_table(dir / "media.csv");
  ASSERT_EQ(m2.size(), media().size());
  for (const auto& row : ref::kOutlets) EXPECT_EQ(m2.rating(row.handle), row.rating);
}
