#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "chembe/tagscheme.hpp"
#include "support/gen.hpp"

using namespace chembe;

TEST_CASE("tagset has 21 dense ids with O at 0") {
  const TagSet& ts = default_tagset();
  CHECK(ts.size() == 21);
  CHECK(ts.tag(0) == JointTag::O());
  CHECK(ts.id(JointTag::O()) == 0);
  CHECK_FALSE(ts.contains(JointTag{false, TagPosition::B, EntityType::Pka,
                                   RelationType::CE}));
  // every listed tag parses back to itself
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto p = parse_tag(ts.tag(i).str());
    REQUIRE(p.has_value());
    CHECK(*p == ts.tag(i));
  }
}

TEST_CASE("illegal entity-relation combinations are rejected") {
  CHECK_THROWS(JointTag::make(TagPosition::B, EntityType::Pka, RelationType::CE));
  CHECK_THROWS(JointTag::make(TagPosition::B, EntityType::Compound, RelationType::SE));
  CHECK_FALSE(parse_tag("B-PKA-CE").has_value());
  CHECK_FALSE(parse_tag("banana").has_value());
}

TEST_CASE("encode worked example") {
  Sentence s;
  for (const char* w :
       {"The", "$CMP$", "has", "pKa", "of", "12.5", "in", "DMSO"})
    s.tokens.push_back(Token{w, s.tokens.size()});
  s.spans = {
      EntitySpan{1, 2, EntityType::Compound, RelationType::CE},
      EntitySpan{3, 4, EntityType::Pka, RelationType::NR},
      EntitySpan{5, 6, EntityType::Value, RelationType::EE},
      EntitySpan{7, 8, EntityType::Solvent, RelationType::SE},
  };
  auto tags = encode(s);
  std::vector<std::string> strs;
  for (const auto& t : tags) strs.push_back(t.str());
  CHECK(strs == std::vector<std::string>{"O", "B-CMP-CE", "O", "B-PKA-NR", "O",
                                         "B-VAL-EE", "O", "B-SOL-SE"});

  auto dec = decode(tags, s.tokens);
  CHECK(dec.mentions.size() == 4);
  REQUIRE(dec.relations.size() == 3);
  for (const auto& r : dec.relations) {
    CHECK(r.anchor.start == 3);
    CHECK(r.anchor.entity == EntityType::Pka);
  }
}

TEST_CASE("encode no spans and multi-token span") {
  Sentence s;
  s.tokens = {Token{"a", 0}, Token{"b", 1}};
  CHECK(encode(s) == std::vector<JointTag>{JointTag::O(), JointTag::O()});
  s.spans = {EntitySpan{0, 2, EntityType::Solvent, RelationType::NR}};
  auto tags = encode(s);
  CHECK(tags[0].str() == "B-SOL-NR");
  CHECK(tags[1].str() == "I-SOL-NR");
}

TEST_CASE("decode anchorless and 1:n cases") {
  std::vector<Token> toks = {Token{"x", 0}};
  auto dec = decode({*parse_tag("B-CMP-CE")}, toks);
  CHECK(dec.mentions.size() == 1);
  CHECK(dec.relations.empty());

  // two CE mentions sharing one anchor
  std::vector<Token> t5;
  for (int i = 0; i < 5; ++i) t5.push_back(Token{"w", (std::size_t)i});
  auto dec2 = decode({*parse_tag("B-CMP-CE"), *parse_tag("O"),
                      *parse_tag("B-CMP-CE"), *parse_tag("O"),
                      *parse_tag("B-PKA-NR")},
                     t5);
  REQUIRE(dec2.relations.size() == 2);
  CHECK(dec2.relations[0].anchor.start == 4);
  CHECK(dec2.relations[1].anchor.start == 4);
}

TEST_CASE("decode picks the nearest anchor, tie to the left") {
  std::vector<Token> t5;
  for (int i = 0; i < 5; ++i) t5.push_back(Token{"w", (std::size_t)i});
  // PKA at 0 and 4, CE subject at 2: equidistant -> leftward anchor
  auto dec = decode({*parse_tag("B-PKA-NR"), *parse_tag("O"),
                     *parse_tag("B-CMP-CE"), *parse_tag("O"),
                     *parse_tag("B-PKA-NR")},
                    t5);
  REQUIRE(dec.relations.size() == 1);
  CHECK(dec.relations[0].anchor.start == 0);
}

TEST_CASE("strict decode rejects what lenient repairs") {
  std::vector<Token> t2 = {Token{"a", 0}, Token{"b", 1}};
  std::vector<JointTag> bad = {*parse_tag("O"), *parse_tag("I-SOL-SE")};
  CHECK_THROWS(decode(bad, t2, /*strict=*/true));
  auto dec = decode(bad, t2, /*strict=*/false);
  REQUIRE(dec.mentions.size() == 1);
  CHECK(dec.mentions[0].start == 1);

  std::vector<JointTag> change = {*parse_tag("B-CMP-CE"),
                                  *parse_tag("I-CMP-NR")};
  CHECK_THROWS(decode(change, t2, /*strict=*/true));
  auto dec2 = decode(change, t2, /*strict=*/false);
  CHECK(dec2.mentions.size() == 2);  // run split on relation change
}

TEST_CASE("transition legality") {
  auto B_CMP_CE = *parse_tag("B-CMP-CE");
  auto I_CMP_CE = *parse_tag("I-CMP-CE");
  auto I_CMP_NR = *parse_tag("I-CMP-NR");
  auto I_SOL_SE = *parse_tag("I-SOL-SE");
  CHECK(is_legal_transition(B_CMP_CE, I_CMP_CE));
  CHECK_FALSE(is_legal_transition(JointTag::O(), I_SOL_SE));
  CHECK_FALSE(is_legal_transition(B_CMP_CE, I_CMP_NR));
  CHECK(is_legal_transition(kStart, B_CMP_CE));
  CHECK_FALSE(is_legal_transition(kStart, I_CMP_CE));
  CHECK(is_legal_transition(I_CMP_CE, kStop));
}

TEST_CASE("round trip decode(encode(s)) over random sentences") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 300; ++rep) {
    auto s = gen::random_sentence(rng);
    auto tags = encode(s);
    // legality closure including boundaries
    CHECK(is_legal_transition(kStart, tags.front()));
    for (std::size_t i = 0; i + 1 < tags.size(); ++i)
      CHECK(is_legal_transition(tags[i], tags[i + 1]));

    auto dec = decode(tags, s.tokens, /*strict=*/true);
    auto mentions = dec.mentions;
    std::vector<EntityMention> expected;
    for (const auto& sp : s.spans)
      expected.push_back(EntityMention{sp.start, sp.end, sp.entity, sp.relation});
    auto key = [](const EntityMention& m) {
      return std::tuple(m.start, m.end, m.entity, m.relation);
    };
    std::sort(mentions.begin(), mentions.end(),
              [&](auto& a, auto& b) { return key(a) < key(b); });
    std::sort(expected.begin(), expected.end(),
              [&](auto& a, auto& b) { return key(a) < key(b); });
    CHECK(mentions == expected);
  }
}

TEST_CASE("relation components do not affect decoded entity spans") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    auto s = gen::random_sentence(rng);
    auto tags = encode(s);
    auto stripped = tags;
    for (auto& t : stripped)
      if (!t.is_o) t.relation = RelationType::NR;
    // every encoded span starts with B-, so runs stay delimited after the
    // rewrite and only the relation labels change
    auto a = decode(tags, s.tokens).mentions;
    auto b = decode(stripped, s.tokens, /*strict=*/false).mentions;
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].start == b[i].start);
      CHECK(a[i].end == b[i].end);
      CHECK(a[i].entity == b[i].entity);
    }
  }
}
