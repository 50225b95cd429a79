// Joint <position, entity, relation> tagging scheme: the 21-tag inventory,
// span <-> tag encoding, mention/relation decoding and transition legality.
#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chembe/types.hpp"

namespace chembe {

enum class TagPosition : std::uint8_t { B, I };

struct JointTag {
  // is_o == true means the O tag; the remaining fields are then ignored.
  bool is_o = true;
  TagPosition position = TagPosition::B;
  EntityType entity = EntityType::Compound;
  RelationType relation = RelationType::NR;

  static JointTag O() { return JointTag{}; }
  static JointTag make(TagPosition p, EntityType e, RelationType r) {
    if (!legal_entity_relation(e, r))
      throw std::invalid_argument("illegal entity-relation combination");
    return JointTag{false, p, e, r};
  }

  bool operator==(const JointTag&) const = default;

  std::string str() const {
    if (is_o) return "O";
    std::string s = position == TagPosition::B ? "B-" : "I-";
    s += entity_code(entity);
    s += '-';
    s += relation_code(relation);
    return s;
  }
};

inline std::optional<JointTag> parse_tag(const std::string& s) {
  if (s == "O") return JointTag::O();
  auto p1 = s.find('-');
  auto p2 = s.rfind('-');
  if (p1 == std::string::npos || p2 == p1) return std::nullopt;
  TagPosition pos;
  if (s.substr(0, p1) == "B") pos = TagPosition::B;
  else if (s.substr(0, p1) == "I") pos = TagPosition::I;
  else return std::nullopt;
  std::string ent = s.substr(p1 + 1, p2 - p1 - 1);
  std::string rel = s.substr(p2 + 1);
  std::optional<EntityType> e;
  for (EntityType cand : kAllEntities)
    if (ent == entity_code(cand)) e = cand;
  std::optional<RelationType> r;
  for (RelationType cand : {RelationType::CE, RelationType::SE,
                            RelationType::EE, RelationType::NR})
    if (rel == relation_code(cand)) r = cand;
  if (!e || !r || !legal_entity_relation(*e, *r)) return std::nullopt;
  return JointTag{false, pos, *e, *r};
}

// Dense id space over all legal tags; id 0 is O.
class TagSet {
 public:
  TagSet() {
    tags_.push_back(JointTag::O());
    // combo order: CMP-CE, CMP-NR, SOL-SE, SOL-NR, VAL-EE, VAL-NR,
    // REA-NR, MET-NR, BOND-NR, PKA-NR; B before I within each combo.
    const std::pair<EntityType, RelationType> combos[] = {
        {EntityType::Compound, RelationType::CE},
        {EntityType::Compound, RelationType::NR},
        {EntityType::Solvent, RelationType::SE},
        {EntityType::Solvent, RelationType::NR},
        {EntityType::Value, RelationType::EE},
        {EntityType::Value, RelationType::NR},
        {EntityType::Reaction, RelationType::NR},
        {EntityType::Method, RelationType::NR},
        {EntityType::Bond, RelationType::NR},
        {EntityType::Pka, RelationType::NR},
    };
    for (auto [e, r] : combos) {
      tags_.push_back(JointTag::make(TagPosition::B, e, r));
      tags_.push_back(JointTag::make(TagPosition::I, e, r));
    }
  }

  std::size_t size() const { return tags_.size(); }
  const JointTag& tag(std::size_t id) const { return tags_.at(id); }
  const std::vector<JointTag>& tags() const { return tags_; }

  bool contains(const JointTag& t) const {
    return std::find(tags_.begin(), tags_.end(), t) != tags_.end();
  }

  std::size_t id(const JointTag& t) const {
    auto it = std::find(tags_.begin(), tags_.end(), t);
    if (it == tags_.end()) throw std::invalid_argument("tag not in tagset");
    return static_cast<std::size_t>(it - tags_.begin());
  }

 private:
  std::vector<JointTag> tags_;
};

inline const TagSet& default_tagset() {
  static const TagSet ts;
  return ts;
}

struct EntityMention {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType entity = EntityType::Compound;
  RelationType relation = RelationType::NR;

  bool operator==(const EntityMention&) const = default;
};

struct RelationInstance {
  RelationType kind = RelationType::CE;  // CE, SE or EE
  EntityMention subject;
  EntityMention anchor;  // always a PKA mention

  bool operator==(const RelationInstance&) const = default;
};

struct DecodeResult {
  std::vector<EntityMention> mentions;
  std::vector<RelationInstance> relations;
};

inline std::vector<JointTag> encode(const Sentence& s) {
  validate_sentence(s);
  std::vector<JointTag> tags(s.tokens.size(), JointTag::O());
  for (const auto& sp : s.spans) {
    tags[sp.start] = JointTag::make(TagPosition::B, sp.entity, sp.relation);
    for (std::size_t i = sp.start + 1; i < sp.end; ++i)
      tags[i] = JointTag::make(TagPosition::I, sp.entity, sp.relation);
  }
  return tags;
}

// START/STOP sentinels for transition legality.
struct BoundaryTag {};
inline constexpr BoundaryTag kStart{};
inline constexpr BoundaryTag kStop{};

inline bool is_legal_transition(const JointTag& a, const JointTag& b) {
  if (b.is_o || b.position == TagPosition::B) return true;
  // b is I-E-R: a must be B-E-R or I-E-R with the same entity and relation
  return !a.is_o && a.entity == b.entity && a.relation == b.relation;
}

inline bool is_legal_transition(BoundaryTag, const JointTag& b) {
  return b.is_o || b.position == TagPosition::B;  // START -> I-* is illegal
}

inline bool is_legal_transition(const JointTag&, BoundaryTag) { return true; }

// Decode a tag sequence into mentions, then pair CE/SE/EE mentions with
// their nearest PKA anchor (start-token distance, tie to the left).
// Lenient mode repairs orphan I- tags to B- and splits runs whose entity
// or relation changes; strict mode throws on either.
inline DecodeResult decode(const std::vector<JointTag>& tags,
                           const std::vector<Token>& tokens,
                           bool strict = false) {
  if (tags.size() != tokens.size())
    throw std::invalid_argument("tag count does not match token count");
  DecodeResult out;
  std::size_t i = 0;
  while (i < tags.size()) {
    const JointTag& t = tags[i];
    if (t.is_o) {
      ++i;
      continue;
    }
    if (t.position == TagPosition::I && strict)
      throw std::runtime_error("orphan I- tag at token " + std::to_string(i));
    // run start (I repaired to B in lenient mode)
    std::size_t start = i;
    ++i;
    while (i < tags.size() && !tags[i].is_o &&
           tags[i].position == TagPosition::I) {
      if (tags[i].entity != t.entity || tags[i].relation != t.relation) {
        if (strict)
          throw std::runtime_error("entity/relation change inside a run at token " +
                                   std::to_string(i));
        break;  // lenient: split the run; the I- tag starts a new mention
      }
      ++i;
    }
    out.mentions.push_back(EntityMention{start, i, t.entity, t.relation});
  }

  // collect anchors
  std::vector<const EntityMention*> anchors;
  for (const auto& m : out.mentions)
    if (m.entity == EntityType::Pka) anchors.push_back(&m);
  if (anchors.empty()) return out;

  auto nearest_anchor = [&](const EntityMention& m) -> const EntityMention& {
    const EntityMention* best = anchors.front();
    auto dist = [&](const EntityMention* a) {
      return std::abs(static_cast<long long>(a->start) -
                      static_cast<long long>(m.start));
    };
    for (const auto* a : anchors) {
      if (dist(a) < dist(best) || (dist(a) == dist(best) && a->start < best->start))
        best = a;
    }
    return *best;
  };

  for (const auto& m : out.mentions) {
    if (m.relation == RelationType::NR || m.entity == EntityType::Pka) continue;
    if (m.relation == RelationType::CE || m.relation == RelationType::SE ||
        m.relation == RelationType::EE) {
      out.relations.push_back(
          RelationInstance{m.relation, m, nearest_anchor(m)});
    }
  }
  return out;
}

}  // namespace chembe
