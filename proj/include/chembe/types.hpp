// Core data model: tokens, entity spans, sentences, documents.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace chembe {

enum class EntityType : std::uint8_t {
  Compound,
  Solvent,
  Reaction,
  Method,
  Bond,
  Pka,
  Value,
};

enum class RelationType : std::uint8_t {
  CE,  // compound - pKa
  SE,  // solvent - pKa
  EE,  // pKa - pKa value
  NR,  // no relation
};

inline constexpr EntityType kAllEntities[] = {
    EntityType::Compound, EntityType::Solvent, EntityType::Reaction,
    EntityType::Method,   EntityType::Bond,    EntityType::Pka,
    EntityType::Value,
};

inline const char* entity_code(EntityType e) {
  switch (e) {
    case EntityType::Compound: return "CMP";
    case EntityType::Solvent: return "SOL";
    case EntityType::Reaction: return "REA";
    case EntityType::Method: return "MET";
    case EntityType::Bond: return "BOND";
    case EntityType::Pka: return "PKA";
    case EntityType::Value: return "VAL";
  }
  return "?";
}

inline const char* entity_name(EntityType e) {
  switch (e) {
    case EntityType::Compound: return "Compound";
    case EntityType::Solvent: return "Solvent";
    case EntityType::Reaction: return "Reaction";
    case EntityType::Method: return "Method";
    case EntityType::Bond: return "Bond";
    case EntityType::Pka: return "Bond Energy(pKa)";
    case EntityType::Value: return "Bond Energy value(pKa value)";
  }
  return "?";
}

inline const char* relation_code(RelationType r) {
  switch (r) {
    case RelationType::CE: return "CE";
    case RelationType::SE: return "SE";
    case RelationType::EE: return "EE";
    case RelationType::NR: return "NR";
  }
  return "?";
}

// The only entity allowed to carry a given non-NR relation.
inline bool legal_entity_relation(EntityType e, RelationType r) {
  switch (r) {
    case RelationType::NR: return true;
    case RelationType::CE: return e == EntityType::Compound;
    case RelationType::SE: return e == EntityType::Solvent;
    case RelationType::EE: return e == EntityType::Value;
  }
  return false;
}

struct Token {
  std::string text;
  std::size_t index = 0;

  bool operator==(const Token&) const = default;
};

struct EntitySpan {
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // exclusive
  EntityType entity = EntityType::Compound;
  RelationType relation = RelationType::NR;

  bool operator==(const EntitySpan&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::vector<EntitySpan> spans;

  bool operator==(const Sentence&) const = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;

  bool operator==(const Document&) const = default;
};

struct StatsReport {
  std::map<EntityType, std::size_t> mention_counts;
  std::size_t token_count = 0;
  std::size_t sentence_count = 0;
  std::size_t document_count = 0;
};

inline void validate_sentence(const Sentence& s) {
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (s.tokens[i].text.empty())
      throw std::invalid_argument("empty token text");
    if (s.tokens[i].index != i)
      throw std::invalid_argument("non-consecutive token indices");
  }
  for (const auto& sp : s.spans) {
    if (!(sp.start < sp.end && sp.end <= s.tokens.size()))
      throw std::invalid_argument("span out of bounds");
    if (!legal_entity_relation(sp.entity, sp.relation))
      throw std::invalid_argument("illegal entity-relation pair");
  }
  // spans must be pairwise disjoint
  for (std::size_t i = 0; i < s.spans.size(); ++i)
    for (std::size_t j = i + 1; j < s.spans.size(); ++j) {
      const auto& a = s.spans[i];
      const auto& b = s.spans[j];
      if (a.start < b.end && b.start < a.end)
        throw std::invalid_argument("overlapping spans");
    }
}

}  // namespace chembe
