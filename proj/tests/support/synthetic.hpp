// Template-grammar generator for a synthetic pKa corpus plus the matching
// demo lexicon.  Deterministic in the seed.
#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chembe/lexicon.hpp"
#include "chembe/types.hpp"

namespace synth {

inline const std::vector<std::string>& compounds() {
  static const std::vector<std::string> v = {
      "phenol", "benzoic acid", "acetic acid", "1,8-Dihydroxy-4-naphthoic acid",
      "aniline", "pyridine", "imidazole", "acetone", "nitromethane",
      "malononitrile", "fluorene", "indene", "cyclopentadiene", "thiophenol",
      "benzamide", "acetanilide", "phenylacetylene", "diphenylamine",
      "triphenylmethane", "acetylacetone"};
  return v;
}

inline const std::vector<std::string>& solvents() {
  static const std::vector<std::string> v = {
      "DMSO", "water", "acetonitrile", "methanol", "THF",
      "DMF",  "ethanol", "ethylene glycol"};
  return v;
}

inline const std::vector<std::string>& bonds() {
  static const std::vector<std::string> v = {"O-H", "N-H", "C-H", "S-H"};
  return v;
}

inline const std::vector<std::string>& methods() {
  static const std::vector<std::string> v = {
      "DFT", "NMR titration", "potentiometric titration", "calorimetry"};
  return v;
}

inline const std::vector<std::string>& reactions() {
  static const std::vector<std::string> v = {"deprotonation", "dissociation",
                                             "ionization"};
  return v;
}

inline const std::vector<std::string>& values() {
  static std::vector<std::string> v;
  if (v.empty())
    for (int i = 0; i < 30; ++i) {
      std::ostringstream os;
      os << (3 + i % 25) << "." << (i * 7) % 10;
      v.push_back(os.str());
    }
  return v;
}

struct Builder {
  chembe::Sentence sent;

  void word(const std::string& w) {
    sent.tokens.push_back(chembe::Token{w, sent.tokens.size()});
  }
  // multi-token phrase with one span over it
  void phrase(const std::string& text, chembe::EntityType e,
              chembe::RelationType r) {
    std::istringstream in(text);
    std::string w;
    std::size_t start = sent.tokens.size();
    while (in >> w) word(w);
    sent.spans.push_back(chembe::EntitySpan{start, sent.tokens.size(), e, r});
  }
};

inline chembe::Sentence make_sentence(std::mt19937_64& rng) {
  using chembe::EntityType;
  using chembe::RelationType;
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[rng() % pool.size()];
  };
  Builder b;
  switch (rng() % 8) {
    case 0:
      b.word("The");
      b.phrase("pKa", EntityType::Pka, RelationType::NR);
      b.word("of");
      b.phrase(pick(compounds()), EntityType::Compound, RelationType::CE);
      b.word("in");
      b.phrase(pick(solvents()), EntityType::Solvent, RelationType::SE);
      b.word("is");
      b.phrase(pick(values()), EntityType::Value, RelationType::EE);
      b.word(".");
      break;
    case 1:
      b.phrase(pick(compounds()), EntityType::Compound, RelationType::CE);
      b.word("has");
      b.word("a");
      b.phrase("pKa", EntityType::Pka, RelationType::NR);
      b.word("value");
      b.word("of");
      b.phrase(pick(values()), EntityType::Value, RelationType::EE);
      b.word("in");
      b.phrase(pick(solvents()), EntityType::Solvent, RelationType::SE);
      b.word(".");
      break;
    case 2:
      b.word("The");
      b.phrase(pick(bonds()) + " bond", EntityType::Bond, RelationType::NR);
      b.word("of");
      b.phrase(pick(compounds()), EntityType::Compound, RelationType::NR);
      b.word("was");
      b.word("studied");
      b.word("by");
      b.phrase(pick(methods()), EntityType::Method, RelationType::NR);
      b.word(".");
      break;
    case 3:
      b.phrase(pick(reactions()), EntityType::Reaction, RelationType::NR);
      b.word("of");
      b.phrase(pick(compounds()), EntityType::Compound, RelationType::CE);
      b.word("in");
      b.phrase(pick(solvents()), EntityType::Solvent, RelationType::SE);
      b.word("gives");
      b.word("a");
      b.phrase("pKa", EntityType::Pka, RelationType::NR);
      b.word("of");
      b.phrase(pick(values()), EntityType::Value, RelationType::EE);
      b.word(".");
      break;
    case 4: {  // 1:n, two compounds sharing one anchor
      b.word("The");
      b.phrase("pKa", EntityType::Pka, RelationType::NR);
      b.word("of");
      std::string c1 = pick(compounds());
      std::string c2 = pick(compounds());
      b.phrase(c1, EntityType::Compound, RelationType::CE);
      b.word("and");
      b.phrase(c2, EntityType::Compound, RelationType::CE);
      b.word("in");
      b.phrase(pick(solvents()), EntityType::Solvent, RelationType::SE);
      b.word("is");
      b.phrase(pick(values()), EntityType::Value, RelationType::EE);
      b.word(".");
      break;
    }
    case 5:
      b.word("We");
      b.word("measured");
      b.word("the");
      b.word("acidity");
      b.word("using");
      b.phrase(pick(methods()), EntityType::Method, RelationType::NR);
      b.word(".");
      break;
    case 6:
      b.phrase(pick(solvents()), EntityType::Solvent, RelationType::NR);
      b.word("was");
      b.word("used");
      b.word("as");
      b.word("the");
      b.word("solvent");
      b.word(".");
      break;
    default:
      b.word("The");
      b.phrase(pick(bonds()) + " bond", EntityType::Bond, RelationType::NR);
      b.word("dissociation");
      b.word("was");
      b.word("examined");
      b.word(".");
      break;
  }
  return b.sent;
}

inline std::vector<chembe::Document> make_corpus(std::size_t num_sentences,
                                                 std::uint64_t seed,
                                                 std::size_t per_doc = 5) {
  std::mt19937_64 rng(seed);
  std::vector<chembe::Document> docs;
  chembe::Document cur;
  for (std::size_t i = 0; i < num_sentences; ++i) {
    if (cur.sentences.size() == per_doc) {
      cur.id = "syn" + std::to_string(docs.size());
      docs.push_back(std::move(cur));
      cur = chembe::Document{};
    }
    cur.sentences.push_back(make_sentence(rng));
  }
  if (!cur.sentences.empty()) {
    cur.id = "syn" + std::to_string(docs.size());
    docs.push_back(std::move(cur));
  }
  return docs;
}

// Lexicon covering the generator's compound list; bonds are handled by the
// built-in element pattern.
inline chembe::Lexicon make_lexicon() {
  chembe::Lexicon lex;
  for (const auto& c : compounds()) lex.compound_terms.insert(c);
  for (const auto& s : solvents()) lex.solvent_terms.insert(s);
  return lex;
}

}  // namespace synth
