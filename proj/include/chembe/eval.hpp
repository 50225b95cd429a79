// Span-level precision/recall/F1 for entities (relation-agnostic) and for
// anchored relations, plus the plain-text report.
#pragma once

#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "chembe/tagscheme.hpp"
#include "chembe/types.hpp"

namespace chembe {

struct PRF {
  std::size_t tp = 0, fp = 0, fn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : double(tp) / (tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : double(tp) / (tp + fn); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }

  void add(const PRF& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
  }
};

struct EvalReport {
  std::map<EntityType, PRF> entities;
  PRF entity_micro;
  std::map<RelationType, PRF> relations;  // CE, SE, EE
  PRF relation_micro;
};

// One sentence worth of gold/predicted structure, with a sentence index so
// corpus-level keys stay distinct.
struct SentencePredictions {
  std::vector<EntityMention> gold_mentions;
  std::vector<EntityMention> pred_mentions;
  std::vector<RelationInstance> gold_relations;
  std::vector<RelationInstance> pred_relations;
};

// Entity scoring: exact span + entity type; the relation component of the
// tags is deliberately ignored.
inline std::map<EntityType, PRF> entity_prf(
    const std::vector<SentencePredictions>& sents) {
  std::map<EntityType, PRF> out;
  for (EntityType e : kAllEntities) out[e];
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, EntityType>;
  for (std::size_t s = 0; s < sents.size(); ++s) {
    std::set<Key> gold, pred;
    for (const auto& m : sents[s].gold_mentions)
      gold.insert({s, m.start, m.end, m.entity});
    for (const auto& m : sents[s].pred_mentions)
      pred.insert({s, m.start, m.end, m.entity});
    for (const auto& k : pred) {
      if (gold.count(k)) ++out[std::get<3>(k)].tp;
      else ++out[std::get<3>(k)].fp;
    }
    for (const auto& k : gold)
      if (!pred.count(k)) ++out[std::get<3>(k)].fn;
  }
  return out;
}

// Relation scoring: kind + exact subject span/type + exact anchor span.
inline std::map<RelationType, PRF> relation_prf(
    const std::vector<SentencePredictions>& sents) {
  std::map<RelationType, PRF> out;
  for (RelationType r : {RelationType::CE, RelationType::SE, RelationType::EE})
    out[r];
  using Key = std::tuple<std::size_t, RelationType, std::size_t, std::size_t,
                         EntityType, std::size_t, std::size_t>;
  for (std::size_t s = 0; s < sents.size(); ++s) {
    std::set<Key> gold, pred;
    for (const auto& r : sents[s].gold_relations)
      gold.insert({s, r.kind, r.subject.start, r.subject.end, r.subject.entity,
                   r.anchor.start, r.anchor.end});
    for (const auto& r : sents[s].pred_relations)
      pred.insert({s, r.kind, r.subject.start, r.subject.end, r.subject.entity,
                   r.anchor.start, r.anchor.end});
    for (const auto& k : pred) {
      if (gold.count(k)) ++out[std::get<1>(k)].tp;
      else ++out[std::get<1>(k)].fp;
    }
    for (const auto& k : gold)
      if (!pred.count(k)) ++out[std::get<1>(k)].fn;
  }
  return out;
}

inline EvalReport evaluate(const std::vector<SentencePredictions>& sents) {
  EvalReport rep;
  rep.entities = entity_prf(sents);
  for (const auto& [e, prf] : rep.entities) rep.entity_micro.add(prf);
  rep.relations = relation_prf(sents);
  for (const auto& [r, prf] : rep.relations) rep.relation_micro.add(prf);
  return rep;
}

namespace detail {

inline std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v << "%";
  return os.str();
}

}  // namespace detail

// Entity rows in the order Compound, Bond, Method, Solvent, Reaction, pKa,
// pKa value; relation rows CE, SE, EE.  Micro is the headline average,
// macro is printed alongside.
inline std::string render_report(const EvalReport& rep) {
  std::ostringstream os;
  auto row = [&](const std::string& name, const PRF& p) {
    os << std::left << std::setw(16) << name << std::right << std::setw(10)
       << detail::pct(p.precision()) << std::setw(10) << detail::pct(p.recall())
       << std::setw(10) << detail::pct(p.f1()) << "\n";
  };
  os << "Entities" << std::right << std::setw(18) << "P" << std::setw(10)
     << "R" << std::setw(10) << "F1" << "\n";
  const std::pair<EntityType, const char*> ents[] = {
      {EntityType::Compound, "Compound"}, {EntityType::Bond, "Bond"},
      {EntityType::Method, "Method"},     {EntityType::Solvent, "Solvent"},
      {EntityType::Reaction, "Reaction"}, {EntityType::Pka, "pKa"},
      {EntityType::Value, "pKa value"}};
  double mp = 0, mr = 0, mf = 0;
  for (auto [e, name] : ents) {
    const PRF& p = rep.entities.at(e);
    row(name, p);
    mp += p.precision();
    mr += p.recall();
    mf += p.f1();
  }
  row("micro avg", rep.entity_micro);
  os << std::left << std::setw(16) << "macro avg" << std::right << std::setw(10)
     << detail::pct(mp / 7) << std::setw(10) << detail::pct(mr / 7)
     << std::setw(10) << detail::pct(mf / 7) << "\n";

  os << "\nRelations" << std::right << std::setw(17) << "P" << std::setw(10)
     << "R" << std::setw(10) << "F1" << "\n";
  const std::pair<RelationType, const char*> rels[] = {
      {RelationType::CE, "CE"}, {RelationType::SE, "SE"}, {RelationType::EE, "EE"}};
  mp = mr = mf = 0;
  for (auto [r, name] : rels) {
    const PRF& p = rep.relations.at(r);
    row(name, p);
    mp += p.precision();
    mr += p.recall();
    mf += p.f1();
  }
  row("micro avg", rep.relation_micro);
  os << std::left << std::setw(16) << "macro avg" << std::right << std::setw(10)
     << detail::pct(mp / 3) << std::setw(10) << detail::pct(mr / 3)
     << std::setw(10) << detail::pct(mf / 3) << "\n";
  return os.str();
}

// slot=value machine summary
inline std::string render_summary(const EvalReport& rep) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "entity_micro_p=" << rep.entity_micro.precision() << "\n"
     << "entity_micro_r=" << rep.entity_micro.recall() << "\n"
     << "entity_micro_f1=" << rep.entity_micro.f1() << "\n"
     << "relation_micro_p=" << rep.relation_micro.precision() << "\n"
     << "relation_micro_r=" << rep.relation_micro.recall() << "\n"
     << "relation_micro_f1=" << rep.relation_micro.f1() << "\n";
  for (const auto& [e, p] : rep.entities)
    os << "entity_" << entity_code(e) << "_f1=" << p.f1() << "\n";
  for (const auto& [r, p] : rep.relations)
    os << "relation_" << relation_code(r) << "_f1=" << p.f1() << "\n";
  return os.str();
}

}  // namespace chembe
