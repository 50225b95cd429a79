// End-to-end chain extraction: rule-based table facts, document-global
// entity collection, anchor-grouped chain assembly and text/table merge.
#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chembe/lexicon.hpp"
#include "chembe/tagscheme.hpp"
#include "chembe/types.hpp"

#include <json.hpp>

namespace chembe {

struct TableDoc {
  std::string id;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

enum class FactSlot : std::uint8_t {
  Compound,
  Solvent,
  PkaValue,
  Bond,
  Reaction,
  Method,
};

inline const char* slot_name(FactSlot s) {
  switch (s) {
    case FactSlot::Compound: return "compound";
    case FactSlot::Solvent: return "solvent";
    case FactSlot::PkaValue: return "pka_value";
    case FactSlot::Bond: return "bond";
    case FactSlot::Reaction: return "reaction";
    case FactSlot::Method: return "method";
  }
  return "?";
}

enum class Provenance : std::uint8_t { Table, Text };

struct Fact {
  FactSlot slot = FactSlot::Compound;
  std::string value;
  Provenance provenance = Provenance::Text;
  std::string doc_id;
  std::size_t location = 0;  // row index (table) or sentence index (text)

  bool operator==(const Fact&) const = default;
};

struct DataChain {
  std::string compound;
  std::optional<std::string> reaction;
  std::optional<std::string> solvent;
  std::optional<std::string> bond;
  std::optional<std::string> method;
  std::optional<double> pka_value;
  std::vector<Fact> provenance;
};

// ---------------------------------------------------------------------------
// CSV / TSV tables

// RFC 4180 quoting for CSV; TSV is a plain tab split.
inline TableDoc parse_table(const std::string& text, const std::string& id,
                            char delim = ',') {
  TableDoc t;
  t.id = id;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;

  auto end_cell = [&]() {
    row.push_back(cell);
    cell.clear();
  };
  auto end_row = [&]() {
    end_cell();
    if (t.header.empty()) t.header = row;
    else t.rows.push_back(row);
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"' && delim == ',' && cell.empty()) {
      quoted = true;
    } else if (c == delim) {
      end_cell();
    } else if (c == '\n') {
      if (!cell.empty() || !row.empty()) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        end_row();
      }
    } else {
      cell += c;
    }
  }
  if (!cell.empty() || !row.empty()) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    end_row();
  }
  (void)any;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.rows[r].size() != t.header.size())
      throw std::runtime_error("table " + id + ": row " + std::to_string(r + 1) +
                               " has " + std::to_string(t.rows[r].size()) +
                               " cells, header has " +
                               std::to_string(t.header.size()));
  return t;
}

namespace detail {

inline std::string trim(std::string s) {
  while (!s.empty() && std::isspace((unsigned char)s.front())) s.erase(s.begin());
  while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
  return s;
}

inline std::optional<double> parse_real(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<FactSlot> classify_header(const std::string& label) {
  std::string h = to_lower(trim(label));
  auto has = [&](const char* kw) { return h.find(kw) != std::string::npos; };
  if (has("compound") || has("substrate")) return FactSlot::Compound;
  if (has("solvent")) return FactSlot::Solvent;
  if (has("pka") || has("bde")) return FactSlot::PkaValue;
  if (has("bond")) return FactSlot::Bond;
  if (has("method")) return FactSlot::Method;
  if (has("reaction")) return FactSlot::Reaction;
  return std::nullopt;
}

}  // namespace detail

// Header-keyword column classification with lexicon confirmation; each row
// with a compound and a numeric pKa cell becomes one chain.
inline std::vector<DataChain> extract_table_facts(const TableDoc& table,
                                                  const Lexicon& lex) {
  std::vector<std::pair<std::size_t, FactSlot>> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (auto slot = detail::classify_header(table.header[c]))
      cols.emplace_back(c, *slot);

  std::vector<DataChain> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    DataChain chain;
    bool have_value = false;
    for (auto [c, slot] : cols) {
      std::string cell = detail::trim(table.rows[r][c]);
      if (cell.empty()) continue;
      Fact fact{slot, cell, Provenance::Table, table.id, r};
      switch (slot) {
        case FactSlot::Compound: {
          // lexicon confirmation: the cell must contain a dictionary, affix
          // or rule match when compound sources are loaded
          bool confirmed = lex.compound_terms.empty() && lex.affixes.empty() &&
                           lex.rules.empty();
          if (!confirmed) {
            std::vector<Token> toks;
            std::istringstream in(cell);
            std::string t;
            while (in >> t) toks.push_back(Token{t, toks.size()});
            for (const auto& m : match_entities(toks, lex))
              if (m.entity == EntityType::Compound) confirmed = true;
          }
          if (confirmed) {
            chain.compound = cell;
            chain.provenance.push_back(fact);
          }
          break;
        }
        case FactSlot::Solvent:
          if (lex.solvent_terms.empty() || lex.has_solvent(cell)) {
            chain.solvent = cell;
            chain.provenance.push_back(fact);
          }
          break;
        case FactSlot::PkaValue:
          if (auto v = detail::parse_real(cell)) {
            chain.pka_value = *v;
            have_value = true;
            chain.provenance.push_back(fact);
          }
          break;
        case FactSlot::Bond:
          chain.bond = cell;
          chain.provenance.push_back(fact);
          break;
        case FactSlot::Reaction:
          chain.reaction = cell;
          chain.provenance.push_back(fact);
          break;
        case FactSlot::Method:
          chain.method = cell;
          chain.provenance.push_back(fact);
          break;
      }
    }
    if (!chain.compound.empty() && have_value) out.push_back(std::move(chain));
  }
  return out;
}

// ---------------------------------------------------------------------------
// free-text side

struct DocumentMentions {
  std::string doc_id;
  // per sentence: surface-resolved mentions and relations
  std::vector<std::vector<EntityMention>> mentions;
  std::vector<std::vector<RelationInstance>> relations;
  std::vector<std::vector<Token>> tokens;
};

inline std::string mention_text(const std::vector<Token>& tokens,
                                const EntityMention& m) {
  std::string s;
  for (std::size_t i = m.start; i < m.end; ++i) {
    if (!s.empty()) s += ' ';
    s += tokens[i].text;
  }
  return s;
}

// Most frequent surface string per global type; ties go to the earliest
// first occurrence.
inline std::map<EntityType, std::string> collect_globals(
    const DocumentMentions& doc) {
  std::map<EntityType, std::string> out;
  for (EntityType g :
       {EntityType::Bond, EntityType::Reaction, EntityType::Method}) {
    std::map<std::string, std::size_t> freq;
    std::map<std::string, std::size_t> first_seen;
    std::size_t counter = 0;
    for (std::size_t s = 0; s < doc.mentions.size(); ++s)
      for (const auto& m : doc.mentions[s]) {
        ++counter;
        if (m.entity != g) continue;
        std::string text = mention_text(doc.tokens[s], m);
        ++freq[text];
        first_seen.emplace(text, counter);
      }
    if (freq.empty()) continue;
    std::string best;
    for (const auto& [text, n] : freq) {
      if (best.empty() || n > freq[best] ||
          (n == freq[best] && first_seen[text] < first_seen[best]))
        best = text;
    }
    out[g] = best;
  }
  return out;
}

struct AssemblyResult {
  std::vector<DataChain> chains;
  std::vector<std::string> diagnostics;  // incomplete anchors, bad values
};

// Group relations by PKA anchor; one chain per CE subject at each anchor.
inline AssemblyResult assemble_chains(
    const DocumentMentions& doc, const std::map<EntityType, std::string>& globals) {
  AssemblyResult out;
  for (std::size_t s = 0; s < doc.relations.size(); ++s) {
    // anchor key within the sentence: the mention span
    std::map<std::pair<std::size_t, std::size_t>,
             std::vector<const RelationInstance*>>
        by_anchor;
    for (const auto& r : doc.relations[s])
      by_anchor[{r.anchor.start, r.anchor.end}].push_back(&r);

    for (const auto& [anchor_span, rels] : by_anchor) {
      std::vector<const RelationInstance*> ce, se, ee;
      for (const auto* r : rels) {
        if (r->kind == RelationType::CE) ce.push_back(r);
        else if (r->kind == RelationType::SE) se.push_back(r);
        else if (r->kind == RelationType::EE) ee.push_back(r);
      }
      if (ce.empty()) {
        out.diagnostics.push_back(
            doc.doc_id + ": sentence " + std::to_string(s) +
            ": pKa anchor at [" + std::to_string(anchor_span.first) + "," +
            std::to_string(anchor_span.second) + ") has no compound subject");
        continue;
      }
      // nearest SE subject if several
      const RelationInstance* solvent = nullptr;
      for (const auto* r : se) {
        auto dist = [&](const RelationInstance* x) {
          return x->subject.start > anchor_span.first
                     ? x->subject.start - anchor_span.first
                     : anchor_span.first - x->subject.start;
        };
        if (!solvent || dist(r) < dist(solvent)) solvent = r;
      }
      if (se.size() > 1)
        out.diagnostics.push_back(doc.doc_id + ": sentence " +
                                  std::to_string(s) +
                                  ": several solvent subjects at one anchor");

      for (const auto* c : ce) {
        DataChain chain;
        chain.compound = mention_text(doc.tokens[s], c->subject);
        chain.provenance.push_back(Fact{FactSlot::Compound, chain.compound,
                                        Provenance::Text, doc.doc_id, s});
        if (solvent) {
          chain.solvent = mention_text(doc.tokens[s], solvent->subject);
          chain.provenance.push_back(Fact{FactSlot::Solvent, *chain.solvent,
                                          Provenance::Text, doc.doc_id, s});
        }
        if (!ee.empty()) {
          std::string vtext = mention_text(doc.tokens[s], ee.front()->subject);
          if (auto v = detail::parse_real(vtext)) {
            chain.pka_value = *v;
            chain.provenance.push_back(Fact{FactSlot::PkaValue, vtext,
                                            Provenance::Text, doc.doc_id, s});
          } else {
            out.diagnostics.push_back(doc.doc_id + ": sentence " +
                                      std::to_string(s) +
                                      ": unparseable pKa value '" + vtext + "'");
          }
        }
        auto fill_global = [&](EntityType g, std::optional<std::string>& slot,
                               FactSlot fs) {
          auto it = globals.find(g);
          if (it == globals.end()) return;
          slot = it->second;
          chain.provenance.push_back(
              Fact{fs, it->second, Provenance::Text, doc.doc_id, s});
        };
        fill_global(EntityType::Bond, chain.bond, FactSlot::Bond);
        fill_global(EntityType::Reaction, chain.reaction, FactSlot::Reaction);
        fill_global(EntityType::Method, chain.method, FactSlot::Method);
        out.chains.push_back(std::move(chain));
      }
    }
  }
  return out;
}

struct MergeResult {
  std::vector<DataChain> chains;
  std::vector<std::string> conflicts;
};

// Merge on (compound case-insensitive, pKa value within 0.05); table
// provenance wins pKa conflicts.  Output sorted by (compound, value).
inline MergeResult merge_chains(const std::vector<DataChain>& text_chains,
                                const std::vector<DataChain>& table_chains) {
  MergeResult out;
  std::vector<DataChain> all;
  all.insert(all.end(), text_chains.begin(), text_chains.end());
  all.insert(all.end(), table_chains.begin(), table_chains.end());

  auto value_of = [](const DataChain& c, FactSlot slot) -> bool {
    for (const auto& f : c.provenance)
      if (f.slot == slot && f.provenance == Provenance::Table) return true;
    return false;
  };

  auto same_key = [](const DataChain& a, const DataChain& b) {
    if (to_lower(a.compound) != to_lower(b.compound)) return false;
    if (a.pka_value.has_value() != b.pka_value.has_value()) return false;
    if (a.pka_value && std::abs(*a.pka_value - *b.pka_value) > 0.05)
      return false;
    return true;
  };

  for (const auto& c : all) {
    DataChain* target = nullptr;
    for (auto& m : out.chains)
      if (same_key(m, c)) target = &m;
    if (!target) {
      out.chains.push_back(c);
      continue;
    }
    DataChain& m = *target;
    auto fill = [&](std::optional<std::string>& dst,
                    const std::optional<std::string>& src) {
      if (!dst && src) dst = src;
    };
    fill(m.reaction, c.reaction);
    fill(m.solvent, c.solvent);
    fill(m.bond, c.bond);
    fill(m.method, c.method);
    if (c.pka_value && m.pka_value && *c.pka_value != *m.pka_value) {
      bool c_table = value_of(c, FactSlot::PkaValue);
      bool m_table = value_of(m, FactSlot::PkaValue);
      if (c_table && !m_table) {
        out.conflicts.push_back("pKa conflict for '" + m.compound + "': " +
                                std::to_string(*m.pka_value) + " (text) vs " +
                                std::to_string(*c.pka_value) +
                                " (table); table value kept");
        m.pka_value = c.pka_value;
      } else if (c_table == m_table) {
        out.conflicts.push_back("pKa conflict for '" + m.compound +
                                "': kept " + std::to_string(*m.pka_value));
      }
    } else if (c.pka_value && !m.pka_value) {
      m.pka_value = c.pka_value;
    }
    for (const auto& f : c.provenance) {
      if (std::find(m.provenance.begin(), m.provenance.end(), f) ==
          m.provenance.end())
        m.provenance.push_back(f);
    }
  }

  std::sort(out.chains.begin(), out.chains.end(),
            [](const DataChain& a, const DataChain& b) {
              std::string ca = to_lower(a.compound), cb = to_lower(b.compound);
              if (ca != cb) return ca < cb;
              double va = a.pka_value.value_or(-1e300);
              double vb = b.pka_value.value_or(-1e300);
              return va < vb;
            });
  return out;
}

// ---------------------------------------------------------------------------
// chain records: one JSON object per line, fixed field order, null for
// absent slots

inline std::string write_chains(const std::vector<DataChain>& chains) {
  std::string out;
  for (const auto& c : chains) {
    nlohmann::ordered_json j;
    j["compound"] = c.compound;
    j["reaction"] = c.reaction ? nlohmann::json(*c.reaction) : nullptr;
    j["solvent"] = c.solvent ? nlohmann::json(*c.solvent) : nullptr;
    j["bond"] = c.bond ? nlohmann::json(*c.bond) : nullptr;
    j["method"] = c.method ? nlohmann::json(*c.method) : nullptr;
    j["pka_value"] = c.pka_value ? nlohmann::json(*c.pka_value) : nullptr;
    nlohmann::ordered_json prov = nlohmann::ordered_json::array();
    for (const auto& f : c.provenance) {
      nlohmann::ordered_json pj;
      pj["slot"] = slot_name(f.slot);
      pj["source"] = f.provenance == Provenance::Table ? "table" : "text";
      pj["doc"] = f.doc_id;
      pj["index"] = f.location;
      prov.push_back(pj);
    }
    j["provenance"] = prov;
    out += j.dump();
    out += "\n";
  }
  return out;
}

}  // namespace chembe
