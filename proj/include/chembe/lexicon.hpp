// Chemical knowledge base: compound/solvent dictionaries, bond patterns,
// indication rules, and reversible $CMP$/$BOND$ masking.
#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chembe/corpus.hpp"
#include "chembe/tagscheme.hpp"
#include "chembe/types.hpp"

namespace chembe {

enum class RuleKind : std::uint8_t {
  WordIndication,     // single token matches the pattern
  ContextIndication,  // consecutive-token pattern, @-marked token produced
  Logical,            // token matches both of two &&-joined patterns
};

struct Rule {
  RuleKind kind = RuleKind::WordIndication;
  std::string pattern;
  EntityType produces = EntityType::Compound;  // COMPOUND or BOND
};

// A token-level bond pattern: each element is either the <ELEM> placeholder
// combined with a separator (e.g. "<ELEM>-<ELEM>") or a literal word.
struct BondPattern {
  std::vector<std::string> tokens;
};

inline const std::set<std::string>& element_symbols() {
  static const std::set<std::string> syms = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
      "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
      "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
      "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
      "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
      "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
      "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
      "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
      "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
      "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};
  return syms;
}

// "O-H", "C=C", "N≡N" style single tokens.
inline bool is_bond_token(const std::string& t) {
  static const std::vector<std::string> seps = {"-", "=", "≡"};
  for (const auto& sep : seps) {
    auto p = t.find(sep);
    if (p == std::string::npos || p == 0 || p + sep.size() >= t.size())
      continue;
    if (element_symbols().count(t.substr(0, p)) &&
        element_symbols().count(t.substr(p + sep.size())))
      return true;
  }
  return false;
}

inline std::string to_lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Formula-like terms (digits, or uppercase after position 0 inside a word)
// match case-sensitively; trivial names match case-insensitively.
inline bool term_is_case_sensitive(const std::string& term) {
  bool word_start = true;
  for (std::size_t i = 0; i < term.size(); ++i) {
    unsigned char c = term[i];
    if (std::isdigit(c)) return true;
    if (std::isupper(c) && !word_start) return true;
    word_start = !std::isalpha(c);
  }
  return false;
}

struct Lexicon {
  // term -> token-split form; exact terms keep case, folded terms lowered
  std::set<std::string> compound_terms;
  std::set<std::string> solvent_terms;
  std::vector<BondPattern> bond_patterns;
  std::set<std::string> affixes;  // "naphth-" prefixes, "-oic" suffixes
  std::vector<Rule> rules;

  bool has_solvent(const std::string& s) const {
    if (solvent_terms.count(s)) return true;
    return solvent_terms.count(to_lower(s)) > 0;
  }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline void load_term_file(const std::filesystem::path& p,
                           std::set<std::string>& into) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open lexicon file: " + p.string());
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    while (!line.empty() && std::isspace((unsigned char)line.back()))
      line.pop_back();
    while (!line.empty() && std::isspace((unsigned char)line.front()))
      line.erase(line.begin());
    if (line.empty()) continue;
    into.insert(line);
  }
}

inline void load_bond_file(const std::filesystem::path& p, Lexicon& lex) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open lexicon file: " + p.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    // allow an optional "BOND:" prefix
    auto colon = line.find(':');
    if (colon != std::string::npos && line.substr(0, colon) == "BOND")
      line.erase(0, colon + 1);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    lex.bond_patterns.push_back(BondPattern{toks});
  }
}

inline void load_rule_file(const std::filesystem::path& p, Lexicon& lex) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("cannot open lexicon file: " + p.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab == std::string::npos
                                          ? std::string::npos
                                          : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    auto fail = [&](const std::string& what) {
      throw std::runtime_error(p.string() + ":" + std::to_string(lineno) +
                               ": " + what);
    };
    if (cols.size() != 3) fail("expected KIND<TAB>PATTERN<TAB>ENTITY");
    Rule r;
    if (cols[0] == "WORD_INDICATION") r.kind = RuleKind::WordIndication;
    else if (cols[0] == "CONTEXT_INDICATION") r.kind = RuleKind::ContextIndication;
    else if (cols[0] == "LOGICAL") r.kind = RuleKind::Logical;
    else fail("unknown rule kind '" + cols[0] + "'");
    r.pattern = cols[1];
    if (cols[2] == "COMPOUND") r.produces = EntityType::Compound;
    else if (cols[2] == "BOND") r.produces = EntityType::Bond;
    else fail("rule entity must be COMPOUND or BOND");
    try {  // every sub-pattern must compile
      if (r.kind == RuleKind::Logical) {
        auto amp = r.pattern.find("&&");
        if (amp == std::string::npos) fail("LOGICAL pattern needs '&&'");
        std::regex a(r.pattern.substr(0, amp));
        std::regex b(r.pattern.substr(amp + 2));
      } else if (r.kind == RuleKind::ContextIndication) {
        auto parts = split_ws(r.pattern);
        if (parts.size() > 5) fail("context pattern longer than 5 tokens");
        int targets = 0;
        for (auto part : parts) {
          if (!part.empty() && part[0] == '@') {
            ++targets;
            part.erase(0, 1);
          }
          std::regex re(part);
        }
        if (targets != 1) fail("context pattern needs exactly one @ target");
      } else {
        std::regex re(r.pattern);
      }
    } catch (const std::regex_error&) {
      fail("pattern does not compile: '" + r.pattern + "'");
    }
    lex.rules.push_back(std::move(r));
  }
}

}  // namespace detail

/// Files are classified by name: *compound* -> compound terms,
// *solvent* -> solvent terms, *affix*/*root* -> affixes,
// *bond* -> bond patterns, *rule* -> rules.  Directories load every
// regular file inside.
inline Lexicon load_lexicon(const std::vector<std::filesystem::path>& paths) {
  Lexicon lex;
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      for (const auto& e : std::filesystem::directory_iterator(p))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(p);
    }
  }
  for (const auto& f : files) {
    std::string name = to_lower(f.filename().string());
    if (name.find("compound") != std::string::npos)
      detail::load_term_file(f, lex.compound_terms);
    else if (name.find("solvent") != std::string::npos)
      detail::load_term_file(f, lex.solvent_terms);
    else if (name.find("affix") != std::string::npos ||
             name.find("root") != std::string::npos)
      detail::load_term_file(f, lex.affixes);
    else if (name.find("bond") != std::string::npos)
      detail::load_bond_file(f, lex);
    else if (name.find("rule") != std::string::npos)
      detail::load_rule_file(f, lex);
    else
      throw std::runtime_error("unrecognized lexicon file name: " + f.string());
  }
  if (lex.compound_terms.empty() && lex.bond_patterns.empty() &&
      lex.rules.empty() && lex.affixes.empty() && lex.solvent_terms.empty())
    throw std::runtime_error("lexicon is empty after load");
  return lex;
}

struct LexMatch {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType entity = EntityType::Compound;  // COMPOUND or BOND
  bool from_dictionary = false;

  bool operator==(const LexMatch&) const = default;
};

namespace detail {

inline bool token_matches(const std::string& text, const std::string& pattern) {
  return std::regex_match(text, std::regex(pattern));
}

// candidate matches from every source, unfiltered
inline std::vector<LexMatch> candidates(const std::vector<Token>& tokens,
                                        const Lexicon& lex) {
  std::vector<LexMatch> out;

  // dictionary terms (multi-token, space-joined)
  for (const auto& term : lex.compound_terms) {
    auto parts = split_ws(term);
    if (parts.empty()) continue;
    bool cs = term_is_case_sensitive(term);
    for (std::size_t i = 0; i + parts.size() <= tokens.size(); ++i) {
      bool ok = true;
      for (std::size_t j = 0; j < parts.size() && ok; ++j) {
        const std::string& t = tokens[i + j].text;
        ok = cs ? t == parts[j] : to_lower(t) == to_lower(parts[j]);
      }
      if (ok)
        out.push_back(LexMatch{i, i + parts.size(), EntityType::Compound, true});
    }
  }

  // affixes: "xxx-" prefix, "-xxx" suffix, single-token compounds
  for (const auto& affix : lex.affixes) {
    bool prefix = !affix.empty() && affix.back() == '-';
    bool suffix = !affix.empty() && affix.front() == '-';
    std::string stem = affix;
    if (prefix) stem.pop_back();
    if (suffix) stem.erase(stem.begin());
    if (stem.empty()) continue;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::string t = to_lower(tokens[i].text);
      const std::string s = to_lower(stem);
      bool hit = prefix   ? t.rfind(s, 0) == 0 && t.size() > s.size()
                 : suffix ? t.size() > s.size() &&
                                t.compare(t.size() - s.size(), s.size(), s) == 0
                          : t == s;
      if (hit) out.push_back(LexMatch{i, i + 1, EntityType::Compound, true});
    }
  }

  // built-in bond pattern: ELEM(-|=|≡)ELEM, optional following "bond"
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!is_bond_token(tokens[i].text)) continue;
    std::size_t end = i + 1;
    if (end < tokens.size() && to_lower(tokens[end].text) == "bond") ++end;
    out.push_back(LexMatch{i, end, EntityType::Bond, false});
  }

  // file-specified bond patterns
  for (const auto& bp : lex.bond_patterns) {
    for (std::size_t i = 0; i + bp.tokens.size() <= tokens.size(); ++i) {
      bool ok = true;
      for (std::size_t j = 0; j < bp.tokens.size() && ok; ++j) {
        const std::string& pat = bp.tokens[j];
        const std::string& t = tokens[i + j].text;
        if (pat.find("<ELEM>") != std::string::npos) {
          // substitute the placeholder and compare structurally
          std::string expect = pat;
          std::string txt = t;
          // match by scanning: replace each <ELEM> with a greedy element take
          bool m = true;
          std::size_t pi = 0, ti = 0;
          while (pi < expect.size() && m) {
            if (expect.compare(pi, 6, "<ELEM>") == 0) {
              // try 2-char then 1-char symbol
              if (ti + 1 < txt.size() &&
                  element_symbols().count(txt.substr(ti, 2))) {
                ti += 2;
              } else if (ti < txt.size() &&
                         element_symbols().count(txt.substr(ti, 1))) {
                ti += 1;
              } else {
                m = false;
              }
              pi += 6;
            } else {
              m = ti < txt.size() && txt[ti] == expect[pi];
              ++ti;
              ++pi;
            }
          }
          ok = m && ti == txt.size();
        } else {
          ok = to_lower(t) == to_lower(pat);
        }
      }
      if (ok)
        out.push_back(
            LexMatch{i, i + bp.tokens.size(), EntityType::Bond, false});
    }
  }

  // indication rules
  for (const auto& r : lex.rules) {
    switch (r.kind) {
      case RuleKind::WordIndication:
        for (std::size_t i = 0; i < tokens.size(); ++i)
          if (token_matches(tokens[i].text, r.pattern))
            out.push_back(LexMatch{i, i + 1, r.produces, false});
        break;
      case RuleKind::Logical: {
        auto amp = r.pattern.find("&&");
        std::string a = r.pattern.substr(0, amp);
        std::string b = r.pattern.substr(amp + 2);
        for (std::size_t i = 0; i < tokens.size(); ++i)
          if (token_matches(tokens[i].text, a) &&
              token_matches(tokens[i].text, b))
            out.push_back(LexMatch{i, i + 1, r.produces, false});
        break;
      }
      case RuleKind::ContextIndication: {
        auto parts = split_ws(r.pattern);
        std::size_t target = 0;
        std::vector<std::string> pats;
        for (std::size_t j = 0; j < parts.size(); ++j) {
          std::string p = parts[j];
          if (!p.empty() && p[0] == '@') {
            target = j;
            p.erase(0, 1);
          }
          pats.push_back(p);
        }
        for (std::size_t i = 0; i + pats.size() <= tokens.size(); ++i) {
          bool ok = true;
          for (std::size_t j = 0; j < pats.size() && ok; ++j)
            ok = token_matches(tokens[i + j].text, pats[j]);
          if (ok)
            out.push_back(
                LexMatch{i + target, i + target + 1, r.produces, false});
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

// Leftmost-longest selection over all candidate matches; on equal spans a
// dictionary match beats a rule match.  Output is disjoint and start-sorted.
inline std::vector<LexMatch> match_entities(const std::vector<Token>& tokens,
                                            const Lexicon& lex) {
  auto cand = detail::candidates(tokens, lex);
  std::sort(cand.begin(), cand.end(), [](const LexMatch& a, const LexMatch& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;  // longer first
    return a.from_dictionary > b.from_dictionary;
  });
  std::vector<LexMatch> out;
  std::size_t covered = 0;  // first free token index
  for (const auto& m : cand) {
    if (m.start < covered) continue;
    out.push_back(m);
    covered = m.end;
  }
  return out;
}

struct MaskedSentence {
  std::vector<Token> tokens;
  // masked-token index -> original (start, end)
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> alignment;
  std::vector<std::string> originals;  // pre-mask token texts
};

inline MaskedSentence mask(const std::vector<Token>& tokens,
                           const std::vector<LexMatch>& matches) {
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (matches[i].start >= matches[i].end || matches[i].end > tokens.size())
      throw std::invalid_argument("match out of bounds");
    for (std::size_t j = i + 1; j < matches.size(); ++j)
      if (matches[i].start < matches[j].end &&
          matches[j].start < matches[i].end)
        throw std::invalid_argument("overlapping matches");
  }
  auto sorted = matches;
  std::sort(sorted.begin(), sorted.end(),
            [](const LexMatch& a, const LexMatch& b) { return a.start < b.start; });

  MaskedSentence out;
  for (const auto& t : tokens) out.originals.push_back(t.text);
  std::size_t i = 0, mi = 0;
  while (i < tokens.size()) {
    if (mi < sorted.size() && sorted[mi].start == i) {
      const auto& m = sorted[mi];
      std::string mark =
          m.entity == EntityType::Compound ? kCompoundMark : kBondMark;
      out.alignment[out.tokens.size()] = {m.start, m.end};
      out.tokens.push_back(Token{mark, out.tokens.size()});
      i = m.end;
      ++mi;
    } else {
      out.tokens.push_back(Token{tokens[i].text, out.tokens.size()});
      ++i;
    }
  }
  return out;
}

struct UnmaskResult {
  std::vector<Token> tokens;
  std::vector<JointTag> tags;
};

// Expand mark tokens back to their original spans; a B- tag on a mark becomes
// B- followed by I- over the restored tokens, an I- or O tag is carried over
// each restored token.
inline UnmaskResult unmask(const MaskedSentence& masked,
                           const std::vector<JointTag>& tags) {
  if (tags.size() != masked.tokens.size())
    throw std::invalid_argument("tag count does not match masked token count");
  UnmaskResult out;
  for (std::size_t i = 0; i < masked.tokens.size(); ++i) {
    auto it = masked.alignment.find(i);
    if (it == masked.alignment.end()) {
      out.tokens.push_back(Token{masked.tokens[i].text, out.tokens.size()});
      out.tags.push_back(tags[i]);
      continue;
    }
    auto [start, end] = it->second;
    for (std::size_t j = start; j < end; ++j) {
      out.tokens.push_back(Token{masked.originals[j], out.tokens.size()});
      JointTag t = tags[i];
      if (!t.is_o && j > start) t.position = TagPosition::I;
      out.tags.push_back(t);
    }
  }
  return out;
}

}  // namespace chembe
