// Tokenization, column-format I/O, corpus statistics and deterministic splits.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "chembe/tagscheme.hpp"
#include "chembe/types.hpp"

namespace chembe {

inline constexpr const char* kCompoundMark = "$CMP$";
inline constexpr const char* kBondMark = "$BOND$";

// Whitespace split, then detach leading brackets and trailing brackets /
// sentence punctuation (. , ; :) as separate tokens.  Interior hyphens,
// digits and commas stay put so chemical names survive intact.
inline std::vector<Token> tokenize(const std::string& raw) {
  std::vector<Token> out;
  auto push = [&](const std::string& text) {
    if (text == kCompoundMark || text == kBondMark)
      throw std::invalid_argument("reserved mark token in raw input: " + text);
    out.push_back(Token{text, out.size()});
  };
  std::istringstream in(raw);
  std::string chunk;
  auto is_open = [](char c) { return c == '(' || c == '[' || c == '{'; };
  auto is_trail = [](char c) {
    return c == ')' || c == ']' || c == '}' || c == '.' || c == ',' ||
           c == ';' || c == ':';
  };
  while (in >> chunk) {
    std::vector<std::string> lead, trail;
    while (chunk.size() > 1 && is_open(chunk.front())) {
      lead.push_back(std::string(1, chunk.front()));
      chunk.erase(chunk.begin());
    }
    while (chunk.size() > 1 && is_trail(chunk.back())) {
      trail.insert(trail.begin(), std::string(1, chunk.back()));
      chunk.pop_back();
    }
    for (const auto& t : lead) push(t);
    push(chunk);
    for (const auto& t : trail) push(t);
  }
  return out;
}

// Column format: `token<TAB>tag` lines, blank line between sentences,
// `-DOCSTART- <docid>` between documents.
inline std::vector<Document> parse_column_file(const std::string& text,
                                               bool strict = true) {
  std::vector<Document> docs;
  Document cur_doc;
  Sentence cur_sent;
  bool have_doc = false;

  auto flush_sentence = [&]() {
    if (cur_sent.tokens.empty()) return;
    validate_sentence(cur_sent);
    cur_doc.sentences.push_back(std::move(cur_sent));
    cur_sent = Sentence{};
  };
  auto flush_doc = [&]() {
    flush_sentence();
    if (have_doc) docs.push_back(std::move(cur_doc));
    cur_doc = Document{};
  };

  // open span being built from B-/I- tags
  bool in_span = false;
  EntitySpan open;

  auto close_span = [&]() {
    if (in_span) cur_sent.spans.push_back(open);
    in_span = false;
  };

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      close_span();
      flush_sentence();
      continue;
    }
    if (line.rfind("-DOCSTART-", 0) == 0) {
      close_span();
      flush_doc();
      have_doc = true;
      std::string id = line.substr(std::string("-DOCSTART-").size());
      while (!id.empty() && (id.front() == ' ' || id.front() == '\t'))
        id.erase(id.begin());
      cur_doc.id = id;
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected token<TAB>tag");
    std::string tok = line.substr(0, tab);
    std::string tagstr = line.substr(tab + 1);
    auto tag = parse_tag(tagstr);
    if (!tag)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": malformed tag '" + tagstr + "'");
    if (!have_doc) {  // tokens before any -DOCSTART- form an implicit doc
      have_doc = true;
      cur_doc.id = "doc";
    }
    std::size_t idx = cur_sent.tokens.size();
    cur_sent.tokens.push_back(Token{tok, idx});

    if (tag->is_o) {
      close_span();
    } else if (tag->position == TagPosition::B) {
      close_span();
      in_span = true;
      open = EntitySpan{idx, idx + 1, tag->entity, tag->relation};
    } else {  // I-
      if (in_span && open.entity == tag->entity &&
          open.relation == tag->relation) {
        open.end = idx + 1;
      } else if (strict) {
        throw std::runtime_error("line " + std::to_string(lineno) +
                                 ": orphan I- tag '" + tagstr + "'");
      } else {  // lenient: repair to B-
        close_span();
        in_span = true;
        open = EntitySpan{idx, idx + 1, tag->entity, tag->relation};
      }
    }
  }
  close_span();
  flush_doc();
  return docs;
}

inline std::string write_column_file(const std::vector<Document>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    out += "-DOCSTART- " + doc.id + "\n";
    for (const auto& sent : doc.sentences) {
      auto tags = encode(sent);
      for (std::size_t i = 0; i < sent.tokens.size(); ++i)
        out += sent.tokens[i].text + "\t" + tags[i].str() + "\n";
      out += "\n";
    }
  }
  return out;
}

inline StatsReport corpus_stats(const std::vector<Document>& docs) {
  StatsReport r;
  for (EntityType e : kAllEntities) r.mention_counts[e] = 0;
  r.document_count = docs.size();
  for (const auto& doc : docs)
    for (const auto& sent : doc.sentences) {
      ++r.sentence_count;
      r.token_count += sent.tokens.size();
      for (const auto& sp : sent.spans) ++r.mention_counts[sp.entity];
    }
  return r;
}

// Row order follows the corpus statistics table layout.
inline std::string render_stats(const StatsReport& r) {
  std::ostringstream os;
  os << "Documents\t" << r.document_count << "\n"
     << "Sentences\t" << r.sentence_count << "\n"
     << "Tokens\t" << r.token_count << "\n";
  const EntityType order[] = {EntityType::Compound, EntityType::Solvent,
                              EntityType::Reaction, EntityType::Method,
                              EntityType::Bond,     EntityType::Pka,
                              EntityType::Value};
  for (EntityType e : order)
    os << entity_name(e) << "\t" << r.mention_counts.at(e) << "\n";
  return os.str();
}

// Document-level partition, deterministic in the seed.  Fisher-Yates with an
// explicit mt19937_64 draw so results do not depend on the standard library.
inline std::tuple<std::vector<Document>, std::vector<Document>,
                  std::vector<Document>>
split_corpus(const std::vector<Document>& docs, double train_ratio,
             double dev_ratio, double test_ratio, std::uint64_t seed) {
  if (train_ratio < 0 || dev_ratio < 0 || test_ratio < 0 ||
      std::abs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must be >= 0 and sum to 1");

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng() % i]);

  std::size_t n = docs.size();
  std::size_t n_train = static_cast<std::size_t>(n * train_ratio + 0.5);
  std::size_t n_dev = static_cast<std::size_t>(n * dev_ratio + 0.5);
  if (n_train > n) n_train = n;
  if (n_train + n_dev > n) n_dev = n - n_train;

  std::vector<Document> train, dev, test;
  for (std::size_t i = 0; i < n; ++i) {
    const Document& d = docs[order[i]];
    if (i < n_train) train.push_back(d);
    else if (i < n_train + n_dev) dev.push_back(d);
    else test.push_back(d);
  }
  return {train, dev, test};
}

}  // namespace chembe
