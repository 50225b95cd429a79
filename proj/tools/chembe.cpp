// chembe: train, tag and evaluate the joint entity/relation model and
// assemble bond-energy data chains from text and tables.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chembe/corpus.hpp"
#include "chembe/eval.hpp"
#include "chembe/lexicon.hpp"
#include "chembe/model.hpp"
#include "chembe/pipeline.hpp"

namespace fs = std::filesystem;
using namespace chembe;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// write to a temp file, rename on success
void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write file: " + tmp);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

// `key = value` config files; flags given on the command line win
std::map<std::string, std::string> load_config(const std::string& path) {
  std::map<std::string, std::string> out;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    auto h = line.find('#');
    if (h != std::string::npos) line.erase(h);
    auto eq = line.find('=');
    std::string trimmed = line;
    while (!trimmed.empty() && std::isspace((unsigned char)trimmed.back()))
      trimmed.pop_back();
    while (!trimmed.empty() && std::isspace((unsigned char)trimmed.front()))
      trimmed.erase(trimmed.begin());
    if (trimmed.empty()) continue;
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    auto trim = [](std::string s) {
      while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
      while (!s.empty() && std::isspace((unsigned char)s.front()))
        s.erase(s.begin());
      return s;
    };
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

struct Options {
  std::string input, out, model, gold, pred, text, dev, log, summary, config;
  std::vector<std::string> lexicon;
  std::vector<std::string> tables;
  std::string mode = "crf";
  std::uint64_t seed = 7;
  double lr = 0.15;
  std::size_t epochs = 20;
  std::size_t batch = 8;
  double l2 = 1e-4;
};

const std::set<std::string> kConfigKeys = {
    "input", "out",    "model", "gold", "pred", "text", "dev",  "log",
    "summary", "lexicon", "mode",  "seed", "lr",   "epochs", "batch", "l2"};

void apply_config(Options& o, CLI::App* sub) {
  if (o.config.empty()) return;
  auto kv = load_config(o.config);
  auto taken = [&](const std::string& flag) {
    auto* opt = sub->get_option_no_throw("--" + flag);
    return opt && opt->count() > 0;
  };
  for (const auto& [k, v] : kv) {
    if (!kConfigKeys.count(k))
      throw std::runtime_error("unknown config key '" + k + "'");
    if (taken(k)) continue;  // command-line flag wins
    if (k == "input") o.input = v;
    else if (k == "out") o.out = v;
    else if (k == "model") o.model = v;
    else if (k == "gold") o.gold = v;
    else if (k == "pred") o.pred = v;
    else if (k == "text") o.text = v;
    else if (k == "dev") o.dev = v;
    else if (k == "log") o.log = v;
    else if (k == "summary") o.summary = v;
    else if (k == "lexicon") o.lexicon.push_back(v);
    else if (k == "mode") o.mode = v;
    else if (k == "seed") o.seed = std::stoull(v);
    else if (k == "lr") o.lr = std::stod(v);
    else if (k == "epochs") o.epochs = std::stoul(v);
    else if (k == "batch") o.batch = std::stoul(v);
    else if (k == "l2") o.l2 = std::stod(v);
  }
}

Lexicon load_lex(const Options& o) {
  if (o.lexicon.empty())
    throw std::runtime_error("--lexicon is required for this subcommand");
  std::vector<fs::path> paths(o.lexicon.begin(), o.lexicon.end());
  return load_lexicon(paths);
}

TrainConfig make_train_config(const Options& o) {
  TrainConfig c;
  c.learning_rate = o.lr;
  c.epochs = o.epochs;
  c.batch_size = o.batch;
  c.l2 = o.l2;
  c.seed = o.seed;
  if (o.mode == "crf") c.mode = TrainMode::Crf;
  else if (o.mode == "softmax") c.mode = TrainMode::Softmax;
  else throw std::runtime_error("--mode must be 'softmax' or 'crf'");
  return c;
}

int cmd_stats(const Options& o) {
  auto docs = parse_column_file(read_file(o.input));
  std::cout << render_stats(corpus_stats(docs));
  return 0;
}

int cmd_mask(const Options& o) {
  auto lex = load_lex(o);
  auto docs = parse_column_file(read_file(o.input));
  std::string column_out, align_out;
  std::size_t sent_idx = 0;
  for (auto& doc : docs) {
    column_out += "-DOCSTART- " + doc.id + "\n";
    for (auto& sent : doc.sentences) {
      auto matches = match_entities(sent.tokens, lex);
      auto ms = mask(sent.tokens, matches);
      Sentence proj;
      proj.tokens = ms.tokens;
      proj.spans = project_spans(sent.spans, ms);
      auto tags = encode(proj);
      for (std::size_t i = 0; i < ms.tokens.size(); ++i)
        column_out += ms.tokens[i].text + "\t" + tags[i].str() + "\n";
      column_out += "\n";
      for (const auto& [mi, span] : ms.alignment) {
        std::string orig;
        for (std::size_t j = span.first; j < span.second; ++j) {
          if (!orig.empty()) orig += ' ';
          orig += ms.originals[j];
        }
        align_out += std::to_string(sent_idx) + "\t" + std::to_string(mi) +
                     "\t" + std::to_string(span.first) + "\t" +
                     std::to_string(span.second) + "\t" + orig + "\n";
      }
      ++sent_idx;
    }
  }
  write_file_atomic(o.out, column_out);
  write_file_atomic(o.out + ".align", align_out);
  return 0;
}

int cmd_train(const Options& o) {
  auto lex = load_lex(o);
  auto train_docs = parse_column_file(read_file(o.input));
  std::vector<Document> dev_docs;
  if (!o.dev.empty()) dev_docs = parse_column_file(read_file(o.dev));
  auto config = make_train_config(o);
  std::ostringstream log;
  auto model = train(train_docs, dev_docs, lex, config, &log);
  write_file_atomic(o.out, serialize_checkpoint(model));
  if (!o.log.empty()) write_file_atomic(o.log, log.str());
  else std::cout << log.str();
  return 0;
}

int cmd_tag(const Options& o) {
  auto lex = load_lex(o);
  auto model = load_checkpoint(o.model);
  auto docs = parse_column_file(read_file(o.input));
  std::string out;
  for (const auto& doc : docs) {
    out += "-DOCSTART- " + doc.id + "\n";
    for (const auto& sent : doc.sentences) {
      auto pred = predict_sentence(model, lex, sent.tokens);
      for (std::size_t i = 0; i < sent.tokens.size(); ++i)
        out += sent.tokens[i].text + "\t" + pred.tags[i].str() + "\n";
      out += "\n";
    }
  }
  write_file_atomic(o.out, out);
  return 0;
}

int cmd_eval(const Options& o) {
  auto gold_docs = parse_column_file(read_file(o.gold));
  auto pred_docs = parse_column_file(read_file(o.pred), /*strict=*/false);
  if (gold_docs.size() != pred_docs.size())
    throw std::runtime_error("gold and predicted corpora differ in size");
  std::vector<SentencePredictions> sp;
  for (std::size_t d = 0; d < gold_docs.size(); ++d) {
    const auto& g = gold_docs[d];
    const auto& p = pred_docs[d];
    if (g.sentences.size() != p.sentences.size())
      throw std::runtime_error("document " + g.id +
                               ": sentence count mismatch");
    for (std::size_t s = 0; s < g.sentences.size(); ++s) {
      SentencePredictions one;
      auto gd = decode(encode(g.sentences[s]), g.sentences[s].tokens);
      one.gold_mentions = gd.mentions;
      one.gold_relations = gd.relations;
      auto pd = decode(encode(p.sentences[s]), p.sentences[s].tokens);
      one.pred_mentions = pd.mentions;
      one.pred_relations = pd.relations;
      sp.push_back(std::move(one));
    }
  }
  auto rep = evaluate(sp);
  std::cout << render_report(rep);
  if (!o.summary.empty()) write_file_atomic(o.summary, render_summary(rep));
  return 0;
}

TableDoc load_table(const std::string& path) {
  char delim = fs::path(path).extension() == ".tsv" ? '\t' : ',';
  return parse_table(read_file(path), fs::path(path).stem().string(), delim);
}

int cmd_tables(const Options& o) {
  auto lex = load_lex(o);
  auto chains = extract_table_facts(load_table(o.input), lex);
  std::string out = write_chains(chains);
  if (o.out.empty()) std::cout << out;
  else write_file_atomic(o.out, out);
  return 0;
}

int cmd_chains(const Options& o) {
  auto lex = load_lex(o);
  auto model = load_checkpoint(o.model);
  auto docs = parse_column_file(read_file(o.text));

  std::vector<DataChain> text_chains;
  auto preds = predict(model, lex, docs);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    DocumentMentions dm;
    dm.doc_id = docs[d].id;
    for (const auto& sent : preds[d]) {
      dm.tokens.push_back(sent.tokens);
      dm.mentions.push_back(sent.decoded.mentions);
      dm.relations.push_back(sent.decoded.relations);
    }
    auto globals = collect_globals(dm);
    auto asm_res = assemble_chains(dm, globals);
    for (const auto& diag : asm_res.diagnostics)
      std::cerr << "note: " << diag << "\n";
    text_chains.insert(text_chains.end(), asm_res.chains.begin(),
                       asm_res.chains.end());
  }

  std::vector<DataChain> table_chains;
  for (const auto& t : o.tables) {
    auto chains = extract_table_facts(load_table(t), lex);
    table_chains.insert(table_chains.end(), chains.begin(), chains.end());
  }

  auto merged = merge_chains(text_chains, table_chains);
  for (const auto& c : merged.conflicts) std::cerr << "note: " << c << "\n";
  write_file_atomic(o.out, write_chains(merged.chains));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemical bond-energy data chain extraction"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value config file");
    sub->add_option("--lexicon", o.lexicon,
                    "lexicon file or directory (repeatable)");
    sub->add_option("--seed", o.seed, "random seed");
    return sub;
  };

  auto* stats = app.add_subcommand("stats", "corpus statistics");
  stats->add_option("--input", o.input, "column file")->required();

  auto* mask = add_common(app.add_subcommand(
      "mask", "replace compound/bond matches with $CMP$/$BOND$"));
  mask->add_option("--input", o.input, "column file")->required();
  mask->add_option("--out", o.out, "masked column file")->required();

  auto* train = add_common(app.add_subcommand("train", "train the model"));
  train->add_option("--input", o.input, "training column file")->required();
  train->add_option("--dev", o.dev, "development column file");
  train->add_option("--out", o.out, "checkpoint path")->required();
  train->add_option("--mode", o.mode, "softmax|crf");
  train->add_option("--lr", o.lr, "learning rate");
  train->add_option("--epochs", o.epochs, "training epochs");
  train->add_option("--batch", o.batch, "mini-batch size");
  train->add_option("--l2", o.l2, "l2 penalty");
  train->add_option("--log", o.log, "per-epoch training log path");

  auto* tag = add_common(app.add_subcommand("tag", "tag a column file"));
  tag->add_option("--model", o.model, "checkpoint path")->required();
  tag->add_option("--input", o.input, "column file")->required();
  tag->add_option("--out", o.out, "tagged column file")->required();

  auto* ev = app.add_subcommand("eval", "score predictions against gold");
  ev->add_option("--gold", o.gold, "gold column file")->required();
  ev->add_option("--pred", o.pred, "predicted column file")->required();
  ev->add_option("--summary", o.summary, "machine-readable summary path");

  auto* tables = add_common(
      app.add_subcommand("tables", "extract chains from a CSV/TSV table"));
  tables->add_option("--input", o.input, "table file")->required();
  tables->add_option("--out", o.out, "chain records path");

  auto* chains = add_common(app.add_subcommand(
      "chains", "extract and merge chains from text and tables"));
  chains->add_option("--model", o.model, "checkpoint path")->required();
  chains->add_option("--text", o.text, "column file with free text")->required();
  chains->add_option("--tables", o.tables, "table file (repeatable)");
  chains->add_option("--out", o.out, "chain records path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    apply_config(o, sub);
    if (sub == stats) return cmd_stats(o);
    if (sub == mask) return cmd_mask(o);
    if (sub == train) return cmd_train(o);
    if (sub == tag) return cmd_tag(o);
    if (sub == ev) return cmd_eval(o);
    if (sub == tables) return cmd_tables(o);
    if (sub == chains) return cmd_chains(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
