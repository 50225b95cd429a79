// End-to-end checks of the command-line tool.  The binary path and fixture
// directory come in as compile definitions.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "chembe/corpus.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = CHEMBE_CLI_PATH;
const std::string kFixtures = FIXTURES_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  REQUIRE(f);
  f << content;
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / "chembe_cli_io";
  fs::create_directories(dir);
  fs::path out = dir / ("out" + std::to_string(counter));
  fs::path err = dir / ("err" + std::to_string(counter));
  ++counter;
  std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" +
                    err.string();
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// a small synthetic corpus written to disk once per process
struct CliFixture {
  fs::path dir;
  fs::path train_file, dev_file, lexicon_dir;

  CliFixture() {
    dir = fs::temp_directory_path() / "chembe_cli_fixture";
    fs::create_directories(dir);
    auto corpus = synth::make_corpus(60, 21);
    auto [tr, de, te] = chembe::split_corpus(corpus, 0.8, 0.1, 0.1, 21);
    train_file = dir / "train.conll";
    dev_file = dir / "dev.conll";
    spit(train_file, chembe::write_column_file(tr));
    spit(dev_file, chembe::write_column_file(de));
    lexicon_dir = dir / "lexicon";
    fs::create_directories(lexicon_dir);
    auto lex = synth::make_lexicon();
    std::string compounds, solvents;
    for (const auto& t : lex.compound_terms) compounds += t + "\n";
    for (const auto& t : lex.solvent_terms) solvents += t + "\n";
    spit(lexicon_dir / "compounds.txt", compounds);
    spit(lexicon_dir / "solvents.txt", solvents);
  }
};

const CliFixture& fixture() {
  static CliFixture f;
  return f;
}

std::string quick_train_flags() {
  return " --lexicon " + fixture().lexicon_dir.string() +
         " --epochs 3 --seed 7";
}

}  // namespace

TEST_CASE("no subcommand is a usage error") {
  auto r = run("");
  CHECK(r.exit_code == 1);
}

TEST_CASE("missing input file is a data error") {
  auto r = run("stats --input /nonexistent/x.conll");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("stats reports corpus counts") {
  auto r = run("stats --input " + kFixtures + "/chain_docs.conll");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("Documents\t3") != std::string::npos);
  CHECK(r.out.find("Sentences\t4") != std::string::npos);
  CHECK(r.out.find("Compound\t4") != std::string::npos);
}

TEST_CASE("mask writes a masked file and an alignment sidecar") {
  const auto& f = fixture();
  fs::path out = f.dir / "masked.conll";
  auto r = run("mask --input " + kFixtures + "/chain_docs.conll --lexicon " +
               kFixtures + "/lexicon/compounds.txt --lexicon " + kFixtures +
               "/lexicon/solvents.txt --out " + out.string());
  REQUIRE(r.exit_code == 0);
  auto masked = slurp(out);
  CHECK(masked.find("$CMP$") != std::string::npos);
  CHECK(masked.find("$BOND$") != std::string::npos);  // built-in O-H pattern
  auto align = slurp(out.string() + ".align");
  CHECK(align.find("phenol") != std::string::npos);
  CHECK(align.find("benzoic acid") != std::string::npos);
}

TEST_CASE("train, tag and eval round trip") {
  const auto& f = fixture();
  fs::path model = f.dir / "model.bin";
  auto r = run("train --input " + f.train_file.string() + " --dev " +
               f.dev_file.string() + " --out " + model.string() +
               quick_train_flags());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(model));
  // log lines: epoch, loss, dev entity f1, dev relation f1
  std::istringstream log(r.out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 3);

  fs::path tagged = f.dir / "tagged.conll";
  auto rt = run("tag --model " + model.string() + " --input " +
                f.dev_file.string() + " --lexicon " +
                f.lexicon_dir.string() + " --out " + tagged.string());
  REQUIRE(rt.exit_code == 0);
  auto pred_docs = chembe::parse_column_file(slurp(tagged), false);
  auto gold_docs = chembe::parse_column_file(slurp(f.dev_file));
  REQUIRE(pred_docs.size() == gold_docs.size());

  auto re = run("eval --gold " + f.dev_file.string() + " --pred " +
                tagged.string());
  REQUIRE(re.exit_code == 0);
  CHECK(re.out.find("%") != std::string::npos);
  CHECK(re.out.find("Compound") != std::string::npos);

  // self-eval is perfect
  auto rs = run("eval --gold " + f.dev_file.string() + " --pred " +
                f.dev_file.string());
  REQUIRE(rs.exit_code == 0);
  CHECK(rs.out.find("100.00%") != std::string::npos);
}

TEST_CASE("training is deterministic across runs") {
  const auto& f = fixture();
  fs::path m1 = f.dir / "det1.bin", m2 = f.dir / "det2.bin";
  auto flags = "train --input " + f.train_file.string() + quick_train_flags();
  REQUIRE(run(flags + " --out " + m1.string()).exit_code == 0);
  REQUIRE(run(flags + " --out " + m2.string()).exit_code == 0);
  CHECK(slurp(m1) == slurp(m2));
}

TEST_CASE("config file supplies flags, command line wins") {
  const auto& f = fixture();
  fs::path cfg = f.dir / "train.cfg";
  spit(cfg, "epochs = 2\nseed = 7  # comment\nlr = 0.1\n");
  fs::path model = f.dir / "cfg_model.bin";
  // --epochs 1 on the command line beats epochs = 2 from the config
  auto r = run("train --input " + f.train_file.string() + " --lexicon " +
               f.lexicon_dir.string() + " --config " + cfg.string() +
               " --epochs 1 --out " + model.string());
  REQUIRE(r.exit_code == 0);
  std::istringstream log(r.out);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) ++lines;
  CHECK(lines == 1);
}

TEST_CASE("unknown config keys are rejected") {
  const auto& f = fixture();
  fs::path cfg = f.dir / "bad.cfg";
  spit(cfg, "learning_rate = 0.1\n");
  auto r = run("train --input " + f.train_file.string() + " --lexicon " +
               f.lexicon_dir.string() + " --config " + cfg.string() +
               " --out " + (f.dir / "x.bin").string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("unknown config key") != std::string::npos);
}

TEST_CASE("tables subcommand extracts chain records") {
  auto r = run("tables --input " + kFixtures + "/d3.csv --lexicon " +
               kFixtures + "/lexicon/compounds.txt --lexicon " + kFixtures +
               "/lexicon/solvents.txt");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("\"compound\":\"phenol\"") != std::string::npos);
  CHECK(r.out.find("\"pka_value\":10.0") != std::string::npos);
  // the n.d. row is dropped
  CHECK(r.out.find("acetic") == std::string::npos);
}

TEST_CASE("chains subcommand merges text and table chains") {
  const auto& f = fixture();
  fs::path model = f.dir / "chain_model.bin";
  REQUIRE(run("train --input " + f.train_file.string() + " --out " +
              model.string() + quick_train_flags())
              .exit_code == 0);
  fs::path out = f.dir / "chains.jsonl";
  auto r = run("chains --model " + model.string() + " --text " +
               f.dev_file.string() + " --tables " + kFixtures +
               "/d3.csv --lexicon " + f.lexicon_dir.string() + " --out " +
               out.string());
  REQUIRE(r.exit_code == 0);
  auto text = slurp(out);
  CHECK(text.find("\"compound\"") != std::string::npos);
  CHECK(text.find("\"provenance\"") != std::string::npos);
}
