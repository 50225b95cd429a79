// Joint model driver: masking-aware gold projection, mini-batch maximum-
// likelihood training (CRF mode) or per-token cross-entropy (softmax mode),
// prediction, and versioned binary checkpoints.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chembe/corpus.hpp"
#include "chembe/crf.hpp"
#include "chembe/encoder.hpp"
#include "chembe/eval.hpp"
#include "chembe/lexicon.hpp"
#include "chembe/tagscheme.hpp"

namespace chembe {

enum class TrainMode : std::uint8_t { Softmax = 0, Crf = 1 };

struct TrainConfig {
  double learning_rate = 0.15;
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  double l2 = 1e-4;
  std::uint64_t seed = 7;
  TrainMode mode = TrainMode::Crf;
  EncoderDims dims;  // window/embedding/hidden sizes

  void validate() const {
    if (learning_rate < 0) throw std::invalid_argument("negative learning rate");
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    if (l2 < 0) throw std::invalid_argument("negative l2 penalty");
  }
};

struct ModelCheckpoint {
  Vocab vocab;
  EncoderParams encoder;
  std::optional<TransitionParams> transitions;  // absent in softmax mode
  TrainMode mode = TrainMode::Crf;
  TrainConfig config;  // echo of the training configuration

  bool operator==(const ModelCheckpoint& o) const {
    bool t_eq = transitions.has_value() == o.transitions.has_value() &&
                (!transitions || transitions->a == o.transitions->a);
    return vocab == o.vocab && encoder == o.encoder && t_eq && mode == o.mode;
  }
};

// ---------------------------------------------------------------------------
// gold projection under masking

// original token index -> masked token index
inline std::vector<std::size_t> masked_index_map(const MaskedSentence& ms) {
  std::vector<std::size_t> map;
  for (std::size_t mi = 0; mi < ms.tokens.size(); ++mi) {
    auto it = ms.alignment.find(mi);
    std::size_t width = it == ms.alignment.end()
                            ? 1
                            : it->second.second - it->second.first;
    for (std::size_t j = 0; j < width; ++j) map.push_back(mi);
  }
  return map;
}

// Project gold spans onto the masked token sequence.  Spans falling inside a
// collapsed region snap to the mark token.
inline std::vector<EntitySpan> project_spans(
    const std::vector<EntitySpan>& spans, const MaskedSentence& ms) {
  auto map = masked_index_map(ms);
  std::vector<EntitySpan> out;
  for (const auto& sp : spans) {
    EntitySpan p = sp;
    p.start = map.at(sp.start);
    p.end = map.at(sp.end - 1) + 1;
    // drop duplicates created by several gold spans snapping to one mark
    bool dup = false;
    for (const auto& q : out)
      if (q.start < p.end && p.start < q.end) dup = true;
    if (!dup) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// training

struct MaskedExample {
  MaskedSentence masked;
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> gold_tag_ids;
};

namespace detail {

inline std::vector<MaskedExample> prepare_examples(
    const std::vector<Document>& docs, const Lexicon& lex, const Vocab* vocab,
    Vocab* build_vocab) {
  const TagSet& ts = default_tagset();
  std::vector<MaskedExample> out;
  for (const auto& doc : docs)
    for (const auto& sent : doc.sentences) {
      if (sent.tokens.empty()) continue;
      auto matches = match_entities(sent.tokens, lex);
      MaskedExample ex;
      ex.masked = mask(sent.tokens, matches);
      Sentence proj;
      proj.tokens = ex.masked.tokens;
      proj.spans = project_spans(sent.spans, ex.masked);
      for (const auto& tag : encode(proj))
        ex.gold_tag_ids.push_back(ts.id(tag));
      for (const auto& t : ex.masked.tokens) {
        if (build_vocab) build_vocab->add(t.text);
        ex.token_ids.push_back((vocab ? *vocab : *build_vocab).lookup(t.text));
      }
      out.push_back(std::move(ex));
    }
  return out;
}

inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng() % i]);
}

}  // namespace detail

struct PredictedSentence {
  std::vector<Token> tokens;
  std::vector<JointTag> tags;  // over the original (unmasked) tokens
  DecodeResult decoded;
};

inline PredictedSentence predict_sentence(const ModelCheckpoint& m,
                                          const Lexicon& lex,
                                          const std::vector<Token>& tokens) {
  PredictedSentence out;
  out.tokens = tokens;
  if (tokens.empty()) return out;
  const TagSet& ts = default_tagset();
  auto matches = match_entities(tokens, lex);
  auto masked = mask(tokens, matches);
  std::vector<std::size_t> ids;
  for (const auto& t : masked.tokens) ids.push_back(m.vocab.lookup(t.text));
  auto act = encode_emissions(ids, m.encoder);
  std::vector<std::size_t> tag_ids;
  if (m.mode == TrainMode::Crf)
    tag_ids = viterbi(act.emissions, *m.transitions).tags;
  else
    tag_ids = softmax_decode(act.emissions);
  std::vector<JointTag> masked_tags;
  for (std::size_t id : tag_ids) masked_tags.push_back(ts.tag(id));
  auto un = unmask(masked, masked_tags);
  out.tags = un.tags;
  out.decoded = decode(out.tags, out.tokens, /*strict=*/false);
  return out;
}

inline std::vector<std::vector<PredictedSentence>> predict(
    const ModelCheckpoint& m, const Lexicon& lex,
    const std::vector<Document>& docs) {
  std::vector<std::vector<PredictedSentence>> out;
  for (const auto& doc : docs) {
    std::vector<PredictedSentence> sents;
    for (const auto& sent : doc.sentences)
      sents.push_back(predict_sentence(m, lex, sent.tokens));
    out.push_back(std::move(sents));
  }
  return out;
}

inline EvalReport evaluate_model(const ModelCheckpoint& m, const Lexicon& lex,
                                 const std::vector<Document>& docs) {
  std::vector<SentencePredictions> sp;
  for (const auto& doc : docs)
    for (const auto& sent : doc.sentences) {
      SentencePredictions p;
      auto gold = decode(encode(sent), sent.tokens);
      p.gold_mentions = gold.mentions;
      p.gold_relations = gold.relations;
      auto pred = predict_sentence(m, lex, sent.tokens);
      p.pred_mentions = pred.decoded.mentions;
      p.pred_relations = pred.decoded.relations;
      sp.push_back(std::move(p));
    }
  return evaluate(sp);
}

// Mini-batch gradient descent on the mean per-sentence loss.  Writes one
// `epoch<TAB>loss<TAB>dev_entity_f1<TAB>dev_relation_f1` line per epoch.
inline ModelCheckpoint train(const std::vector<Document>& train_docs,
                             const std::vector<Document>& dev_docs,
                             const Lexicon& lex, const TrainConfig& config,
                             std::ostream* log = nullptr) {
  config.validate();
  const TagSet& ts = default_tagset();

  ModelCheckpoint m;
  m.mode = config.mode;
  m.config = config;
  auto examples =
      detail::prepare_examples(train_docs, lex, nullptr, &m.vocab);
  if (examples.empty()) throw std::invalid_argument("empty training corpus");

  EncoderDims dims = config.dims;
  dims.num_tags = ts.size();
  m.encoder = EncoderParams(m.vocab.size(), dims);
  m.encoder.init_random(config.seed);
  if (config.mode == TrainMode::Crf) {
    m.transitions = TransitionParams(ts.size());
    m.transitions->apply_legality_mask(ts);
  }

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::mt19937_64 rng(config.seed * 7919 + epoch);
    detail::shuffle_indices(order, rng);
    double epoch_loss = 0.0;

    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      std::size_t b_end = std::min(order.size(), b + config.batch_size);
      EncoderGradients enc_grad(m.encoder);
      Matrix trans_grad(ts.size() + 2, ts.size() + 2);

      for (std::size_t q = b; q < b_end; ++q) {
        const MaskedExample& ex = examples[order[q]];
        auto act = encode_emissions(ex.token_ids, m.encoder);
        Matrix d_emissions(act.emissions.rows(), act.emissions.cols());
        double loss;
        if (config.mode == TrainMode::Crf) {
          auto g = nll_and_grad(act.emissions, *m.transitions, ex.gold_tag_ids);
          loss = g.loss;
          d_emissions = g.d_emissions;
          trans_grad.add_scaled(g.d_transitions, 1.0);
        } else {
          // mean per-token cross-entropy
          loss = 0.0;
          std::size_t n = act.emissions.rows();
          for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row(ts.size());
            for (std::size_t k = 0; k < ts.size(); ++k)
              row[k] = act.emissions(i, k);
            auto p = softmax(row);
            std::size_t gold = ex.gold_tag_ids[i];
            loss -= std::log(std::max(p[gold], 1e-300));
            for (std::size_t k = 0; k < ts.size(); ++k)
              d_emissions(i, k) = (p[k] - (k == gold ? 1.0 : 0.0)) / n;
          }
          loss /= n;
        }
        if (!std::isfinite(loss))
          throw std::runtime_error("non-finite training loss at epoch " +
                                   std::to_string(epoch));
        epoch_loss += loss;
        backprop_emissions(act, m.encoder, d_emissions, enc_grad);
      }

      double inv = 1.0 / double(b_end - b);
      double lr = config.learning_rate;
      auto step = [&](Matrix& param, const Matrix& grad) {
        for (std::size_t i = 0; i < param.data().size(); ++i)
          param.data()[i] -=
              lr * (grad.data()[i] * inv + config.l2 * param.data()[i]);
      };
      step(m.encoder.embeddings, enc_grad.d_embeddings);
      step(m.encoder.combiner, enc_grad.d_combiner);
      step(m.encoder.output, enc_grad.d_output);
      if (config.mode == TrainMode::Crf) {
        auto& a = m.transitions->a;
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) {
            if (a(i, j) <= kNegInf / 2) continue;  // keep the legality mask
            a(i, j) -= lr * (trans_grad(i, j) * inv + config.l2 * a(i, j));
          }
      }
    }

    if (log) {
      double mean_loss = epoch_loss / double(examples.size());
      const auto& eval_docs = dev_docs.empty() ? train_docs : dev_docs;
      auto rep = evaluate_model(m, lex, eval_docs);
      (*log) << epoch + 1 << "\t" << mean_loss << "\t"
             << rep.entity_micro.f1() << "\t" << rep.relation_micro.f1()
             << "\n";
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// checkpoint serialization (magic BCN1, little-endian)

namespace detail {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size())
    throw std::runtime_error("corrupt checkpoint: truncated");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

inline void put_matrix(std::string& out, const Matrix& m) {
  for (double v : m.data()) put(out, v);
}

inline void get_matrix(const std::string& in, std::size_t& pos, Matrix& m) {
  for (auto& v : m.data()) v = get<double>(in, pos);
}

}  // namespace detail

inline std::string serialize_checkpoint(const ModelCheckpoint& m) {
  std::string out = "BCN1";
  detail::put<std::uint32_t>(out, m.vocab.size());
  detail::put<std::uint32_t>(out, m.encoder.dims.embed_dim);
  detail::put<std::uint32_t>(out, m.encoder.dims.window);
  detail::put<std::uint32_t>(out, m.encoder.dims.hidden_dim);
  detail::put<std::uint32_t>(out, m.encoder.dims.num_tags);
  detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(m.mode));
  detail::put<double>(out, m.config.learning_rate);
  detail::put<std::uint32_t>(out, m.config.epochs);
  detail::put<std::uint32_t>(out, m.config.batch_size);
  detail::put<double>(out, m.config.l2);
  detail::put<std::uint64_t>(out, m.config.seed);
  detail::put_matrix(out, m.encoder.embeddings);
  detail::put_matrix(out, m.encoder.combiner);
  detail::put_matrix(out, m.encoder.output);
  if (m.mode == TrainMode::Crf) detail::put_matrix(out, m.transitions->a);
  for (const auto& tok : m.vocab.tokens()) {
    detail::put<std::uint32_t>(out, tok.size());
    out += tok;
  }
  return out;
}

inline ModelCheckpoint deserialize_checkpoint(const std::string& in) {
  if (in.size() < 4 || in.compare(0, 3, "BCN") != 0)
    throw std::runtime_error("corrupt checkpoint: bad magic");
  if (in[3] != '1')
    throw std::runtime_error(
        "unsupported checkpoint version BCN" + std::string(1, in[3]) +
        " (this build reads BCN1)");
  std::size_t pos = 4;
  std::uint32_t vsize = detail::get<std::uint32_t>(in, pos);
  ModelCheckpoint m;
  EncoderDims dims;
  dims.embed_dim = detail::get<std::uint32_t>(in, pos);
  dims.window = detail::get<std::uint32_t>(in, pos);
  dims.hidden_dim = detail::get<std::uint32_t>(in, pos);
  dims.num_tags = detail::get<std::uint32_t>(in, pos);
  std::uint8_t mode = detail::get<std::uint8_t>(in, pos);
  if (mode > 1) throw std::runtime_error("corrupt checkpoint: bad mode");
  m.mode = static_cast<TrainMode>(mode);
  m.config.mode = m.mode;
  m.config.learning_rate = detail::get<double>(in, pos);
  m.config.epochs = detail::get<std::uint32_t>(in, pos);
  m.config.batch_size = detail::get<std::uint32_t>(in, pos);
  m.config.l2 = detail::get<double>(in, pos);
  m.config.seed = detail::get<std::uint64_t>(in, pos);
  m.config.dims = dims;
  m.encoder = EncoderParams(vsize, dims);
  detail::get_matrix(in, pos, m.encoder.embeddings);
  detail::get_matrix(in, pos, m.encoder.combiner);
  detail::get_matrix(in, pos, m.encoder.output);
  if (m.mode == TrainMode::Crf) {
    m.transitions = TransitionParams(dims.num_tags);
    detail::get_matrix(in, pos, m.transitions->a);
  }
  Vocab vocab;
  for (std::uint32_t i = 0; i < vsize; ++i) {
    std::uint32_t len = detail::get<std::uint32_t>(in, pos);
    if (pos + len > in.size())
      throw std::runtime_error("corrupt checkpoint: truncated vocabulary");
    vocab.add(in.substr(pos, len));
    pos += len;
  }
  if (vocab.size() != vsize)
    throw std::runtime_error("corrupt checkpoint: duplicate vocabulary entry");
  if (pos != in.size())
    throw std::runtime_error("corrupt checkpoint: trailing bytes");
  m.vocab = vocab;
  return m;
}

inline void save_checkpoint(const ModelCheckpoint& m,
                            const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  auto bytes = serialize_checkpoint(m);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline ModelCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace chembe
