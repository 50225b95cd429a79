// Trainable emission encoder: token embeddings, a tanh window combiner and a
// linear output layer producing per-token tag scores.  Stands in for a
// pretrained contextual encoder behind the same emission-matrix contract.
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "chembe/corpus.hpp"
#include "chembe/crf.hpp"
#include "chembe/matrix.hpp"

namespace chembe {

class Vocab {
 public:
  static constexpr std::size_t kUnkId = 0;
  static constexpr std::size_t kPadId = 1;
  static constexpr std::size_t kCmpId = 2;
  static constexpr std::size_t kBondId = 3;

  Vocab() {
    add("<UNK>");
    add("<PAD>");
    add(kCompoundMark);
    add(kBondMark);
  }

  std::size_t add(const std::string& tok) {
    auto it = ids_.find(tok);
    if (it != ids_.end()) return it->second;
    std::size_t id = tokens_.size();
    ids_.emplace(tok, id);
    tokens_.push_back(tok);
    return id;
  }

  std::size_t lookup(const std::string& tok) const {
    auto it = ids_.find(tok);
    return it == ids_.end() ? kUnkId : it->second;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

 private:
  std::map<std::string, std::size_t> ids_;
  std::vector<std::string> tokens_;
};

struct EncoderDims {
  std::size_t embed_dim = 32;   // d
  std::size_t window = 2;       // w; context is [i-w, i+w]
  std::size_t hidden_dim = 64;  // H
  std::size_t num_tags = 21;    // K

  std::size_t window_width() const { return 2 * window + 1; }
  std::size_t input_dim() const { return window_width() * embed_dim; }

  bool operator==(const EncoderDims&) const = default;
};

struct EncoderParams {
  EncoderDims dims;
  Matrix embeddings;  // |V| x d
  Matrix combiner;    // (input_dim + 1) x H, last row is the bias
  Matrix output;      // (H + 1) x K, last row is the bias

  EncoderParams() = default;
  EncoderParams(std::size_t vocab_size, const EncoderDims& d)
      : dims(d),
        embeddings(vocab_size, d.embed_dim),
        combiner(d.input_dim() + 1, d.hidden_dim),
        output(d.hidden_dim + 1, d.num_tags) {}

  void init_random(std::uint64_t seed, double scale = 0.1) {
    std::mt19937_64 rng(seed);
    auto fill = [&](Matrix& m) {
      for (auto& v : m.data())
        v = scale * (2.0 * (rng() >> 11) * 0x1.0p-53 - 1.0);
    };
    fill(embeddings);
    fill(combiner);
    fill(output);
  }

  bool operator==(const EncoderParams&) const = default;
};

struct EncoderActivations {
  std::vector<std::size_t> token_ids;
  Matrix windows;  // n x input_dim (gathered embeddings, PAD at boundaries)
  Matrix hidden;   // n x H (post-tanh)
  EmissionMatrix emissions;  // n x K
};

inline EncoderActivations encode_emissions(
    const std::vector<std::size_t>& token_ids, const EncoderParams& p) {
  if (token_ids.empty()) throw std::invalid_argument("empty token sequence");
  for (std::size_t id : token_ids)
    if (id >= p.embeddings.rows())
      throw std::invalid_argument("token id out of vocabulary range");

  const auto& d = p.dims;
  std::size_t n = token_ids.size();
  EncoderActivations act;
  act.token_ids = token_ids;
  act.windows = Matrix(n, d.input_dim());
  act.hidden = Matrix(n, d.hidden_dim);
  act.emissions = EmissionMatrix(n, d.num_tags);

  long w = static_cast<long>(d.window);
  for (std::size_t i = 0; i < n; ++i) {
    for (long off = -w; off <= w; ++off) {
      long j = static_cast<long>(i) + off;
      std::size_t id = (j < 0 || j >= static_cast<long>(n))
                           ? Vocab::kPadId
                           : token_ids[static_cast<std::size_t>(j)];
      std::size_t base = static_cast<std::size_t>(off + w) * d.embed_dim;
      for (std::size_t c = 0; c < d.embed_dim; ++c)
        act.windows(i, base + c) = p.embeddings(id, c);
    }
    for (std::size_t h = 0; h < d.hidden_dim; ++h) {
      double a = p.combiner(d.input_dim(), h);  // bias
      for (std::size_t c = 0; c < d.input_dim(); ++c)
        a += act.windows(i, c) * p.combiner(c, h);
      act.hidden(i, h) = std::tanh(a);
    }
    for (std::size_t k = 0; k < d.num_tags; ++k) {
      double a = p.output(d.hidden_dim, k);  // bias
      for (std::size_t h = 0; h < d.hidden_dim; ++h)
        a += act.hidden(i, h) * p.output(h, k);
      act.emissions(i, k) = a;
    }
  }
  return act;
}

struct EncoderGradients {
  Matrix d_embeddings;
  Matrix d_combiner;
  Matrix d_output;

  explicit EncoderGradients(const EncoderParams& p)
      : d_embeddings(p.embeddings.rows(), p.embeddings.cols()),
        d_combiner(p.combiner.rows(), p.combiner.cols()),
        d_output(p.output.rows(), p.output.cols()) {}
};

// Accumulate dLoss/d(params) given dLoss/d(emissions).
inline void backprop_emissions(const EncoderActivations& act,
                               const EncoderParams& p,
                               const Matrix& d_emissions,
                               EncoderGradients& g) {
  const auto& d = p.dims;
  std::size_t n = act.token_ids.size();
  long w = static_cast<long>(d.window);
  std::vector<double> d_hidden(d.hidden_dim);
  std::vector<double> d_window(d.input_dim());

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t h = 0; h < d.hidden_dim; ++h) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d.num_tags; ++k) {
        double gk = d_emissions(i, k);
        g.d_output(h, k) += act.hidden(i, h) * gk;
        acc += p.output(h, k) * gk;
      }
      // tanh'
      d_hidden[h] = acc * (1.0 - act.hidden(i, h) * act.hidden(i, h));
    }
    for (std::size_t k = 0; k < d.num_tags; ++k)
      g.d_output(d.hidden_dim, k) += d_emissions(i, k);

    for (std::size_t c = 0; c < d.input_dim(); ++c) {
      double acc = 0.0;
      for (std::size_t h = 0; h < d.hidden_dim; ++h) {
        g.d_combiner(c, h) += act.windows(i, c) * d_hidden[h];
        acc += p.combiner(c, h) * d_hidden[h];
      }
      d_window[c] = acc;
    }
    for (std::size_t h = 0; h < d.hidden_dim; ++h)
      g.d_combiner(d.input_dim(), h) += d_hidden[h];

    for (long off = -w; off <= w; ++off) {
      long j = static_cast<long>(i) + off;
      std::size_t id = (j < 0 || j >= static_cast<long>(n))
                           ? Vocab::kPadId
                           : act.token_ids[static_cast<std::size_t>(j)];
      std::size_t base = static_cast<std::size_t>(off + w) * d.embed_dim;
      for (std::size_t c = 0; c < d.embed_dim; ++c)
        g.d_embeddings(id, c) += d_window[base + c];
    }
  }
}

}  // namespace chembe
