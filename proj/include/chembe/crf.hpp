// Linear-chain CRF: path scoring, forward/backward in log space, Viterbi,
// negative log-likelihood with exact gradients, and the softmax baseline.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "chembe/matrix.hpp"
#include "chembe/tagscheme.hpp"

namespace chembe {

// hard-mask sentinel for forbidden transitions
inline constexpr double kNegInf = -1e30;

// n x K unnormalized per-token tag scores
using EmissionMatrix = Matrix;

// (K+2) x (K+2) transition scores with START row K and STOP column K+1.
struct TransitionParams {
  Matrix a;  // (K+2) x (K+2)

  explicit TransitionParams(std::size_t k = 0) : a(k + 2, k + 2, 0.0) {}

  std::size_t num_tags() const { return a.rows() - 2; }
  std::size_t start_index() const { return num_tags(); }
  std::size_t stop_index() const { return num_tags() + 1; }

  double& between(std::size_t from, std::size_t to) { return a(from, to); }
  double between(std::size_t from, std::size_t to) const { return a(from, to); }

  // clamp transitions forbidden by the tagging scheme to the sentinel
  void apply_legality_mask(const TagSet& ts) {
    std::size_t k = num_tags();
    if (k != ts.size()) throw std::invalid_argument("tagset size mismatch");
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (!is_legal_transition(ts.tag(i), ts.tag(j))) a(i, j) = kNegInf;
    for (std::size_t j = 0; j < k; ++j)
      if (!is_legal_transition(kStart, ts.tag(j))) a(start_index(), j) = kNegInf;
    // tag -> STOP is always legal; START row/STOP column corners unused
  }
};

inline std::vector<double> softmax(const std::vector<double>& z) {
  if (z.empty()) return {};
  double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

// per-token argmax, ties to the lowest tag id, no transition constraints
inline std::vector<std::size_t> softmax_decode(const EmissionMatrix& o) {
  std::vector<std::size_t> out(o.rows());
  for (std::size_t i = 0; i < o.rows(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < o.cols(); ++k)
      if (o(i, k) > o(i, best)) best = k;
    out[i] = best;
  }
  return out;
}

inline double crf_score(const EmissionMatrix& o, const TransitionParams& a,
                        const std::vector<std::size_t>& y) {
  if (y.size() != o.rows())
    throw std::invalid_argument("tag sequence length mismatch");
  if (y.empty()) throw std::invalid_argument("empty sequence");
  double s = a.between(a.start_index(), y.front());
  for (std::size_t i = 0; i + 1 < y.size(); ++i)
    s += a.between(y[i], y[i + 1]);
  s += a.between(y.back(), a.stop_index());
  for (std::size_t i = 0; i < y.size(); ++i) s += o(i, y[i]);
  return s;
}

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
  double m = *std::max_element(v.begin(), v.end());
  if (m <= kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// alpha[i][k] = log sum over prefixes ending at position i with tag k
inline Matrix forward_lattice(const EmissionMatrix& o,
                              const TransitionParams& a) {
  std::size_t n = o.rows(), k = o.cols();
  Matrix alpha(n, k);
  for (std::size_t t = 0; t < k; ++t)
    alpha(0, t) = a.between(a.start_index(), t) + o(0, t);
  std::vector<double> acc(k);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t p = 0; p < k; ++p)
        acc[p] = alpha(i - 1, p) + a.between(p, t);
      alpha(i, t) = log_sum_exp(acc) + o(i, t);
    }
  return alpha;
}

// beta[i][k] = log sum over suffixes starting after position i given tag k
inline Matrix backward_lattice(const EmissionMatrix& o,
                               const TransitionParams& a) {
  std::size_t n = o.rows(), k = o.cols();
  Matrix beta(n, k);
  for (std::size_t t = 0; t < k; ++t)
    beta(n - 1, t) = a.between(t, a.stop_index());
  std::vector<double> acc(k);
  for (std::size_t i = n - 1; i-- > 0;)
    for (std::size_t t = 0; t < k; ++t) {
      for (std::size_t q = 0; q < k; ++q)
        acc[q] = a.between(t, q) + o(i + 1, q) + beta(i + 1, q);
      beta(i, t) = log_sum_exp(acc);
    }
  return beta;
}

}  // namespace detail

inline double log_partition(const EmissionMatrix& o,
                            const TransitionParams& a) {
  if (o.rows() == 0) throw std::invalid_argument("empty sequence");
  Matrix alpha = detail::forward_lattice(o, a);
  std::size_t n = o.rows(), k = o.cols();
  std::vector<double> fin(k);
  for (std::size_t t = 0; t < k; ++t)
    fin[t] = alpha(n - 1, t) + a.between(t, a.stop_index());
  return detail::log_sum_exp(fin);
}

struct ViterbiResult {
  std::vector<std::size_t> tags;
  double score = 0.0;
};

inline ViterbiResult viterbi(const EmissionMatrix& o,
                             const TransitionParams& a) {
  std::size_t n = o.rows(), k = o.cols();
  if (n == 0) throw std::invalid_argument("empty sequence");
  Matrix best(n, k);
  std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(k, 0));
  for (std::size_t t = 0; t < k; ++t)
    best(0, t) = a.between(a.start_index(), t) + o(0, t);
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      std::size_t arg = 0;
      double bv = best(i - 1, 0) + a.between(0, t);
      for (std::size_t p = 1; p < k; ++p) {
        double v = best(i - 1, p) + a.between(p, t);
        if (v > bv) {  // strict: ties stay at the lowest id
          bv = v;
          arg = p;
        }
      }
      best(i, t) = bv + o(i, t);
      back[i][t] = arg;
    }
  std::size_t arg = 0;
  double bv = best(n - 1, 0) + a.between(0, a.stop_index());
  for (std::size_t t = 1; t < k; ++t) {
    double v = best(n - 1, t) + a.between(t, a.stop_index());
    if (v > bv) {
      bv = v;
      arg = t;
    }
  }
  ViterbiResult r;
  r.score = bv;
  r.tags.resize(n);
  r.tags[n - 1] = arg;
  for (std::size_t i = n - 1; i > 0; --i) r.tags[i - 1] = back[i][r.tags[i]];
  return r;
}

struct CrfGradients {
  double loss = 0.0;       // log Z - score(gold), >= 0
  Matrix d_emissions;      // n x K
  Matrix d_transitions;    // (K+2) x (K+2)
};

// Maximum-likelihood gradients via forward-backward marginals.
inline CrfGradients nll_and_grad(const EmissionMatrix& o,
                                 const TransitionParams& a,
                                 const std::vector<std::size_t>& gold) {
  std::size_t n = o.rows(), k = o.cols();
  if (gold.size() != n) throw std::invalid_argument("gold length mismatch");
  for (std::size_t t : gold)
    if (t >= k) throw std::invalid_argument("gold tag id out of range");

  Matrix alpha = detail::forward_lattice(o, a);
  Matrix beta = detail::backward_lattice(o, a);
  std::vector<double> fin(k);
  for (std::size_t t = 0; t < k; ++t)
    fin[t] = alpha(n - 1, t) + a.between(t, a.stop_index());
  double log_z = detail::log_sum_exp(fin);

  double gold_score = crf_score(o, a, gold);
  if (gold_score <= kNegInf / 2)
    throw std::invalid_argument("gold sequence has forbidden transitions");

  CrfGradients g;
  g.loss = log_z - gold_score;
  g.d_emissions = Matrix(n, k);
  g.d_transitions = Matrix(k + 2, k + 2);

  // unary marginals
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t t = 0; t < k; ++t) {
      double lp = alpha(i, t) + beta(i, t) - log_z;
      g.d_emissions(i, t) = std::exp(lp) - (gold[i] == t ? 1.0 : 0.0);
    }

  // boundary transitions
  for (std::size_t t = 0; t < k; ++t) {
    double p_first = std::exp(alpha(0, t) + beta(0, t) - log_z);
    g.d_transitions(a.start_index(), t) += p_first;
    double p_last = std::exp(alpha(n - 1, t) + a.between(t, a.stop_index()) - log_z);
    g.d_transitions(t, a.stop_index()) += p_last;
  }
  g.d_transitions(a.start_index(), gold.front()) -= 1.0;
  g.d_transitions(gold.back(), a.stop_index()) -= 1.0;

  // pairwise marginals
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q < k; ++q) {
        double lp = alpha(i, p) + a.between(p, q) + o(i + 1, q) +
                    beta(i + 1, q) - log_z;
        if (lp > kNegInf / 2) g.d_transitions(p, q) += std::exp(lp);
      }
    g.d_transitions(gold[i], gold[i + 1]) -= 1.0;
  }
  return g;
}

}  // namespace chembe
