// Independent brute-force oracles for the CRF: exhaustive enumeration of all
// tag sequences and central finite differences.  Kept free of the lattice
// code they are used to check.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "chembe/crf.hpp"

namespace oracle {

// direct evaluation of the path score by summation, without crf_score
inline double path_score(const chembe::Matrix& o,
                         const chembe::TransitionParams& a,
                         const std::vector<std::size_t>& y) {
  double s = a.between(a.start_index(), y.front());
  for (std::size_t i = 0; i + 1 < y.size(); ++i) s += a.between(y[i], y[i + 1]);
  s += a.between(y.back(), a.stop_index());
  for (std::size_t i = 0; i < y.size(); ++i) s += o(i, y[i]);
  return s;
}

template <typename F>
void for_each_sequence(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> y(n, 0);
  while (true) {
    f(y);
    std::size_t i = 0;
    while (i < n && ++y[i] == k) y[i++] = 0;
    if (i == n) break;
  }
}

struct BruteForce {
  std::vector<std::size_t> best;
  double best_score;
  double log_z;
};

inline BruteForce enumerate(const chembe::Matrix& o,
                            const chembe::TransitionParams& a) {
  std::size_t n = o.rows(), k = o.cols();
  BruteForce r;
  r.best_score = -std::numeric_limits<double>::infinity();
  double max_s = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;
  for_each_sequence(n, k, [&](const std::vector<std::size_t>& y) {
    double s = path_score(o, a, y);
    scores.push_back(s);
    if (s > max_s) max_s = s;
    if (s > r.best_score) {
      r.best_score = s;
      r.best = y;
    }
  });
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - max_s);
  r.log_z = max_s + std::log(acc);
  return r;
}

struct RandomInstance {
  chembe::Matrix emissions;
  chembe::TransitionParams transitions;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t n,
                                      std::size_t k, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  RandomInstance inst;
  inst.emissions = chembe::Matrix(n, k);
  for (auto& v : inst.emissions.data()) v = u(rng);
  inst.transitions = chembe::TransitionParams(k);
  for (auto& v : inst.transitions.a.data()) v = u(rng);
  return inst;
}

// central finite differences of f at x, step h
inline double central_diff(const std::function<double(double)>& f, double x,
                           double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace oracle
