#pragma once

#include "gneseek/common.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>
#include <vector>

namespace gneseek {

// Communication topology for the dual-consensus step: a symmetric, doubly
// stochastic weight matrix over a connected undirected graph, plus its
// contraction factor sigma_m = ||W - (1/N) 11^T||_2 (spectral norm), which
// controls how fast repeated mixing pulls the players' multipliers together.

struct WeightMatrix {
  int n_players = 0;
  Mat weights;      // n_players x n_players
  double sigma_m = 0.0;
};

enum class WeightRule {
  Metropolis,       // a_ij = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal takes the slack
  UniformComplete,  // a_ij = 1/N for all pairs (requires the complete graph)
};

using EdgeList = std::vector<std::pair<int, int>>;  // 1-based endpoints

inline EdgeList edges_complete(int n) {
  EdgeList e;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) e.emplace_back(i, j);
  return e;
}

inline EdgeList edges_ring(int n) {
  EdgeList e;
  for (int i = 1; i <= n; ++i) e.emplace_back(i, i % n + 1);
  if (n == 2) e.resize(1);  // avoid the duplicate (1,2),(2,1)
  return e;
}

inline EdgeList edges_star(int n) {
  EdgeList e;
  for (int i = 2; i <= n; ++i) e.emplace_back(1, i);
  return e;
}

namespace detail {

inline void check_connected(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int count = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
  }
  if (count != n) throw DisconnectedGraph("communication graph is not connected");
}

inline double contraction_factor(const Mat& w) {
  const int n = static_cast<int>(w.rows());
  Mat b = w - Mat::Constant(n, n, 1.0 / n);
  Eigen::SelfAdjointEigenSolver<Mat> es(b);
  double s = 0.0;
  for (int k = 0; k < n; ++k) s = std::max(s, std::abs(es.eigenvalues()[k]));
  return s;
}

inline void validate_stochastic(const Mat& w, double tol = 1e-12) {
  const int n = static_cast<int>(w.rows());
  if (n == 0 || w.cols() != n) throw NonStochastic("weight matrix must be square and non-empty");
  for (int i = 0; i < n; ++i) {
    if (w(i, i) <= 0.0) throw NonStochastic("weight matrix needs a positive diagonal");
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (w(i, j) < -tol) throw NonStochastic("weight matrix has a negative entry");
      if (std::abs(w(i, j) - w(j, i)) > tol) throw NonStochastic("weight matrix is not symmetric");
      row += w(i, j);
    }
    if (std::abs(row - 1.0) > tol) throw NonStochastic("weight matrix rows must sum to 1");
  }
}

}  // namespace detail

// Build the weight matrix from an undirected edge list (1-based endpoints).
inline WeightMatrix build_weight_matrix(const EdgeList& edges, int n_players, WeightRule rule) {
  if (n_players <= 0) throw EmptyGraph("n_players must be positive");
  if (n_players > 1 && edges.empty()) throw EmptyGraph("edge list is empty");

  std::vector<std::vector<int>> adj(n_players);
  Mat has_edge = Mat::Zero(n_players, n_players);
  for (auto [a, b] : edges) {
    if (a < 1 || a > n_players || b < 1 || b > n_players)
      throw DimensionMismatch("edge endpoint out of range");
    if (a == b) continue;  // self-loops carry no information
    int i = a - 1, j = b - 1;
    if (has_edge(i, j) != 0.0) continue;
    has_edge(i, j) = has_edge(j, i) = 1.0;
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  if (n_players > 1) detail::check_connected(adj);

  Mat w = Mat::Zero(n_players, n_players);
  if (rule == WeightRule::UniformComplete) {
    for (int i = 0; i < n_players; ++i)
      for (int j = 0; j < n_players; ++j)
        if (i != j && has_edge(i, j) == 0.0)
          throw NonStochastic("uniform weights require the complete graph");
    w.setConstant(1.0 / n_players);
  } else {
    for (int i = 0; i < n_players; ++i) {
      double diag = 1.0;
      for (int j : adj[i]) {
        double a = 1.0 / (1.0 + std::max(adj[i].size(), adj[j].size()));
        w(i, j) = a;
        diag -= a;
      }
      w(i, i) = diag;
    }
  }

  detail::validate_stochastic(w);
  WeightMatrix out{n_players, std::move(w), 0.0};
  out.sigma_m = detail::contraction_factor(out.weights);
  if (out.sigma_m >= 1.0) throw NonStochastic("contraction factor must be below 1");
  return out;
}

// Accept a user-supplied matrix after validating all structural requirements.
inline WeightMatrix build_weight_matrix(const Mat& weights) {
  detail::validate_stochastic(weights);
  const int n = static_cast<int>(weights.rows());
  // Connectivity of the graph induced by nonzero off-diagonal weights.
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && weights(i, j) > 0.0) adj[i].push_back(j);
  if (n > 1) detail::check_connected(adj);
  WeightMatrix out{n, weights, detail::contraction_factor(weights)};
  if (out.sigma_m >= 1.0) throw NonStochastic("contraction factor must be below 1");
  return out;
}

// One consensus sweep: duals_i' = sum_j w_ij duals_j.  Preserves the average
// exactly (up to rounding) because the weights are doubly stochastic.
inline std::vector<Vec> mix_duals(const WeightMatrix& w, const std::vector<Vec>& duals) {
  if (static_cast<int>(duals.size()) != w.n_players)
    throw DimensionMismatch("mix_duals: one dual vector per player required");
  const int m = duals.empty() ? 0 : static_cast<int>(duals[0].size());
  for (const Vec& d : duals) {
    if (d.size() != m) throw DimensionMismatch("mix_duals: dual vectors must share a length");
    if ((d.array() < 0.0).any()) throw DimensionMismatch("mix_duals: duals must be nonnegative");
  }
  std::vector<Vec> out(duals.size(), Vec::Zero(m));
  for (int i = 0; i < w.n_players; ++i)
    for (int j = 0; j < w.n_players; ++j)
      if (w.weights(i, j) != 0.0) out[i] += w.weights(i, j) * duals[j];
  return out;
}

}  // namespace gneseek
