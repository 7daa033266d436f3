#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ezk/bits.hpp"
#include "ezk/xof.hpp"

namespace ezk {

// Undirected simple graph on vertices 0..n-1 stored as a dense bit matrix.
struct GraphInstance {
  int n = 0;
  std::vector<std::uint8_t> adj;  // n*n entries, row-major

  GraphInstance() = default;
  explicit GraphInstance(int n_) : n(n_), adj(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0) {}

  static GraphInstance from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    require(n >= 1 && n <= 64, "graph: vertex count out of range");
    GraphInstance g(n);
    for (auto [u, v] : edges) {
      require(u >= 0 && v >= 0 && u < n && v < n && u != v, "graph: bad edge");
      g.set_edge(u, v, true);
    }
    return g;
  }
  static GraphInstance complete(int n) {
    GraphInstance g(n);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v) g.set_edge(u, v, true);
    return g;
  }
  static GraphInstance star(int n) {
    GraphInstance g(n);
    for (int v = 1; v < n; ++v) g.set_edge(0, v, true);
    return g;
  }

  std::size_t idx(int u, int v) const { return static_cast<std::size_t>(u) * static_cast<std::size_t>(n) + static_cast<std::size_t>(v); }
  bool edge(int u, int v) const { return adj[idx(u, v)] != 0; }
  void set_edge(int u, int v, bool b) {
    adj[idx(u, v)] = b;
    adj[idx(v, u)] = b;
  }

  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (edge(u, v)) e.emplace_back(u, v);
    return e;
  }

  void validate() const {
    require(n >= 3 && n <= 64, "graph: n must be in [3, 64]");
    require(adj.size() == static_cast<std::size_t>(n) * static_cast<std::size_t>(n), "graph: adjacency size");
    for (int u = 0; u < n; ++u) {
      require(!edge(u, u), "graph: nonzero diagonal");
      for (int v = 0; v < n; ++v) require(adj[idx(u, v)] == adj[idx(v, u)], "graph: asymmetric adjacency");
    }
  }

  // Adjacency as n*n bits, row-major.
  BitVector matrix_bits() const {
    BitVector b(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) b.set(i, adj[i] != 0);
    return b;
  }

  void encode(ByteWriter& w) const {
    w.u16(static_cast<std::uint16_t>(n));
    w.bits(matrix_bits());
  }
  static GraphInstance decode(ByteReader& r) {
    GraphInstance g(r.u16());
    BitVector b = r.bits();
    if (g.n < 3 || g.n > 64 || b.size() != g.adj.size()) throw DecodeError("graph shape");
    for (std::size_t i = 0; i < b.size(); ++i) g.adj[i] = b.get(i);
    try {
      g.validate();
    } catch (const InvalidArgument& e) {
      throw DecodeError(e.what());
    }
    return g;
  }

  friend bool operator==(const GraphInstance&, const GraphInstance&) = default;
};

struct CycleWitness {
  std::vector<int> order;
  friend bool operator==(const CycleWitness&, const CycleWitness&) = default;
};

inline bool is_permutation(const std::vector<int>& p, int n) {
  if (static_cast<int>(p.size()) != n) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : p) {
    if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) return false;
    seen[static_cast<std::size_t>(v)] = true;
  }
  return true;
}

inline bool is_valid_witness(const GraphInstance& x, const CycleWitness& w) {
  if (!is_permutation(w.order, x.n)) return false;
  for (int k = 0; k < x.n; ++k)
    if (!x.edge(w.order[static_cast<std::size_t>(k)], w.order[static_cast<std::size_t>((k + 1) % x.n)])) return false;
  return true;
}

// H with H[π(u)][π(v)] = x[u][v]. Entries are kept as a flat bit vector so
// that non-symmetric matrices (from cheating provers) are representable.
inline BitVector permuted_matrix(const GraphInstance& x, const std::vector<int>& pi) {
  BitVector h(static_cast<std::size_t>(x.n) * static_cast<std::size_t>(x.n));
  for (int u = 0; u < x.n; ++u)
    for (int v = 0; v < x.n; ++v)
      if (x.edge(u, v)) h.set(x.idx(pi[static_cast<std::size_t>(u)], pi[static_cast<std::size_t>(v)]), true);
  return h;
}

// Exact Hamiltonian-cycle search by subset dynamic programming.
inline std::optional<CycleWitness> find_hamiltonian_cycle(const GraphInstance& x) {
  const int n = x.n;
  if (n > 20) throw Unsupported("hamiltonian search limited to n <= 20");
  if (n < 3) return std::nullopt;
  const std::size_t full = std::size_t{1} << n;
  // reach[S][v]: a path from 0 visiting exactly S ending in v exists.
  std::vector<std::uint32_t> reach(full * static_cast<std::size_t>(n), 0);
  auto at = [&](std::size_t S, int v) -> std::uint32_t& { return reach[S * static_cast<std::size_t>(n) + static_cast<std::size_t>(v)]; };
  at(1, 0) = 1;
  for (std::size_t S = 1; S < full; S += 2)
    for (int v = 0; v < n; ++v) {
      if (!at(S, v)) continue;
      for (int u = 1; u < n; ++u)
        if (!(S >> u & 1) && x.edge(v, u)) at(S | (std::size_t{1} << u), u) = 1 + static_cast<std::uint32_t>(v);
    }
  for (int v = 1; v < n; ++v) {
    if (!at(full - 1, v) || !x.edge(v, 0)) continue;
    CycleWitness w;
    std::size_t S = full - 1;
    int cur = v;
    while (cur != 0) {
      w.order.push_back(cur);
      int prev = static_cast<int>(at(S, cur)) - 1;
      S &= ~(std::size_t{1} << cur);
      cur = prev;
    }
    w.order.push_back(0);
    std::reverse(w.order.begin(), w.order.end());
    return w;
  }
  return std::nullopt;
}

}  // namespace ezk
