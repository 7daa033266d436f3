#pragma once

#include <string>

#include "ezk/graph.hpp"
#include "ezk/xof.hpp"
#include "json.hpp"

namespace ezk {

struct GeneratedInstance {
  GraphInstance x;
  std::optional<CycleWitness> witness;
};

// Rotates a cycle to start at 0 and orients it so order[1] < order[n-1].
inline CycleWitness canonical_cycle(CycleWitness w) {
  auto& o = w.order;
  if (o.empty()) return w;
  std::rotate(o.begin(), std::find(o.begin(), o.end(), 0), o.end());
  if (o.size() > 2 && o[1] > o.back()) std::reverse(o.begin() + 1, o.end());
  return w;
}

// Member instances carry a planted cycle; non-member instances are certified
// by exhaustive search, so they are limited to n <= 10.
inline GeneratedInstance instance_gen(int n, double extra_edge_prob, bool want_member, Rng& rng) {
  require(n >= 3 && n <= 64, "instance gen: n must be in [3, 64]");
  require(extra_edge_prob >= 0 && extra_edge_prob <= 1, "instance gen: edge probability outside [0, 1]");
  if (want_member) {
    CycleWitness w{rng.permutation(n)};
    GraphInstance g(n);
    for (int k = 0; k < n; ++k)
      g.set_edge(w.order[static_cast<std::size_t>(k)], w.order[static_cast<std::size_t>((k + 1) % n)], true);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.bernoulli(extra_edge_prob)) g.set_edge(u, v, true);
    w = canonical_cycle(std::move(w));
    require(is_valid_witness(g, w), "instance gen: planted cycle does not validate");
    return {std::move(g), std::move(w)};
  }
  require(n <= 10, "instance gen: non-member instances need n <= 10");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    GraphInstance g(n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.bernoulli(extra_edge_prob)) g.set_edge(u, v, true);
    if (!find_hamiltonian_cycle(g)) return {std::move(g), std::nullopt};
  }
  throw InvalidArgument("instance gen: no non-Hamiltonian graph found after 1000 samples");
}

// Graph file: {"n": n, "edges": [[u, v], ...], "witness": [v0, ...]}.
inline nlohmann::json graph_to_json(const GraphInstance& x, const std::optional<CycleWitness>& w) {
  nlohmann::json j;
  j["n"] = x.n;
  j["edges"] = nlohmann::json::array();
  for (auto [u, v] : x.edges()) j["edges"].push_back({u, v});
  if (w) j["witness"] = w->order;
  return j;
}

inline GeneratedInstance graph_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    require(n >= 3 && n <= 64, "graph file: n must be in [3, 64]");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, "graph file: edges must be pairs");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    GeneratedInstance out{GraphInstance::from_edges(n, edges), std::nullopt};
    if (j.contains("witness") && !j["witness"].is_null()) {
      CycleWitness w{j["witness"].get<std::vector<int>>()};
      require(is_valid_witness(out.x, w), "graph file: witness is not a Hamiltonian cycle");
      out.witness = std::move(w);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("graph file: ") + e.what());
  }
}

}  // namespace ezk
