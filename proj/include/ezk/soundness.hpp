#pragma once

// Exhaustive toy-scale soundness harnesses over ToyTable Σ commitments.
// Every candidate response is judged by the real verify_rep.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "ezk/sigma.hpp"

namespace ezk {

namespace detail {

using OpeningPair = std::array<std::optional<Opening>, 2>;

// Openings of `com` to 0 and to 1 (single-bit ToyTable).
inline OpeningPair toy_openings(const ToyTableParams& t, std::uint32_t value) {
  OpeningPair out;
  for (std::uint32_t m = 0; m < 2; ++m)
    for (std::uint32_t r = 0; r < t.num_r() && !out[m]; ++r)
      if (t.at(m, r) == value) out[m] = Opening{BitVector::from_uint(r, t.r_bits)};
  return out;
}

struct PositionClass {
  Commitment com;
  OpeningPair open;
};

// Representative commitments for each non-dominated opening class. A value
// opening to both messages dominates the single-message classes, and a value
// opening to nothing is dominated by any other.
inline std::vector<PositionClass> toy_position_domain(const ToyTableParams& t) {
  std::optional<PositionClass> only0, only1, both;
  for (std::uint32_t v : t.table) {
    OpeningPair o = toy_openings(t, v);
    PositionClass pc{Commitment{SchemeId::ToyTable, BitVector::from_uint(v, t.c_bits)}, o};
    if (o[0] && o[1]) {
      if (!both) both = pc;
    } else if (o[0]) {
      if (!only0) only0 = pc;
    } else if (o[1] && !only1) {
      only1 = pc;
    }
  }
  if (both) return {*both};
  std::vector<PositionClass> d;
  if (only0) d.push_back(*only0);
  if (only1) d.push_back(*only1);
  return d;
}

inline std::vector<std::vector<int>> all_permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

// Every Hamiltonian cycle of K_n, each edge in both orientations. Acceptance
// of a bit-1 response does not depend on the listing order of its positions.
inline std::vector<std::vector<std::uint32_t>> hamiltonian_position_sets(int n) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<int> rest;
  for (int v = 1; v < n; ++v) rest.push_back(v);
  do {
    if (rest.front() > rest.back()) continue;
    std::vector<int> order{0};
    order.insert(order.end(), rest.begin(), rest.end());
    for (std::uint32_t mask = 0; mask < (1U << n); ++mask) {
      std::vector<std::uint32_t> pos;
      for (int k = 0; k < n; ++k) {
        int a = order[static_cast<std::size_t>(k)], b = order[static_cast<std::size_t>((k + 1) % n)];
        if ((mask >> k) & 1U) std::swap(a, b);
        pos.push_back(static_cast<std::uint32_t>(a * n + b));
      }
      out.push_back(std::move(pos));
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  return out;
}

inline Opening dummy_opening(const ToyTableParams& t) { return Opening{BitVector(t.r_bits)}; }

// Counts accepting candidates for one repetition with commitments `coms`
// whose openings are `opens`. Stops at the first hit when `stop_at_first`.
struct RepCandidates {
  const GraphInstance& x;
  const PublicParam& pp;
  SigmaFlavor flavor;
  std::vector<std::vector<int>> perms;
  std::vector<BitVector> encodings;  // modified flavor: all valid (π(x), π) encodings
  std::vector<std::vector<std::uint32_t>> cycles;
  std::uint64_t calls = 0;

  RepCandidates(const GraphInstance& x_, const PublicParam& pp_, SigmaFlavor f)
      : x(x_), pp(pp_), flavor(f), perms(all_permutations(x_.n)), cycles(hamiltonian_position_sets(x_.n)) {
    if (flavor == SigmaFlavor::Modified)
      for (const auto& p : perms) encodings.push_back(mh_encode(permuted_matrix(x, p), p));
  }

  Opening pick(const OpeningPair& o, bool v) const { return o[v] ? *o[v] : dummy_opening(pp.toy()); }

  // `forced` holds the committed values when every position is single-valued.
  std::uint64_t count_bit0(const std::vector<Commitment>& coms, const std::vector<OpeningPair>& opens,
                           const std::optional<BitVector>& forced, bool stop_at_first) {
    std::uint64_t hits = 0;
    auto try_values = [&](const BitVector& h, RepResponse& z) {
      z.openings.clear();
      for (std::size_t i = 0; i < h.size(); ++i) z.openings.push_back(pick(opens[i], h.get(i)));
      ++calls;
      return verify_rep(x, pp, flavor, coms, false, z);
    };
    if (flavor == SigmaFlavor::Plain) {
      for (const auto& p : perms) {
        RepResponse z;
        z.perm = p;
        if (try_values(permuted_matrix(x, p), z) && (++hits, stop_at_first)) return hits;
      }
      return hits;
    }
    return count_values(coms, opens, forced ? std::vector<BitVector>{*forced} : encodings, stop_at_first);
  }

  // Modified flavor bit-0 responses revealing each candidate value vector.
  std::uint64_t count_values(const std::vector<Commitment>& coms, const std::vector<OpeningPair>& opens,
                             const std::vector<BitVector>& cands, bool stop_at_first) {
    std::uint64_t hits = 0;
    for (const auto& v : cands) {
      RepResponse z;
      z.values = v;
      for (std::size_t i = 0; i < v.size(); ++i) z.openings.push_back(pick(opens[i], v.get(i)));
      ++calls;
      if (verify_rep(x, pp, flavor, coms, false, z) && (++hits, stop_at_first)) return hits;
    }
    return hits;
  }

  std::uint64_t count_bit1(const std::vector<Commitment>& coms, const std::vector<OpeningPair>& opens,
                           bool stop_at_first) {
    std::uint64_t hits = 0;
    for (const auto& pos : cycles) {
      RepResponse z;
      z.bit = true;
      z.positions = pos;
      for (auto p : pos) z.openings.push_back(pick(opens[p], true));
      ++calls;
      if (verify_rep(x, pp, flavor, coms, true, z) && (++hits, stop_at_first)) return hits;
    }
    return hits;
  }

  std::size_t bit0_candidates(bool forced) const {
    return flavor == SigmaFlavor::Plain ? perms.size() : (forced ? 1 : encodings.size());
  }
};

}  // namespace detail

struct SoundnessReport {
  double per_rep_max = 0.0;  // max over committed vectors of |accepted bits| / 2
  double bound = 0.0;        // per_rep_max^k
  std::uint64_t vectors = 0;
  std::uint64_t verify_calls = 0;
  bool member = false;
};

// Exact maximum acceptance probability of any deterministic prover against k
// parallel repetitions with uniform challenge bits. Repetitions are checked
// independently, so the optimum is the per-repetition optimum to the k-th
// power; the per-repetition optimum enumerates every committed vector over
// the non-dominated commitment classes and every candidate response.
inline SoundnessReport exhaustive_soundness_bound(const GraphInstance& x, const PublicParam& pp, SigmaFlavor flavor,
                                                  std::size_t k) {
  x.validate();
  if (pp.scheme() != SchemeId::ToyTable || pp.toy().m_bits != 1)
    throw Unsupported("soundness harness: needs a single-bit ToyTable pp");
  if (k < 1 || k > 4) throw Unsupported("soundness harness: challenge length must be in [1, 4]");
  const std::size_t positions = sigma_message_bits(flavor, x.n);
  const auto domain = detail::toy_position_domain(pp.toy());
  if (domain.empty()) throw Unsupported("soundness harness: no openable commitment value");
  const double vecs = std::pow(static_cast<double>(domain.size()), static_cast<double>(positions));
  detail::RepCandidates cand(x, pp, flavor);
  const bool forced = domain.size() == 1 ? !(domain[0].open[0] && domain[0].open[1]) : true;
  if (vecs > std::pow(2.0, 24) || vecs * static_cast<double>(cand.bit0_candidates(forced)) > std::pow(2.0, 27))
    throw Unsupported("soundness harness: enumeration space too large");

  SoundnessReport rep;
  rep.member = x.n <= 20 && find_hamiltonian_cycle(x).has_value();
  const auto total = static_cast<std::uint64_t>(vecs);
  std::vector<Commitment> coms(positions);
  std::vector<detail::OpeningPair> opens(positions);
  int best = 0;
  for (std::uint64_t idx = 0; idx < total && best < 2; ++idx) {
    std::optional<BitVector> values;
    if (forced) values = BitVector(positions);
    std::uint64_t rest = idx;
    for (std::size_t p = 0; p < positions; ++p) {
      const auto& c = domain[rest % domain.size()];
      rest /= domain.size();
      coms[p] = c.com;
      opens[p] = c.open;
      if (values) values->set(p, c.open[1].has_value());
    }
    ++rep.vectors;
    const bool acc0 = cand.count_bit0(coms, opens, values, true) > 0;
    int acc = acc0;
    if (acc0 || best < 1) acc += cand.count_bit1(coms, opens, true) > 0;
    best = std::max(best, acc);
  }
  rep.verify_calls = cand.calls;
  rep.per_rep_max = best / 2.0;
  rep.bound = std::pow(rep.per_rep_max, static_cast<double>(k));
  return rep;
}

struct BadChallengeReport {
  BitVector f_bad;
  std::uint64_t challenges = 0;
  std::uint64_t responses = 0;           // candidate full responses examined
  std::uint64_t accepting_off_fbad = 0;  // accepting (e, z) with e ≠ f_bad
  std::uint64_t accepting_at_fbad = 0;
};

// For Modified Hamiltonicity commitments to `msgs` under a binding
// single-bit ToyTable pp: counts accepting responses for every challenge.
// Full responses are products of per-repetition responses, so counts are
// products of per-repetition counts.
inline BadChallengeReport bad_challenge_check(const GraphInstance& x, const PublicParam& pp,
                                              const std::vector<BitVector>& msgs, Rng& rng) {
  x.validate();
  require(pp.scheme() == SchemeId::ToyTable && pp.toy().m_bits == 1, "bad challenge check: single-bit ToyTable pp");
  require(!msgs.empty() && msgs.size() <= 16, "bad challenge check: 1..16 repetitions");
  detail::RepCandidates cand(x, pp, SigmaFlavor::Modified);
  BadChallengeReport rep;
  rep.f_bad = f_bad(msgs, x);
  std::vector<std::array<std::uint64_t, 2>> hits(msgs.size()), tried(msgs.size());
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    require(msgs[i].size() == sigma_message_bits(SigmaFlavor::Modified, x.n), "bad challenge check: message length");
    std::vector<Commitment> coms;
    std::vector<detail::OpeningPair> opens;
    for (std::size_t p = 0; p < msgs[i].size(); ++p) {
      BitVector b(1);
      b.set(0, msgs[i].get(p));
      auto [c, o] = commit(pp, b, rng);
      opens.push_back(detail::toy_openings(pp.toy(), static_cast<std::uint32_t>(c.body.to_uint())));
      coms.push_back(std::move(c));
    }
    // Bit 0: the committed values plus every valid encoding.
    std::vector<BitVector> values{msgs[i]};
    for (const auto& enc : cand.encodings)
      if (!(enc == msgs[i])) values.push_back(enc);
    hits[i][0] = cand.count_values(coms, opens, values, false);
    tried[i][0] = values.size();
    hits[i][1] = cand.count_bit1(coms, opens, false);
    tried[i][1] = cand.cycles.size();
  }
  for (std::uint64_t ev = 0; ev < (std::uint64_t{1} << msgs.size()); ++ev) {
    BitVector e = BitVector::from_uint(ev, msgs.size());
    std::uint64_t acc = 1, cnt = 1;
    for (std::size_t i = 0; i < msgs.size(); ++i) {
      acc *= hits[i][e.get(i)];
      cnt *= tried[i][e.get(i)];
    }
    ++rep.challenges;
    rep.responses += cnt;
    (e == rep.f_bad ? rep.accepting_at_fbad : rep.accepting_off_fbad) += acc;
  }
  return rep;
}

}  // namespace ezk
