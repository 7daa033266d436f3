#pragma once

// Experiment reports and fixture files.
//
// Report: {fixture_id, dims, params {t, T, delta, epsilon}, measured
// {success_prob, td, bound}, pass, details}. Measured numbers below 1 in
// magnitude are snapped to a 1e-12 grid (12 significant digits otherwise),
// then printed as the shortest round-trip decimal. Eigen-solver noise
// (~1e-15) vanishes, so reports are byte-stable across platforms. Params keep
// 12 significant digits.
//
// Fixture files hold dense complex matrices as {"rows", "cols", "data"} with
// data the row-major list of [re, im] pairs.

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "ezk/qsim/gk.hpp"
#include "json.hpp"

namespace ezk::qsim {

using nlohmann::json;

inline double quantize(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, std::abs(x) < 1 ? "%.12f" : "%.12g", x);
  const double q = std::strtod(buf, nullptr);
  return q == 0 ? 0.0 : q;  // drop the sign of negative zero
}

// Closed-form parameters carry no solver noise, so they keep 12 significant
// digits at any magnitude (t is around 1e-24 in the simulator schedule).
inline double quantize_significant(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double q = std::strtod(buf, nullptr);
  return q == 0 ? 0.0 : q;
}

inline json qnum(std::optional<double> x) { return x ? json(quantize(*x)) : json(nullptr); }
inline json qparam(std::optional<double> x) { return x ? json(quantize_significant(*x)) : json(nullptr); }

// Recursively quantizes every floating-point value of a details object.
inline json quantized(const json& j) {
  if (j.is_number_float()) return quantize(j.get<double>());
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto& v : out) v = quantized(v);
    return out;
  }
  return j;
}

struct QsimReport {
  std::string fixture_id;
  std::vector<std::pair<std::string, std::size_t>> dims;
  std::optional<double> t, T, delta, epsilon;
  std::optional<double> success_prob, td, bound;
  bool pass = false;
  json details = json::object();

  json to_json() const {
    json d = json::object();
    for (const auto& [k, v] : dims) d[k] = v;
    return json{{"fixture_id", fixture_id},
                {"dims", d},
                {"params", {{"t", qparam(t)}, {"T", qparam(T)}, {"delta", qparam(delta)}, {"epsilon", qparam(epsilon)}}},
                {"measured", {{"success_prob", qnum(success_prob)}, {"td", qnum(td)}, {"bound", qnum(bound)}}},
                {"pass", pass},
                {"details", quantized(details)}};
  }
};

// ---------------------------------------------------------------------------
// Matrices and toy tables

inline json mat_to_json(const Mat& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Mat mat_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>(), cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  require(rows >= 1 && cols >= 1 && data.size() == static_cast<std::size_t>(rows * cols), "matrix: shape mismatch");
  Mat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, ++k) {
      const auto& e = data[k];
      require(e.is_array() && e.size() == 2, "matrix: entries must be [re, im]");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

inline json toy_to_json(const ToyTableParams& pp) {
  json table = json::array();
  for (auto v : pp.table) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%x", v);
    table.push_back(buf);
  }
  return {{"m_bits", pp.m_bits}, {"r_bits", pp.r_bits}, {"c_bits", pp.c_bits}, {"table", table}};
}

inline ToyTableParams toy_from_json(const json& j) {
  ToyTableParams pp;
  pp.m_bits = j.at("m_bits").get<std::uint32_t>();
  pp.r_bits = j.at("r_bits").get<std::uint32_t>();
  std::uint32_t widest = 0;
  for (const auto& s : j.at("table")) {
    const std::string h = s.get<std::string>();
    char* end = nullptr;
    const unsigned long v = std::strtoul(h.c_str(), &end, 16);
    require(!h.empty() && *end == '\0' && v < (1UL << 24), "toy table: bad hex entry");
    pp.table.push_back(static_cast<std::uint32_t>(v));
    widest = std::max(widest, static_cast<std::uint32_t>(v));
  }
  if (j.contains("c_bits")) {
    pp.c_bits = j["c_bits"].get<std::uint32_t>();
  } else {
    pp.c_bits = 1;
    while ((1U << pp.c_bits) <= widest) ++pp.c_bits;
  }
  pp.validate();
  return pp;
}

// ---------------------------------------------------------------------------
// Fixture files

inline json adversary_to_json(const ToyAdversary& a, const ToyTableParams& pp) {
  json layout = json::array(), com = json::array();
  for (const auto& r : a.layout.registers()) layout.push_back({{"name", r.name}, {"dim", r.dim}});
  for (const auto& b : a.com) com.push_back({{"prob", b.prob}, {"com", b.com}, {"rho_st", mat_to_json(b.rho_st)}});
  return {{"kind", "toy-adversary"}, {"id", a.id},         {"pp", toy_to_json(pp)},
          {"layout", layout},        {"com", com},         {"open", mat_to_json(a.open.apply(identity(a.open.dim())))}};
}

inline std::pair<ToyAdversary, ToyTableParams> adversary_from_json(const json& j) {
  require(j.at("kind") == "toy-adversary", "fixture: not a toy-adversary file");
  ToyTableParams pp = toy_from_json(j.at("pp"));
  std::vector<Register> regs;
  for (const auto& r : j.at("layout")) regs.push_back({r.at("name").get<std::string>(), r.at("dim").get<std::size_t>()});
  std::vector<ComBranch> com;
  for (const auto& b : j.at("com"))
    com.push_back({b.at("prob").get<double>(), b.at("com").get<std::uint32_t>(), mat_from_json(b.at("rho_st"))});
  ToyAdversary a{j.at("id").get<std::string>(), RegisterLayout(std::move(regs)), std::move(com),
                 UnitaryOracle::dense(mat_from_json(j.at("open")))};
  a.validate(pp);
  return {std::move(a), std::move(pp)};
}

inline json verifier_to_json(const MiniVerifier& v) {
  auto dense = [](const UnitaryOracle& o) { return mat_to_json(o.apply(identity(o.dim()))); };
  json open = json::array(), fin = json::array();
  for (const auto& o : v.open) open.push_back(dense(o));
  for (const auto& f : v.final) fin.push_back(dense(f));
  return {{"kind", "mini-verifier"}, {"id", v.id},          {"pp", toy_to_json(v.pp)}, {"dim_v", v.dim_v},
          {"rho0", mat_to_json(v.rho0)}, {"com", dense(v.com)}, {"open", open},        {"final", fin}};
}

inline MiniVerifier verifier_from_json(const json& j) {
  require(j.at("kind") == "mini-verifier", "fixture: not a mini-verifier file");
  MiniVerifier v{j.at("id").get<std::string>(), toy_from_json(j.at("pp")), j.at("dim_v").get<std::size_t>(),
                 mat_from_json(j.at("rho0")),   UnitaryOracle::dense(mat_from_json(j.at("com"))), {}, {}};
  for (const auto& o : j.at("open")) v.open.push_back(UnitaryOracle::dense(mat_from_json(o)));
  for (const auto& f : j.at("final")) v.final.push_back(UnitaryOracle::dense(mat_from_json(f)));
  v.validate();
  return v;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

}  // namespace ezk::qsim
