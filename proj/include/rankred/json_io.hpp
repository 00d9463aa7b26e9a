#pragma once

// JSON wire formats. Matrices are arrays of rows of finite doubles.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rankred/equilibrium.hpp"
#include "rankred/game.hpp"
#include "rankred/genericlab.hpp"
#include "rankred/matrix_core.hpp"
#include "rankred/pencil.hpp"
#include "rankred/reduction.hpp"

namespace rankred::io {

using nlohmann::json;

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(what + " must be a non-empty array of rows");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) {
      throw std::invalid_argument(what + " must be an array of rows");
    }
    std::vector<double> vals;
    for (const auto& x : row) {
      if (!x.is_number()) {
        throw std::invalid_argument(what + " contains a non-numeric entry");
      }
      vals.push_back(x.get<double>());
    }
    rows.push_back(std::move(vals));
  }
  try {
    return matrix_from_rows(rows);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
}

inline Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw std::invalid_argument(what + " must be an array");
  }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number() || !std::isfinite(j[i].get<double>())) {
      throw std::invalid_argument(what + " contains a non-finite or non-numeric entry");
    }
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

// Game file: {"m": int, "n": int, "A": [[..]], "B": [[..]]}

inline json to_json(const BimatrixGame& g) {
  return json{{"m", g.m()}, {"n", g.n()}, {"A", to_json(g.a())}, {"B", to_json(g.b())}};
}

inline BimatrixGame game_from_json(const json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("game file must be a JSON object");
  }
  for (const char* key : {"m", "n", "A", "B"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("game file is missing \"") + key + "\"");
    }
  }
  if (!j["m"].is_number_integer() || !j["n"].is_number_integer() || j["m"].get<long>() < 1 ||
      j["n"].get<long>() < 1) {
    throw std::invalid_argument("game file: m and n must be positive integers");
  }
  const auto m = j["m"].get<Index>();
  const auto n = j["n"].get<Index>();
  Matrix a = matrix_from_json(j["A"], "A");
  Matrix b = matrix_from_json(j["B"], "B");
  if (a.rows() != m || a.cols() != n || b.rows() != m || b.cols() != n) {
    throw std::invalid_argument("game file: A and B must both be " + std::to_string(m) + "x" +
                                std::to_string(n));
  }
  return BimatrixGame(std::move(a), std::move(b));
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in '" + path + "': " + e.what());
  }
}

inline BimatrixGame load_game(const std::string& path) { return game_from_json(parse_file(path)); }

// Spectrum: {"eigenvalues":[{"re","im","mult"}],"r","q", ...}

inline json to_json(const PencilSpectrum& s) {
  json eig = json::array();
  for (const auto& e : s.eigenvalues) {
    eig.push_back({{"re", e.value.real()}, {"im", e.value.imag()}, {"mult", e.multiplicity}});
  }
  json out{{"eigenvalues", eig},
           {"r", s.r},
           {"q", s.q},
           {"generic_rank", s.generic_rank},
           {"empty", s.empty},
           {"stages", s.stages}};
  if (!s.warnings.empty()) out["warnings"] = s.warnings;
  return out;
}

inline PencilSpectrum spectrum_from_json(const json& j) {
  PencilSpectrum s;
  for (const auto& e : j.at("eigenvalues")) {
    s.eigenvalues.push_back(
        {Complex{e.at("re").get<double>(), e.at("im").get<double>()}, e.at("mult").get<Index>()});
  }
  s.r = j.at("r").get<Index>();
  s.q = j.at("q").get<Index>();
  s.generic_rank = j.value("generic_rank", s.r + s.q);
  s.stages = j.value("stages", Index{0});
  s.empty = s.eigenvalues.empty();
  return s;
}

// Certificate: {"gamma_star","u_hat"|null,"v_hat"|null,"A_hat","B_hat",
//               "rank_before","rank_after","path","transposed"}

inline json to_json(const ReductionCertificate& c) {
  return json{{"gamma_star", c.gamma_star},
              {"u_hat", c.u_hat ? to_json(*c.u_hat) : json(nullptr)},
              {"v_hat", c.v_hat ? to_json(*c.v_hat) : json(nullptr)},
              {"A_hat", to_json(c.reduced.a())},
              {"B_hat", to_json(c.reduced.b())},
              {"rank_before", c.rank_before},
              {"rank_after", c.rank_after},
              {"path", to_string(c.path)},
              {"transposed", c.transposed}};
}

inline ReductionCertificate certificate_from_json(const json& j) {
  ReductionCertificate c{
      j.at("gamma_star").get<double>(),
      std::nullopt,
      std::nullopt,
      BimatrixGame(matrix_from_json(j.at("A_hat"), "A_hat"), matrix_from_json(j.at("B_hat"), "B_hat")),
      j.at("rank_before").get<Index>(),
      j.at("rank_after").get<Index>(),
      path_from_string(j.at("path").get<std::string>()),
      j.value("transposed", false),
      std::nullopt};
  if (!j.at("u_hat").is_null()) c.u_hat = vector_from_json(j["u_hat"], "u_hat");
  if (!j.at("v_hat").is_null()) c.v_hat = vector_from_json(j["v_hat"], "v_hat");
  return c;
}

// Equilibria: {"profiles":[{"p","q","payoffs":[..,..]}],"degenerate":bool}

inline json to_json(const EquilibriumSet& e) {
  json profiles = json::array();
  for (const auto& p : e.profiles) {
    profiles.push_back(
        {{"p", to_json(p.p)}, {"q", to_json(p.q)}, {"payoffs", {p.payoff1, p.payoff2}}});
  }
  return json{{"profiles", profiles}, {"degenerate", e.degenerate}};
}

inline json to_json(const ExperimentReport& r) {
  return json{{"kind", to_string(r.kind)},     {"trials", r.trials},
              {"successes", r.successes},      {"failures", r.failures},
              {"rechecked", r.rechecked},      {"seed", r.seed}};
}

inline json to_json(const PATParams& p) {
  return json{{"alpha1", p.alpha1}, {"alpha2", p.alpha2}, {"beta1", p.beta1},
              {"beta2", p.beta2},   {"u", to_json(p.u)},  {"v", to_json(p.v)}};
}

}  // namespace rankred::io
