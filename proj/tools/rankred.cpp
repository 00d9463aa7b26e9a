// rankred: command-line front end.
//
// Exit codes: 0 success, 1 usage / IO / validation, 2 size cap,
// 3 no reduction (path None, already zero-sum, experiment failures).

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rankred/json_io.hpp"
#include "rankred/rankred.hpp"

namespace {

using rankred::io::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCap = 2;
constexpr int kExitNoReduction = 3;

struct Common {
  double tol_rank = rankred::Tolerance{}.rank_tol;
  double tol_eig = rankred::Tolerance{}.eig_tol;
  double tol_residual = rankred::Tolerance{}.residual_tol;
  std::uint64_t seed = 0;
  std::string out;
  bool verify = true;
  CLI::Option* verify_opt = nullptr;

  [[nodiscard]] rankred::Tolerance tolerance() const {
    rankred::Tolerance t{tol_rank, tol_eig, tol_residual};
    t.validate();
    return t;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  const auto unit = CLI::Range(0.0, 1.0) & CLI::PositiveNumber;
  cmd->add_option("--tol-rank", c.tol_rank, "relative rank threshold")->check(unit);
  cmd->add_option("--tol-eig", c.tol_eig, "eigenvalue clustering radius")->check(unit);
  cmd->add_option("--tol-residual", c.tol_residual, "linear solve residual bound")->check(unit);
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--out", c.out, "write JSON here instead of stdout");
  c.verify_opt = cmd->add_flag("--verify,!--no-verify", c.verify,
                               "oracle verification (default: on within the size cap)");
}

void emit(const Common& c, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) {
    throw std::runtime_error("cannot write '" + c.out + "'");
  }
  f << text;
  if (!f) {
    throw std::runtime_error("write to '" + c.out + "' failed");
  }
}

json verify_certificate(const rankred::BimatrixGame& g, const rankred::ReductionCertificate& cert,
                        const rankred::Tolerance& tol, bool& ok) {
  json v;
  const rankred::BimatrixGame again = rankred::replay(g, cert);
  const double scale =
      1.0 + cert.reduced.a().cwiseAbs().maxCoeff() + cert.reduced.b().cwiseAbs().maxCoeff();
  const double err = std::max((again.a() - cert.reduced.a()).cwiseAbs().maxCoeff(),
                              (again.b() - cert.reduced.b()).cwiseAbs().maxCoeff());
  const bool replay_ok = err <= tol.residual_tol * scale;
  const bool ranks_ok = rankred::game_rank(g, tol) == cert.rank_before &&
                        rankred::game_rank(again, tol) == cert.rank_after;
  v["replay"] = replay_ok;
  v["ranks"] = ranks_ok;
  ok = replay_ok && ranks_ok;
  try {
    const bool same = rankred::equivalent(g, cert.reduced);
    v["equivalent"] = same;
    ok = ok && same;
  } catch (const rankred::DegenerateGame&) {
    v["equivalent"] = nullptr;
    v["warning"] = "degenerate game: equilibrium comparison skipped";
  }
  return v;
}

int cmd_reduce(const std::string& file, const Common& c) {
  const auto tol = c.tolerance();
  const rankred::BimatrixGame g = rankred::io::load_game(file);
  const rankred::ReductionCertificate cert = rankred::reduce(g, tol);
  json out = rankred::io::to_json(cert);
  if (cert.spectrum && !cert.spectrum->warnings.empty()) {
    out["warnings"] = cert.spectrum->warnings;
  }
  const bool within_cap = g.m() <= rankred::kDefaultOracleCap && g.n() <= rankred::kDefaultOracleCap;
  const bool want_verify = c.verify_opt->count() > 0 ? c.verify : within_cap;
  bool ok = true;
  if (want_verify) {
    if (!within_cap) {
      std::cerr << "rankred: --verify needs a game within " << rankred::kDefaultOracleCap << "x"
                << rankred::kDefaultOracleCap << "\n";
      return kExitCap;
    }
    out["verification"] = verify_certificate(g, cert, tol, ok);
  }
  emit(c, out);
  if (!ok) {
    std::cerr << "rankred: verification failed\n";
    return kExitUsage;
  }
  return cert.path == rankred::ReductionPath::None ? kExitNoReduction : kExitOk;
}

int cmd_pencil(const std::string& file, const Common& c) {
  const auto tol = c.tolerance();
  const rankred::BimatrixGame g = rankred::io::load_game(file);
  const rankred::PencilSpectrum spec = rankred::twcf_spectrum(g.a(), g.b(), tol);
  json positive = json::array();
  for (const auto& e : rankred::positive_real_spectrum(spec, tol)) {
    positive.push_back({{"value", e.value}, {"mult", e.multiplicity}});
  }
  json table = json::array();
  for (const auto& e : spec.eigenvalues) {
    table.push_back({{"re", e.value.real()},
                     {"im", e.value.imag()},
                     {"rank", rankred::rank_at(spec, e.value, tol)},
                     {"direct_rank", rankred::direct_pencil_rank(g.a(), g.b(), e.value, tol)}});
  }
  emit(c, json{{"spectrum", rankred::io::to_json(spec)},
               {"positive_real", positive},
               {"rank_table", table}});
  return kExitOk;
}

int cmd_solve(const std::string& file, const Common& c) {
  const rankred::BimatrixGame g = rankred::io::load_game(file);
  emit(c, rankred::io::to_json(rankred::enumerate_equilibria(g)));
  return kExitOk;
}

struct GenerateArgs {
  std::string kind;
  rankred::Index m = 0;
  rankred::Index n = 0;
  rankred::Index k = 3;
  rankred::Index base_rank = 0;
  std::optional<double> gamma;
  double constant = 1.0;
};

int cmd_generate(const GenerateArgs& a, const Common& c) {
  const auto tol = c.tolerance();
  const rankred::Index n = a.n > 0 ? a.n : a.m;
  if (a.m < 1 || n < 1) {
    throw std::invalid_argument("generate: --m (and --n) must be positive");
  }
  rankred::detail::UniformSource src(c.seed);
  json out;
  if (a.kind == "ZeroSum") {
    rankred::Matrix pay = src.matrix(a.m, n);
    rankred::Matrix neg = -pay;
    out = rankred::io::to_json(rankred::BimatrixGame(std::move(pay), std::move(neg)));
  } else if (a.kind == "ConstantSum") {
    rankred::Matrix pay = src.matrix(a.m, n);
    rankred::Matrix rest = rankred::Matrix::Constant(a.m, n, a.constant) - pay;
    out = rankred::io::to_json(rankred::BimatrixGame(std::move(pay), std::move(rest)));
  } else if (a.kind == "PlantedPAT") {
    double gamma = 0.0;
    if (a.gamma) {
      gamma = *a.gamma;
    } else {
      std::mt19937_64 gen(c.seed ^ 0x9a77a5eedULL);
      gamma = std::exp(std::uniform_real_distribution<double>(std::log(0.1), std::log(10.0))(gen));
    }
    const auto planted = rankred::plant_pat_game(a.m, n, a.base_rank, gamma, c.seed);
    out = rankred::io::to_json(planted.game);
    out["base"] = rankred::io::to_json(planted.base);
    out["params"] = rankred::io::to_json(planted.params);
    out["params"]["gamma"] = planted.gamma;
    out["params"]["base_rank"] = a.base_rank;
  } else if (a.kind == "StructuredRect") {
    const auto g = rankred::sample_structured_rect_game(a.m, n, a.k, c.seed);
    const rankred::Matrix sum = g.sum();
    if (!rankred::in_column_span(sum, rankred::ones(g.m()), tol) ||
        !rankred::in_column_span(sum.transpose(), rankred::ones(g.n()), tol)) {
      throw rankred::NumericError("generate: span conditions failed on the generated game");
    }
    out = rankred::io::to_json(g);
  } else if (a.kind == "GenericSquare") {
    if (a.n > 0 && a.n != a.m) {
      throw std::invalid_argument("generate: GenericSquare needs m = n");
    }
    out = rankred::io::to_json(rankred::sample_square_game(a.m, c.seed, tol));
  } else {
    throw std::invalid_argument("unknown game kind '" + a.kind + "'");
  }
  emit(c, out);
  return kExitOk;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

rankred::Index parse_index(const std::string& s) {
  std::size_t pos = 0;
  const long v = std::stol(s, &pos);
  if (pos != s.size()) {
    throw std::invalid_argument("bad size '" + s + "'");
  }
  return static_cast<rankred::Index>(v);
}

int cmd_experiment(const std::string& kind, int trials, const std::string& sizes,
                   const Common& c) {
  rankred::ExperimentConfig cfg;
  cfg.kind = rankred::experiment_kind_from_string(kind);
  cfg.trials = trials;
  cfg.seed = c.seed;
  if (!sizes.empty()) {
    if (cfg.kind == rankred::ExperimentKind::SquareLimit) {
      cfg.square_sizes.clear();
      for (const auto& p : split(sizes, ',')) cfg.square_sizes.push_back(parse_index(p));
    } else {
      cfg.rect_sizes.clear();
      for (const auto& p : split(sizes, ',')) {
        const auto dims = split(p, 'x');
        if (dims.size() != 3) {
          throw std::invalid_argument("rectangular sizes are written MxNxK, got '" + p + "'");
        }
        cfg.rect_sizes.push_back({parse_index(dims[0]), parse_index(dims[1]), parse_index(dims[2])});
      }
    }
  }
  const auto report = rankred::run_experiment(cfg, c.tolerance());
  emit(c, rankred::io::to_json(report));
  return report.failures.empty() ? kExitOk : kExitNoReduction;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank reduction of bimatrix games by positive affine transformations"};
  app.require_subcommand(1);

  Common common;
  std::string game_file;

  auto* reduce = app.add_subcommand("reduce", "reduce a game and print its certificate");
  reduce->add_option("game", game_file, "game JSON file")->required();
  add_common(reduce, common);

  auto* pencil = app.add_subcommand("pencil", "print the pencil spectrum of (A, B)");
  pencil->add_option("game", game_file, "game JSON file")->required();
  add_common(pencil, common);

  auto* solve = app.add_subcommand("solve", "enumerate Nash equilibria (small games)");
  solve->add_option("game", game_file, "game JSON file")->required();
  add_common(solve, common);

  GenerateArgs gen;
  double gamma_value = 0.0;
  auto* generate = app.add_subcommand("generate", "write a random game");
  generate->add_option("kind", gen.kind, "ZeroSum|ConstantSum|PlantedPAT|StructuredRect|GenericSquare")
      ->required();
  generate->add_option("--m", gen.m, "rows")->required();
  generate->add_option("--n", gen.n, "columns (default: m)");
  generate->add_option("--k", gen.k, "target rank of A + B (StructuredRect)");
  generate->add_option("--base-rank", gen.base_rank, "rank of the planted base game (0 or 1)");
  auto* gamma_opt = generate->add_option("--gamma", gamma_value, "planted pencil eigenvalue");
  generate->add_option("--constant", gen.constant, "payoff sum (ConstantSum)");
  add_common(generate, common);

  std::string exp_kind;
  int trials = 0;
  std::string sizes;
  auto* experiment = app.add_subcommand("experiment", "statistical reduction experiment");
  experiment->add_option("kind", exp_kind, "SquareLimit|RectTwoStep")->required();
  experiment->add_option("--trials", trials, "number of trials")->required();
  experiment->add_option("--sizes", sizes, "e.g. 2,3,4 or 4x6x3,5x8x5");
  add_common(experiment, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (auto* sub : app.get_subcommands()) {
    common.verify_opt = sub->get_option("--verify");
  }

  try {
    if (*reduce) return cmd_reduce(game_file, common);
    if (*pencil) return cmd_pencil(game_file, common);
    if (*solve) return cmd_solve(game_file, common);
    if (*generate) {
      if (gamma_opt->count() > 0) gen.gamma = gamma_value;
      return cmd_generate(gen, common);
    }
    if (*experiment) return cmd_experiment(exp_kind, trials, sizes, common);
  } catch (const rankred::AlreadyZeroSum& e) {
    std::cerr << "rankred: " << e.what() << "\n";
    return kExitNoReduction;
  } catch (const rankred::SizeCapExceeded& e) {
    std::cerr << "rankred: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    std::cerr << "rankred: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
