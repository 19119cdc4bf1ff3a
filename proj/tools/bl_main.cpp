#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bl/json_io.hpp"
#include "bl/optimize.hpp"
#include "bl/quadratic.hpp"

namespace {

using bl::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitParse = 3;
constexpr int kExitOptimizer = 4;
constexpr int kExitViolation = 5;

struct Options {
  std::string input;
  std::string functions;
  std::string out;
  double tol = 1e-8;
  int max_iter = 500;
  int restarts = 1;
  int grid = 128;
  std::uint64_t seed = 1;
  std::string side = "BL";
  bool seed_given = false;
  bool grid_given = false;
};

bl::MinorOptions minor_options() {
  bl::MinorOptions opts;
  if (const char* cap = std::getenv("BL_SUBSET_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(cap, &end, 10);
    if (end == cap || *end != '\0' || v == 0)
      throw std::invalid_argument("BL_SUBSET_CAP must be a positive integer");
    opts.cap = v;
  }
  return opts;
}

bl::MinimizeOptions minimize_options(const Options& o) {
  bl::MinimizeOptions m;
  m.tol = o.tol;
  m.max_iter = o.max_iter;
  m.seed = o.seed;
  return m;
}

void emit(const Options& o, const json& doc) {
  if (o.out.empty())
    std::cout << bl::dump_result(doc);
  else
    bl::write_result(o.out, doc);
}

json violations_json(const bl::ValidationReport& rep) {
  json arr = json::array();
  for (const auto& v : rep) arr.push_back({{"name", v.name}, {"detail", v.detail}});
  return arr;
}

int reject_invalid(const Options& o, const bl::ValidationReport& rep, const char* command) {
  json doc;
  doc["command"] = command;
  doc["valid"] = false;
  doc["violations"] = violations_json(rep);
  emit(o, doc);
  std::cerr << "invalid input: " << rep.front().name << ": " << rep.front().detail << "\n";
  return kExitValidation;
}

const char* feasibility_name(bl::Feasibility f) {
  switch (f) {
    case bl::Feasibility::relative_interior: return "relative_interior";
    case bl::Feasibility::boundary: return "boundary";
    default: return "infeasible";
  }
}

json feasibility_json(const bl::FeasibilityCertificate& cert) {
  json doc;
  doc["status"] = feasibility_name(cert.status);
  doc["epsilon"] = cert.epsilon;
  doc["admissible_count"] = cert.admissible.size();
  doc["exact_verified"] = cert.exact_verified;
  if (!cert.separator.empty()) {
    doc["separator"] = cert.separator;
    doc["separator_gap"] = cert.separator_gap;
  }
  return doc;
}

json optimum_json(const bl::GaussianOptimum& opt) {
  json doc;
  doc["D"] = opt.D;
  doc["E"] = opt.E;
  doc["F"] = bl::finite_or_inf(opt.F);
  doc["converged"] = opt.converged;
  doc["achieved"] = opt.achieved;
  doc["iterations"] = opt.iterations;
  doc["residual"] = opt.residual;
  if (opt.lambda.size() > 0) doc["lambda"] = bl::vector_json(opt.lambda);
  if (!opt.blocks.empty()) {
    json arr = json::array();
    for (const auto& a : opt.blocks) arr.push_back(bl::matrix_json(a));
    doc["blocks"] = arr;
  }
  if (!opt.note.empty()) doc["note"] = opt.note;
  return doc;
}

json certificate_json(const bl::AchievementCertificate& cert) {
  return {{"certified", cert.certified}, {"max_error", cert.max_error}};
}

// Convergence and non-achievement are both verdicts; exit 4 is reserved for
// stopping without either (iteration cap, stalled line search).
bool has_verdict(const bl::GaussianOptimum& opt) { return opt.converged || !opt.achieved; }

double mass_power(const bl::MultiDatum& d, const std::vector<bl::GridFunction>& f) {
  double acc = 1.0;
  for (int i = 0; i < d.m(); ++i) acc *= std::pow(f[i].total_mass(), d.blocks[i].c);
  return acc;
}

json estimate_json(const bl::IntegralEstimate& est) {
  return {{"value", est.value}, {"error", est.error}};
}

int cmd_constant(const Options& o) {
  bl::DatumDocument doc = bl::parse_datum(bl::load_json_file(o.input));
  json out;
  out["command"] = "constant";
  if (doc.rank_one) {
    const bl::RankOneDatum& d = doc.vectors;
    bl::ValidationReport rep = bl::validate(d);
    if (!bl::is_valid(rep)) return reject_invalid(o, rep, "constant");
    bl::MinorTable table = bl::minor_table(d, minor_options());
    bl::FeasibilityCertificate feas = bl::feasibility(d, table);
    bl::MinimizeOptions mo = minimize_options(o);
    mo.feasibility = &feas;
    bl::GaussianOptimum opt = bl::minimize(d, table, d.c, mo);
    out["feasibility"] = feasibility_json(feas);
    out["optimum"] = optimum_json(opt);
    if (opt.converged && opt.achieved && opt.D > 0)
      out["certificate"] = certificate_json(bl::achievement_certificate(d, table, opt.lambda));
    if (o.restarts > 1 && opt.converged && opt.achieved && opt.D > 0) {
      bool agree = true;
      double spread = 0.0;
      for (int k = 1; k < o.restarts; ++k) {
        bl::MinimizeOptions mk = mo;
        mk.randomize_start = true;
        mk.seed = bl::split_seed(o.seed, k);
        bl::GaussianOptimum run = bl::minimize(d, table, d.c, mk);
        auto [same, ratio] = bl::uniqueness_check(opt, run);
        agree = agree && same && run.converged;
        spread = std::max(spread, std::abs(std::log(opt.D) - std::log(run.D)));
      }
      out["restarts"] = {{"runs", o.restarts}, {"agree", agree}, {"log_D_spread", spread}};
    }
    emit(o, out);
    return has_verdict(opt) ? kExitOk : kExitOptimizer;
  }
  bl::ValidationReport rep = bl::validate(doc.blocks);
  if (!bl::is_valid(rep)) return reject_invalid(o, rep, "constant");
  bl::GaussianOptimum opt = bl::minimize_block(doc.blocks, minimize_options(o));
  out["optimum"] = optimum_json(opt);
  emit(o, out);
  return has_verdict(opt) ? kExitOk : kExitOptimizer;
}

int cmd_analyze(const Options& o) {
  bl::DatumDocument doc = bl::parse_datum(bl::load_json_file(o.input));
  json out;
  out["command"] = "analyze";
  if (!doc.rank_one) {
    bl::ValidationReport rep = bl::validate(doc.blocks);
    if (!bl::is_valid(rep)) return reject_invalid(o, rep, "analyze");
    out["valid"] = true;
    bl::GaussianOptimum opt = bl::minimize_block(doc.blocks, minimize_options(o));
    out["optimum"] = optimum_json(opt);
    emit(o, out);
    return has_verdict(opt) ? kExitOk : kExitOptimizer;
  }
  const bl::RankOneDatum& d = doc.vectors;
  bl::ValidationReport rep = bl::validate(d);
  if (!bl::is_valid(rep)) return reject_invalid(o, rep, "analyze");
  out["valid"] = true;
  bl::MinorTable table = bl::minor_table(d, minor_options());
  bl::AdaptedPartition part = bl::decompose(d, table);
  json structure;
  structure["blocks"] = part.blocks;
  structure["irreducible"] = part.irreducible;
  structure["log_obliquity"] = part.log_obliquity;
  out["structure"] = structure;
  bl::FeasibilityCertificate feas = bl::feasibility(d, table);
  out["feasibility"] = feasibility_json(feas);
  bl::MinimizeOptions mo = minimize_options(o);
  mo.feasibility = &feas;
  bl::GaussianOptimum opt = bl::minimize(d, table, d.c, mo);
  out["optimum"] = optimum_json(opt);
  if (opt.converged && opt.achieved && opt.D > 0)
    out["certificate"] = certificate_json(bl::achievement_certificate(d, table, opt.lambda));
  bool blocks_ok = true;
  if (part.blocks.size() > 1) {
    json block_results = json::array();
    double log_product = part.log_obliquity;
    for (std::size_t j = 0; j < part.blocks.size(); ++j) {
      bl::RankOneDatum sub = bl::split(d, part)[j];
      bl::MinorTable sub_table = bl::minor_table(sub, minor_options());
      bl::GaussianOptimum sub_opt = bl::minimize(sub, sub_table, sub.c, minimize_options(o));
      blocks_ok = blocks_ok && has_verdict(sub_opt);
      json entry;
      entry["indices"] = part.blocks[j];
      entry["optimum"] = optimum_json(sub_opt);
      block_results.push_back(entry);
      log_product += sub_opt.D > 0 ? std::log(sub_opt.D) : -std::numeric_limits<double>::infinity();
    }
    out["block_results"] = block_results;
    out["block_product_D"] = std::exp(log_product);
  }
  emit(o, out);
  return has_verdict(opt) && blocks_ok ? kExitOk : kExitOptimizer;
}

int cmd_verify(const Options& o) {
  bl::DatumDocument doc = bl::parse_datum(bl::load_json_file(o.input));
  bl::MultiDatum multi = doc.as_multi();
  bl::ValidationReport rep = doc.rank_one ? bl::validate(doc.vectors) : bl::validate(multi);
  if (!bl::is_valid(rep)) return reject_invalid(o, rep, "verify");

  json out;
  out["command"] = "verify";
  out["side"] = o.side;

  bl::GaussianOptimum opt;
  if (doc.rank_one) {
    bl::MinorTable table = bl::minor_table(doc.vectors, minor_options());
    bl::FeasibilityCertificate feas = bl::feasibility(doc.vectors, table);
    bl::MinimizeOptions mo = minimize_options(o);
    mo.feasibility = &feas;
    opt = bl::minimize(doc.vectors, table, doc.vectors.c, mo);
    out["feasibility"] = feasibility_json(feas);
  } else {
    opt = bl::minimize_block(multi, minimize_options(o));
  }
  out["optimum"] = optimum_json(opt);
  if (!has_verdict(opt)) {
    emit(o, out);
    std::cerr << "optimizer did not converge\n";
    return kExitOptimizer;
  }

  std::vector<bl::GridFunction> f, h;
  if (!o.functions.empty()) {
    bl::FunctionsDocument fns = bl::parse_functions(bl::load_json_file(o.functions));
    f = fns.f;
    h = fns.h;
    if (static_cast<int>(f.size()) != multi.m())
      throw std::invalid_argument("functions file must supply one factor per block");
  } else {
    if (!doc.rank_one)
      throw std::invalid_argument("extremizer generation needs rank-one data; pass a functions file");
    if (!opt.achieved || opt.D <= 0) {
      out["verdict"] = "constant not achieved; no extremizer family to sample";
      emit(o, out);
      return kExitOk;
    }
    for (const auto& desc : bl::extremizer_family(doc.vectors, opt, bl::Side::RBL))
      f.push_back(bl::descriptor_grid(desc, o.grid));
    for (const auto& desc : bl::extremizer_family(doc.vectors, opt, bl::Side::BL))
      h.push_back(bl::descriptor_grid(desc, o.grid));
  }

  bl::FunctionalOptions fo;
  fo.grid = o.grid;
  bool violation = false;
  if (o.side == "BL") {
    bl::IntegralEstimate est = bl::eval_J(multi, h, fo);
    double bound = opt.F * mass_power(multi, h);
    out["integral"] = estimate_json(est);
    out["bound"] = bl::finite_or_inf(bound);
    violation = std::isfinite(bound) && est.value > bound + est.error + 1e-9 * std::abs(bound) + 1e-12;
  } else if (o.side == "RBL") {
    bl::IntegralEstimate est = bl::eval_I(multi, f, fo);
    double bound = opt.E * mass_power(multi, f);
    out["integral"] = estimate_json(est);
    out["bound"] = bound;
    violation = est.value < bound - (est.error + 1e-9 * std::abs(bound) + 1e-12);
  } else {
    bl::FondReport rep2 = bl::verify_fond(multi, f, h, opt.D, fo);
    out["I"] = estimate_json(rep2.I);
    out["J"] = estimate_json(rep2.J);
    out["gap"] = rep2.gap;
    out["normalized"] = rep2.normalized;
    violation = rep2.violation;
  }
  out["violation"] = violation;
  emit(o, out);
  if (violation) {
    std::cerr << "inequality violated beyond the reported error\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_zonoid(const Options& o) {
  bl::ZonoidDocument doc = bl::parse_zonoid(bl::load_json_file(o.input));
  bl::ValidationReport rep = bl::validate(doc.ball);
  if (!bl::is_valid(rep)) return reject_invalid(o, rep, "zonoid");
  json out;
  out["command"] = "zonoid";
  bl::ZonoidReport zr = bl::zonoid_bound_check(doc.ball, doc.alpha);
  out["volume"] = zr.volume;
  out["bound"] = zr.bound;
  out["pass"] = zr.pass;
  if (o.seed_given) {
    bl::McVolume mc = bl::zonotope_volume_mc({doc.ball.u, doc.alpha}, 200000, o.seed);
    out["mc"] = {{"value", mc.value}, {"sigma", mc.sigma}, {"samples", mc.samples}};
  }
  if (o.grid_given) {
    bl::FunctionalOptions fo;
    fo.grid = o.grid;
    out["functional"] = estimate_json(bl::zonotope_volume_functional(doc.ball, doc.alpha, fo));
  }
  emit(o, out);
  if (!zr.pass) {
    std::cerr << "zonoid bound violated\n";
    return kExitViolation;
  }
  return kExitOk;
}

int cmd_young(const Options& o) {
  bl::YoungDocument doc = bl::parse_young(bl::load_json_file(o.input));
  bl::YoungResult res = bl::young_constant(doc.v, doc.n, doc.r, doc.p, minimize_options(o));
  json out;
  out["command"] = "young";
  out["exponents"] = bl::vector_json(res.datum.c);
  out["feasibility"] = feasibility_json(res.feasibility);
  out["optimum"] = optimum_json(res.opt);
  out["certificate"] = certificate_json(res.certificate);
  emit(o, out);
  return has_verdict(res.opt) ? kExitOk : kExitOptimizer;
}

int dispatch(const std::string& command, const Options& o) {
  {
    std::ifstream probe(o.input);
    if (!probe) {
      std::cerr << "cannot read '" << o.input << "'\n";
      return kExitParse;
    }
  }
  if (command == "analyze") return cmd_analyze(o);
  if (command == "constant") return cmd_constant(o);
  if (command == "verify") return cmd_verify(o);
  if (command == "zonoid") return cmd_zonoid(o);
  return cmd_young(o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp constants, extremizers, and inequality checks for multilinear data"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd, bool functions) {
    cmd->add_option("input", o.input, "input JSON document")->required();
    if (functions)
      cmd->add_option("functions", o.functions, "JSON test functions {\"f\": [...], \"h\": [...]}");
    cmd->add_option("--out", o.out, "write the report here instead of stdout");
    cmd->add_option("--tol", o.tol, "optimizer stationarity tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", o.max_iter, "optimizer iteration cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--restarts", o.restarts, "independent optimizer starts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--grid", o.grid, "grid cells per axis for integral estimates")
        ->check(CLI::Range(4, 4096))
        ->each([&](const std::string&) { o.grid_given = true; });
    cmd->add_option("--seed", o.seed, "seed for randomized starts and sampling")
        ->each([&](const std::string&) { o.seed_given = true; });
    cmd->add_option("--side", o.side, "inequality side: BL, RBL, or fond")
        ->check(CLI::IsMember({"BL", "RBL", "fond"}));
  };

  add_common(app.add_subcommand("analyze", "validate, decompose, and certify a datum"), false);
  add_common(app.add_subcommand("constant", "compute the sharp constant"), false);
  add_common(app.add_subcommand("verify", "check the integral inequality numerically"), true);
  add_common(app.add_subcommand("zonoid", "zonotope volume against its lower bound"), false);
  add_common(app.add_subcommand("young", "sharp constant of a generalized Young inequality"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage problems exit 1; --help stays 0
    return app.exit(e) == 0 ? 0 : 1;
  }
  std::string command = app.get_subcommands().front()->get_name();

  try {
    return dispatch(command, o);
  } catch (const bl::json::parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const bl::subset_cap_error& e) {
    std::cerr << "subset cap: requested " << e.requested << " exceeds cap " << e.cap << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::length_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "optimizer failure: " << e.what() << "\n";
    return kExitOptimizer;
  }
}
