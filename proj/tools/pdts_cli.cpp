#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdts/pdts.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pdts;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Output {
  bool json = false;
  bool timings = false;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(ordered_json record, const std::string& text_value) const {
    if (json) {
      if (timings) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        record["elapsed_ms"] = ms;
      }
      std::cout << record.dump() << "\n";
    } else {
      std::cout << text_value << "\n";
    }
  }
};

int dispatch_exit(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  if (dynamic_cast<const FuelExhausted*>(&e) || dynamic_cast<const LeafCapExceeded*>(&e) ||
      dynamic_cast<const TooManyWorlds*>(&e) || dynamic_cast<const TooManyAtoms*>(&e))
    return 3;
  if (dynamic_cast<const Error*>(&e)) return 2;
  return 2;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"lambda-P-rho toolkit: dependent type checking, probabilistic reduction, and "
               "Markov logic inference"};
  app.require_subcommand(1);
  app.fallthrough();

  Output out;
  app.add_flag("--json", out.json, "emit one structured record instead of plain text");
  app.add_flag("--timings", out.timings, "include elapsed_ms in structured output");

  std::string file, query_text, type_text, given_text;
  std::uint64_t seed = 0, samples = 0, fuel = 1u << 20, leaf_cap = 1u << 20;
  int world_cap = 24, atom_cap = 20;
  bool exact = false, simplify = false, report = false, tables = false;

  auto* check = app.add_subcommand("check", "type-check a deterministic term");
  check->add_option("file", file)->required();

  auto* norm = app.add_subcommand("norm", "normalize a deterministic term");
  norm->add_option("file", file)->required();
  norm->add_option("--fuel", fuel);

  auto* types = app.add_subcommand("types", "print the TYPES/REDUCTIONS sets and legality");
  types->add_option("file", file)->required();

  auto* sample = app.add_subcommand("sample", "one seeded reduction to a normal form");
  sample->add_option("file", file)->required();
  sample->add_option("--seed", seed);
  sample->add_option("--fuel", fuel);

  auto* enumerate = app.add_subcommand("enumerate", "exhaustive weighted reduction tree");
  enumerate->add_option("file", file)->required();
  enumerate->add_option("--fuel", fuel);
  enumerate->add_option("--leaf-cap", leaf_cap);

  auto* judge = app.add_subcommand("judge", "probability that a term reduces into a type");
  judge->add_option("file", file)->required();
  judge->add_option("--type", type_text)->required();
  judge->add_flag("--exact", exact);
  judge->add_option("--samples", samples);
  judge->add_option("--seed", seed);
  judge->add_option("--fuel", fuel);
  judge->add_option("--leaf-cap", leaf_cap);

  auto* mq = app.add_subcommand("mln-query", "exact query probability on a ground network");
  mq->add_option("file", file)->required();
  mq->add_option("--query", query_text)->required();
  mq->add_option("--given", given_text);
  mq->add_option("--world-cap", world_cap);

  auto* dq = app.add_subcommand("dtn-query", "query probability on a dependent type network");
  dq->add_option("file", file)->required();
  dq->add_option("--query", query_text)->required();
  dq->add_flag("--exact", exact);
  dq->add_option("--samples", samples);
  dq->add_option("--seed", seed);
  dq->add_option("--fuel", fuel);
  dq->add_option("--atom-cap", atom_cap);

  auto* m2d = app.add_subcommand("mln2dtn", "translate a Markov logic network");
  m2d->add_option("file", file)->required();
  m2d->add_flag("--simplify", simplify, "collapse the double negation for positive weights");
  m2d->add_flag("--report", report, "verify world distributions, report to stderr");

  auto* d2m = app.add_subcommand("dtn2mln", "translate a dependent type network");
  d2m->add_option("file", file)->required();
  d2m->add_flag("--report", report, "verify world distributions, report to stderr");

  auto* verify = app.add_subcommand("verify", "compare world distributions of .mln/.dtn files");
  std::string lhs_path, rhs_path;
  verify->add_option("lhs", lhs_path)->required();
  verify->add_option("rhs", rhs_path)->required();
  verify->add_flag("--tables", tables, "include both world tables in the record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*check) {
      ExprPtr e = parse_term(read_file(file));
      ExprPtr ty = infer_type(Context{}, e);
      ordered_json rec;
      rec["value"] = print(ty);
      out.emit(rec, print(ty));
    } else if (*norm) {
      ExprPtr e = parse_term(read_file(file));
      ExprPtr n = normalize(e, fuel);
      ordered_json rec;
      rec["value"] = print(n);
      out.emit(rec, print(n));
    } else if (*types) {
      ExprPtr e = parse_term(read_file(file));
      Context empty;
      TypesResult tr = types_of(empty, e);
      auto reds = reductions_of(empty, e);
      bool legal = is_legal(empty, e);
      ordered_json rec;
      rec["types"] = ordered_json::array();
      if (tr.notype) rec["types"].push_back("NOTYPE");
      for (const auto& t : tr.types) rec["types"].push_back(print(t));
      rec["reductions"] = ordered_json::array();
      for (const auto& r : reds) rec["reductions"].push_back(print(r));
      rec["legal"] = legal;
      std::string text = "TYPES:";
      if (tr.notype) text += " NOTYPE";
      for (const auto& t : tr.types) text += " " + print(t) + ";";
      text += "\nREDUCTIONS:";
      for (const auto& r : reds) text += " " + print(r) + ";";
      text += legal ? "\nlegal" : "\nillegal";
      out.emit(rec, text);
    } else if (*sample) {
      ExprPtr e = parse_term(read_file(file));
      Context empty;
      SampleResult res = sample_reduce(empty, e, seed, fuel);
      ordered_json rec;
      rec["value"] = print(res.normal_form);
      rec["log_prob"] = res.log_prob;
      rec["steps"] = res.steps;
      out.emit(rec, print(res.normal_form) + "  log_prob=" + fmt(res.log_prob));
    } else if (*enumerate) {
      ExprPtr e = parse_term(read_file(file));
      Context empty;
      ReductionTree tree = enumerate_tree(empty, e, fuel, leaf_cap);
      auto leaves = leaf_distribution(tree);
      ordered_json rec;
      rec["leaves"] = ordered_json::array();
      std::string text;
      for (const auto& [leaf, p] : leaves) {
        ordered_json l;
        l["expr"] = print(leaf);
        l["probability"] = p;
        rec["leaves"].push_back(std::move(l));
        text += fmt(p) + "  " + print(leaf) + "\n";
      }
      if (!text.empty()) text.pop_back();
      rec["tree"] = ordered_json::parse(tree_to_json(tree));
      out.emit(rec, text);
    } else if (*judge) {
      ExprPtr e = parse_term(read_file(file));
      ExprPtr ty = parse_term(type_text);
      Context empty;
      JudgeOptions opts;
      opts.mode = (samples > 0 && !exact) ? JudgeMode::Sampled : JudgeMode::Exact;
      opts.n_samples = samples;
      opts.seed = seed;
      opts.fuel = fuel;
      opts.leaf_cap = leaf_cap;
      double p = judge_prob(empty, e, ty, opts);
      ordered_json rec;
      rec["value"] = p;
      if (opts.mode == JudgeMode::Sampled) {
        rec["stderr_estimate"] = std::sqrt(std::max(0.0, p * (1 - p)) / double(samples));
        rec["n_samples"] = samples;
      }
      out.emit(rec, fmt(p));
    } else if (*mq) {
      mln::Mln m = mln::parse_mln(read_file(file));
      mln::GroundNetwork net = mln::ground(m);
      mln::QueryOptions opts;
      opts.world_cap = world_cap;
      if (!given_text.empty()) opts.evidence = mln::parse_formula(given_text);
      double p = mln::query_prob(net, mln::parse_formula(query_text), opts);
      ordered_json rec;
      rec["value"] = p;
      out.emit(rec, fmt(p));
    } else if (*dq) {
      dtn::DtnSpec spec = dtn::parse_dtn(read_file(file));
      mln::FormulaPtr q = mln::parse_formula(query_text);
      ordered_json rec;
      if (samples > 0 && !exact) {
        dtn::SampleStats stats = dtn::query_sampled(spec, q, samples, seed, fuel);
        rec["value"] = stats.estimate;
        rec["stderr_estimate"] = stats.std_error;
        rec["n_samples"] = stats.n_samples;
        rec["n_rejected"] = stats.n_rejected;
        out.emit(rec, fmt(stats.estimate) + "  stderr=" + fmt(stats.std_error) +
                          "  rejected=" + std::to_string(stats.n_rejected));
      } else {
        double p = dtn::query_exact(spec, q, dtn::WorldOptions{atom_cap});
        rec["value"] = p;
        out.emit(rec, fmt(p));
      }
    } else if (*m2d) {
      mln::Mln m = mln::parse_mln(read_file(file));
      bridge::MlnToDtnResult res = bridge::mln_to_dtn(m, simplify);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << dtn::print_dtn(res.spec);
      if (report) {
        auto rep = bridge::verify_translation(
            bridge::mln_world_table(m, world_cap),
            bridge::dtn_world_table_in_mln_order(res.spec, m, atom_cap));
        ordered_json rec;
        rec["n_worlds"] = rep.n_worlds;
        rec["max_abs_deviation"] = rep.max_abs_deviation;
        std::cerr << rec.dump() << "\n";
      }
    } else if (*d2m) {
      dtn::DtnSpec spec = dtn::parse_dtn(read_file(file));
      mln::Mln m = bridge::dtn_to_mln(spec);
      std::cout << mln::print_mln(m);
      if (report) {
        auto rep = bridge::verify_translation(
            bridge::dtn_world_table_in_mln_order(spec, m, atom_cap),
            bridge::mln_world_table(m, world_cap));
        ordered_json rec;
        rec["n_worlds"] = rep.n_worlds;
        rec["max_abs_deviation"] = rep.max_abs_deviation;
        std::cerr << rec.dump() << "\n";
      }
    } else if (*verify) {
      auto is_mln = [](const std::string& p) {
        return p.size() >= 4 && p.substr(p.size() - 4) == ".mln";
      };
      std::vector<double> lhs, rhs;
      if (is_mln(lhs_path) && is_mln(rhs_path)) {
        lhs = bridge::mln_world_table(mln::parse_mln(read_file(lhs_path)), world_cap);
        rhs = bridge::mln_world_table(mln::parse_mln(read_file(rhs_path)), world_cap);
      } else if (is_mln(lhs_path)) {
        mln::Mln m = mln::parse_mln(read_file(lhs_path));
        lhs = bridge::mln_world_table(m, world_cap);
        rhs = bridge::dtn_world_table_in_mln_order(dtn::parse_dtn(read_file(rhs_path)), m,
                                                   atom_cap);
      } else if (is_mln(rhs_path)) {
        mln::Mln m = mln::parse_mln(read_file(rhs_path));
        rhs = bridge::mln_world_table(m, world_cap);
        lhs = bridge::dtn_world_table_in_mln_order(dtn::parse_dtn(read_file(lhs_path)), m,
                                                   atom_cap);
      } else {
        lhs = dtn::world_table(dtn::parse_dtn(read_file(lhs_path)), dtn::WorldOptions{atom_cap});
        rhs = dtn::world_table(dtn::parse_dtn(read_file(rhs_path)), dtn::WorldOptions{atom_cap});
      }
      auto rep = bridge::verify_translation(lhs, rhs);
      ordered_json rec;
      rec["n_worlds"] = rep.n_worlds;
      rec["max_abs_deviation"] = rep.max_abs_deviation;
      if (tables) {
        rec["src"] = rep.src;
        rec["dst"] = rep.dst;
      }
      out.emit(rec, "worlds=" + std::to_string(rep.n_worlds) +
                        "  max_abs_deviation=" + fmt(rep.max_abs_deviation));
    }
  } catch (const std::exception& e) {
    return dispatch_exit(e);
  }
  return 0;
}

int main(int argc, char** argv) { return run(argc, argv); }
