#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qcm/beltrami.hpp"
#include "qcm/beurling.hpp"
#include "qcm/distortion.hpp"
#include "qcm/io.hpp"
#include "qcm/selftest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Mask source shared by the pack and experiment subcommands: either a file
// (JSON, or PBM by extension) or a generated four-corner Cantor set.
struct MaskOptions {
  std::string path;
  double cantor_ratio = 0.25;
  int cantor_generations = -1;
  int level = 8;

  qcm::CompactMask resolve() const {
    if (!path.empty()) {
      const fs::path p(path);
      if (p.extension() == ".pbm") return qcm::load_mask_pbm(p);
      return qcm::load_mask_json(p);
    }
    if (cantor_generations >= 0) {
      return qcm::cantor_mask({cantor_ratio, cantor_generations}, level);
    }
    throw std::invalid_argument("no mask given: use --mask or --cantor-generations");
  }
};

void add_mask_options(CLI::App* cmd, MaskOptions& mo) {
  cmd->add_option("--mask", mo.path, "mask file (.json or .pbm)");
  cmd->add_option("--cantor-ratio", mo.cantor_ratio, "corner-set contraction ratio");
  cmd->add_option("--cantor-generations", mo.cantor_generations,
                  "corner-set generation count (enables generation)");
  cmd->add_option("--mask-level", mo.level, "dyadic level of the generated mask");
}

void print_summary(const json& j) { std::cout << j.dump() << "\n"; }

void write_failure(const std::string& what, int code) {
  json j;
  j["status"] = "error";
  j["error"] = what;
  j["exit_code"] = code;
  try {
    qcm::atomic_write("qcm_failure.json", j.dump(2) + "\n");
  } catch (...) {
    // Diagnostics are best effort; the exit code still reports the failure.
  }
}

struct ExperimentCommon {
  MaskOptions mask;
  double t = 1.0;
  double K = 1.1;
  int n = 512;
  int m = 2;
  double eps = 1e-9;
  std::string phase = "radial";
  std::uint64_t seed = 1;
  int max_terms = 200;
  double solver_tol = 1e-12;
  double norm_tol = 1e-5;
};

void add_experiment_options(CLI::App* cmd, ExperimentCommon& ec) {
  add_mask_options(cmd, ec.mask);
  cmd->add_option("--t", ec.t, "packing exponent t in (0, 2)");
  cmd->add_option("--K", ec.K, "quasiconformal distortion K >= 1");
  cmd->add_option("--n", ec.n, "grid resolution (power of two)");
  cmd->add_option("--m", ec.m, "separation exponent of the construction");
  cmd->add_option("--eps", ec.eps, "construction slack");
  cmd->add_option("--phase", ec.phase, "coefficient phase: constant, radial, random");
  cmd->add_option("--seed", ec.seed, "seed for the random phase mode");
  cmd->add_option("--max-terms", ec.max_terms, "series term cap");
  cmd->add_option("--solver-tol", ec.solver_tol, "series truncation tolerance");
  cmd->add_option("--norm-tol", ec.norm_tol, "weighted norm iteration tolerance");
}

qcm::ExperimentReport run_one(const std::string& kind, const ExperimentCommon& ec) {
  if (kind == "conformal-outside") {
    qcm::ConformalOutsideParams p;
    p.mask = ec.mask.resolve();
    p.t = ec.t;
    p.K = ec.K;
    p.n = ec.n;
    p.m = ec.m;
    p.eps = ec.eps;
    p.phase = qcm::phase_mode_from_string(ec.phase);
    p.seed = ec.seed;
    p.max_terms = ec.max_terms;
    p.solver_tol = ec.solver_tol;
    p.norm_tol = ec.norm_tol;
    return qcm::conformal_outside_experiment(p);
  }
  if (kind == "content-distortion") {
    qcm::ContentDistortionParams p;
    p.mask = ec.mask.resolve();
    p.t = ec.t;
    p.K = ec.K;
    p.n = ec.n;
    p.m = ec.m;
    p.eps = ec.eps;
    p.phase = qcm::phase_mode_from_string(ec.phase);
    p.seed = ec.seed;
    p.max_terms = ec.max_terms;
    p.solver_tol = ec.solver_tol;
    p.norm_tol = ec.norm_tol;
    return qcm::content_distortion_experiment(p);
  }
  throw std::invalid_argument("unknown experiment kind: " + kind);
}

ExperimentCommon common_from_json(const json& e) {
  ExperimentCommon ec;
  if (e.contains("mask")) ec.mask.path = e["mask"].get<std::string>();
  if (e.contains("cantor_ratio")) ec.mask.cantor_ratio = e["cantor_ratio"].get<double>();
  if (e.contains("cantor_generations"))
    ec.mask.cantor_generations = e["cantor_generations"].get<int>();
  if (e.contains("mask_level")) ec.mask.level = e["mask_level"].get<int>();
  if (e.contains("t")) ec.t = e["t"].get<double>();
  if (e.contains("K")) ec.K = e["K"].get<double>();
  if (e.contains("n")) ec.n = e["n"].get<int>();
  if (e.contains("m")) ec.m = e["m"].get<int>();
  if (e.contains("eps")) ec.eps = e["eps"].get<double>();
  if (e.contains("phase")) ec.phase = e["phase"].get<std::string>();
  if (e.contains("seed")) ec.seed = e["seed"].get<std::uint64_t>();
  if (e.contains("max_terms")) ec.max_terms = e["max_terms"].get<int>();
  if (e.contains("solver_tol")) ec.solver_tol = e["solver_tol"].get<double>();
  if (e.contains("norm_tol")) ec.norm_tol = e["norm_tol"].get<double>();
  if (e.contains("premap") && !e["premap"].get<bool>())
    throw std::invalid_argument("premap=false is a flag of the content experiment command line");
  return ec;
}

struct BatchEntry {
  std::string kind;
  ExperimentCommon common;
  bool premap = true;
};

// Runs entries on a small thread pool; report order follows input order, so
// the merged output is independent of scheduling.
std::vector<qcm::ExperimentReport> run_batch(const std::vector<BatchEntry>& entries,
                                             unsigned jobs) {
  std::vector<qcm::ExperimentReport> out(entries.size());
  std::vector<std::exception_ptr> errs(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      try {
        if (entries[i].kind == "content-distortion") {
          qcm::ContentDistortionParams p;
          const ExperimentCommon& ec = entries[i].common;
          p.mask = ec.mask.resolve();
          p.t = ec.t;
          p.K = ec.K;
          p.n = ec.n;
          p.m = ec.m;
          p.eps = ec.eps;
          p.phase = qcm::phase_mode_from_string(ec.phase);
          p.seed = ec.seed;
          p.max_terms = ec.max_terms;
          p.solver_tol = ec.solver_tol;
          p.norm_tol = ec.norm_tol;
          p.premap = entries[i].premap;
          out[i] = qcm::content_distortion_experiment(p);
        } else {
          out[i] = run_one(entries[i].kind, entries[i].common);
        }
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  const unsigned nw = std::max(1u, std::min<unsigned>(jobs, entries.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w + 1 < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

int cmd_experiment(const std::string& kind, const ExperimentCommon& ec, bool premap,
                   const std::string& report_path, const std::string& csv_path,
                   const std::string& out_dir, const std::string& batch_path,
                   unsigned jobs) {
  std::vector<BatchEntry> entries;
  if (!batch_path.empty()) {
    std::ifstream bin(batch_path);
    if (!bin) throw std::invalid_argument("cannot open batch file: " + batch_path);
    const json b = json::parse(bin);
    if (!b.is_array()) throw std::invalid_argument("batch file must be a JSON array");
    for (const auto& e : b) {
      BatchEntry be;
      be.kind = e.contains("kind") ? e["kind"].get<std::string>() : kind;
      json cleaned = e;
      bool pm = premap;
      if (cleaned.contains("premap")) {
        pm = cleaned["premap"].get<bool>();
        cleaned.erase("premap");
      }
      be.common = common_from_json(cleaned);
      be.premap = pm;
      entries.push_back(std::move(be));
    }
  } else {
    entries.push_back({kind, ec, premap});
  }

  const std::vector<qcm::ExperimentReport> reps = run_batch(entries, jobs);

  json manifest;
  manifest["count"] = reps.size();
  json files = json::array();

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const fs::path p = fs::path(out_dir) / ("report_" + std::to_string(i) + ".json");
      qcm::save_report_json(reps[i], p);
      files.push_back(p.filename().string());
    }
    const fs::path csvp = fs::path(out_dir) / "reports.csv";
    qcm::atomic_write(csvp, qcm::reports_to_csv(reps));
    manifest["csv"] = csvp.filename().string();
    manifest["reports"] = files;
    qcm::atomic_write(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  }
  if (!report_path.empty()) {
    if (reps.size() == 1) {
      qcm::save_report_json(reps[0], report_path);
    } else {
      json arr = json::array();
      for (const auto& r : reps) arr.push_back(json::parse(qcm::report_to_json(r)));
      qcm::atomic_write(report_path, arr.dump(2) + "\n");
    }
  }
  if (!csv_path.empty()) qcm::atomic_write(csv_path, qcm::reports_to_csv(reps));

  bool all_ok = true;
  for (const auto& r : reps) all_ok = all_ok && r.all_verdicts_pass();
  json summary;
  summary["status"] = "ok";
  summary["command"] = "experiment";
  summary["reports"] = reps.size();
  summary["all_verdicts"] = all_ok;
  if (reps.size() == 1) {
    summary["kind"] = reps[0].kind;
    summary["measured"] = reps[0].measured;
    summary["verdicts"] = reps[0].verdicts;
  }
  print_summary(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"packing families, singular transforms, and distortion experiments"};
  app.set_config("--config", "", "read options from an INI file (key=value)");
  app.require_subcommand(1);

  // pack
  auto* pack = app.add_subcommand("pack", "build a packing family for a mask");
  MaskOptions pack_mask;
  double pack_t = 1.0, pack_eps = 1e-9;
  int pack_m = 0;
  std::string pack_out;
  add_mask_options(pack, pack_mask);
  pack->add_option("--t", pack_t, "packing exponent t in (0, 2)");
  pack->add_option("--m", pack_m, "separation exponent");
  pack->add_option("--eps", pack_eps, "construction slack");
  pack->add_option("--out", pack_out, "output family JSON")->required();

  // transform
  auto* tr = app.add_subcommand("transform", "apply a singular transform to a field");
  std::string tr_in, tr_op = "beurling", tr_out;
  tr->add_option("--field", tr_in, "input field JSON")->required();
  tr->add_option("--op", tr_op, "beurling, adjoint, cauchy, d, dbar");
  tr->add_option("--out", tr_out, "output field JSON")->required();

  // solve
  auto* sv = app.add_subcommand("solve", "principal map for a Beltrami coefficient");
  std::string sv_mu, sv_out;
  int sv_max_terms = 200;
  double sv_tol = 1e-12;
  sv->add_option("--mu", sv_mu, "coefficient field JSON")->required();
  sv->add_option("--max-terms", sv_max_terms, "series term cap");
  sv->add_option("--tol", sv_tol, "series truncation tolerance");
  sv->add_option("--out", sv_out, "output prefix")->required();

  // experiment
  auto* ex = app.add_subcommand("experiment", "distortion experiments");
  ex->require_subcommand(1);
  auto* exc = ex->add_subcommand("conformal-outside", "diameter sums under a map conformal off the family");
  auto* exd = ex->add_subcommand("content-distortion", "content comparison in invariant form");
  ExperimentCommon ec_conf, ec_cont;
  add_experiment_options(exc, ec_conf);
  add_experiment_options(exd, ec_cont);
  bool cont_no_premap = false;
  exd->add_flag("--no-premap", cont_no_premap, "skip the corner premap");
  std::string ex_report, ex_csv, ex_outdir, ex_batch;
  unsigned ex_jobs = std::max(1u, std::thread::hardware_concurrency());
  for (CLI::App* e : {exc, exd}) {
    e->add_option("--report", ex_report, "write the report JSON here");
    e->add_option("--csv", ex_csv, "write a CSV table here");
    e->add_option("--out-dir", ex_outdir, "write reports, CSV, and a manifest here");
    e->add_option("--batch", ex_batch, "JSON array of runs (overrides single-run options)");
    e->add_option("--jobs", ex_jobs, "worker threads for batch runs");
  }

  // selftest
  auto* st = app.add_subcommand("selftest", "fast invariant sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (pack->parsed()) {
      const qcm::CompactMask mask = pack_mask.resolve();
      const qcm::PackingFamily fam = qcm::packing_construct(mask, pack_t, pack_eps, pack_m);
      qcm::save_family_json(fam, pack_out);
      json s;
      s["status"] = "ok";
      s["command"] = "pack";
      s["cubes"] = fam.cubes.size();
      s["norm"] = fam.norm;
      s["out"] = pack_out;
      print_summary(s);
      return 0;
    }

    if (tr->parsed()) {
      const qcm::GridField f = qcm::load_field(tr_in);
      qcm::GridField g;
      if (tr_op == "beurling") g = qcm::beurling_apply(f);
      else if (tr_op == "adjoint") g = qcm::beurling_adjoint_apply(f);
      else if (tr_op == "cauchy") g = qcm::cauchy_apply(f);
      else if (tr_op == "d") g = qcm::d_apply(f);
      else if (tr_op == "dbar") g = qcm::dbar_apply(f);
      else throw std::invalid_argument("unknown transform op: " + tr_op);
      qcm::save_field(g, tr_out);
      json s;
      s["status"] = "ok";
      s["command"] = "transform";
      s["op"] = tr_op;
      s["l2"] = qcm::l2_norm(g);
      s["out"] = tr_out;
      print_summary(s);
      return 0;
    }

    if (sv->parsed()) {
      qcm::BeltramiCoefficient bc(qcm::load_field(sv_mu));
      const qcm::PrincipalMapSolution sol = qcm::solve_principal(bc, sv_max_terms, sv_tol);
      const fs::path prefix(sv_out);
      auto with_suffix = [&](const char* sfx) {
        fs::path p = prefix;
        p += sfx;
        return p;
      };
      qcm::save_field(sol.fzbar, with_suffix("_fzbar.json"));
      qcm::save_field(sol.fz, with_suffix("_fz.json"));
      qcm::save_field(sol.f, with_suffix("_f.json"));
      json s;
      s["status"] = sol.converged ? "ok" : "nonconverged";
      s["command"] = "solve";
      s["kappa"] = bc.kappa;
      s["terms"] = sol.terms_used;
      s["tail_bound"] = sol.tail_bound;
      s["converged"] = sol.converged;
      qcm::atomic_write(with_suffix("_summary.json"), s.dump(2) + "\n");
      print_summary(s);
      if (!sol.converged) {
        write_failure("series did not converge within the term cap", 2);
        return 2;
      }
      return 0;
    }

    if (exc->parsed())
      return cmd_experiment("conformal-outside", ec_conf, true, ex_report, ex_csv,
                            ex_outdir, ex_batch, ex_jobs);
    if (exd->parsed())
      return cmd_experiment("content-distortion", ec_cont, !cont_no_premap, ex_report,
                            ex_csv, ex_outdir, ex_batch, ex_jobs);

    if (st->parsed()) {
      const bool ok = qcm::selftest_run(std::cout);
      json s;
      s["status"] = ok ? "ok" : "failed";
      s["command"] = "selftest";
      print_summary(s);
      return ok ? 0 : 2;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_failure(e.what(), 2);
    return 2;
  }
  return 0;
}
