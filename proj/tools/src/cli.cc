#include "lqgopt_cli/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lqgopt/bench.h"
#include "lqgopt/io.h"

namespace lqgopt::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  bool timing = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path Resolve(const Options& opt, const std::string& path,
                 const std::string& fallback) {
  fs::path p = path.empty() ? fs::path(fallback) : fs::path(path);
  if (p.is_relative() && !opt.out_dir.empty()) p = fs::path(opt.out_dir) / p;
  return p;
}

std::string Sig(double x, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

Plant RequirePlant(const RunConfigDocument& doc) {
  if (!doc.plant) throw UsageError("config has no plant section");
  return Plant(*doc.plant);
}

std::string TraceText(const RunTrace& trace, bool timing) {
  std::ostringstream ss;
  WriteTraceCsv(ss, trace, timing);
  return ss.str();
}

int Check(const Options& opt, const RunConfigDocument& doc, std::ostream& out) {
  if (!doc.plant) throw UsageError("config has no plant section");
  bool all = true;
  auto line = [&](bool ok, const std::string& text) {
    all = all && ok;
    if (!opt.quiet || !ok) out << (ok ? "ok    " : "FAIL  ") << text << '\n';
  };
  for (const auto& c : CheckPlant(*doc.plant)) {
    line(c.passed, c.passed || c.detail.empty() ? c.name : c.name + ": " + c.detail);
  }
  if (all && doc.controller) {
    const Plant plant(*doc.plant);
    const AdmissibilityReport r = IsAdmissible(plant, *doc.controller);
    line(r.stabilizing,
         "controller stabilizing (spectral abscissa " + Sig(r.spectral_abscissa, 6) + ")");
    line(r.minimal, "controller minimal (min singular values " +
                        Sig(r.min_sv_ctrb, 6) + ", " + Sig(r.min_sv_obsv, 6) + ")");
  }
  return all ? kExitOk : kExitFailure;
}

int Solve(const Options& opt, const RunConfigDocument& doc, std::ostream& out,
          std::ostream& err) {
  const Plant plant = RequirePlant(doc);
  Controller K0;
  if (doc.controller) {
    K0 = *doc.controller;
  } else {
    Rng rng = FamilyRng(doc.optimizer.seed, 0);
    K0 = RandomMinimalInit(plant, rng);
  }
  const RunTrace trace = RunOptimizer(plant, K0, doc.optimizer);
  WriteFile(Resolve(opt, doc.output.trace_path, "trace.csv"),
            TraceText(trace, opt.timing));
  WriteFile(Resolve(opt, doc.output.controller_path, "controller.json"),
            ControllerToJson(trace.final_controller));
  const IterationRecord& last = trace.records.back();
  if (!opt.quiet) {
    out << "termination " << ToString(trace.termination) << " after "
        << last.iter << " iterations\n"
        << "cost " << Sig(last.cost, 12) << '\n';
    if (last.gap) out << "gap " << Sig(*last.gap, 6) << '\n';
  }
  if (trace.termination == Termination::kError) {
    err << "error: " << trace.message << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int Compare(const Options& opt, const RunConfigDocument& doc, std::ostream& out) {
  std::vector<BenchmarkSystem> suite;
  std::vector<SummaryRow> skipped;
  const auto methods = DefaultMethods();
  for (const auto& entry : doc.systems) {
    std::string reason;
    if (!entry.plant) {
      reason = "no plant matrices";
    } else {
      try {
        suite.push_back({entry.name, Plant(*entry.plant), entry.provenance,
                         entry.known_cost});
        continue;
      } catch (const Error& e) {
        reason = e.what();
      }
    }
    for (const auto& m : methods) {
      SummaryRow row;
      row.system = entry.name;
      row.algorithm = m.label;
      row.error = reason;
      skipped.push_back(std::move(row));
    }
    if (!opt.quiet) out << "skipped " << entry.name << ": " << reason << '\n';
  }
  if (doc.random_family) {
    const RandomFamilySpec& f = *doc.random_family;
    for (int i = 0; i < f.count; ++i) {
      Rng rng = FamilyRng(f.seed, static_cast<std::uint64_t>(i));
      char name[32];
      std::snprintf(name, sizeof name, "random_%02d", i);
      suite.push_back({name, GenerateRandomPlant(f.plant, rng),
                       "random family seed " + std::to_string(f.seed),
                       std::nullopt});
    }
  }
  if (suite.empty() && skipped.empty()) {
    throw UsageError("config lists no systems for compare");
  }

  const ExperimentResult result = RunExperiment(suite, doc.optimizer, methods);

  for (std::size_t s = 0; s < suite.size(); ++s) {
    if (result.initial_controllers[s]) {
      WriteFile(Resolve(opt, suite[s].name + "_K0.json", ""),
                ControllerToJson(*result.initial_controllers[s]));
    }
  }
  for (const auto& run : result.runs) {
    if (!run.trace) continue;
    WriteFile(Resolve(opt, run.system + "_" + run.method + ".csv", ""),
              TraceText(*run.trace, opt.timing));
  }
  std::vector<SummaryRow> rows = result.summary;
  rows.insert(rows.end(), skipped.begin(), skipped.end());
  std::ostringstream summary;
  WriteSummaryCsv(summary, rows);
  WriteFile(Resolve(opt, doc.output.summary_path, "summary.csv"), summary.str());

  if (!opt.quiet) {
    for (const auto& m : methods) {
      std::vector<std::optional<int>> iters;
      for (const auto& row : result.summary) {
        if (row.algorithm == m.label) iters.push_back(row.iters_to_target);
      }
      out << m.label << " median iterations to gap 1e-6: "
          << MedianIterations(iters, doc.optimizer.max_iters) << " over "
          << iters.size() << " systems\n";
    }
    for (const auto& row : rows) {
      if (!row.error.empty() && row.termination != Termination::kStepUnderflow) {
        out << row.system << " " << row.algorithm << ": " << row.error << '\n';
      }
    }
  }
  return kExitOk;
}

int Oracle(const Options& opt, const RunConfigDocument& doc, std::ostream& out) {
  const Plant plant = RequirePlant(doc);
  const LqgOptimum opt_k = LqgRiccatiOptimum(plant);
  WriteFile(Resolve(opt, doc.output.controller_path, "controller.json"),
            ControllerToJson(opt_k.controller));
  out << "J* = " << Sig(opt_k.cost, 12) << '\n';
  return kExitOk;
}

int HessCheck(const Options& opt, const RunConfigDocument& doc,
              std::ostream& out) {
  const Plant plant = RequirePlant(doc);
  const SignatureReport r =
      HessianSignatureCheck(plant, doc.hessian.h_factor, doc.hessian.zero_tol);
  out << '(' << r.negative << ',' << r.zero << ',' << r.positive
      << "), N=" << r.dimension << ", n^2=" << r.orbit_dimension << '\n';
  if (!opt.quiet) {
    out << "eigenvalues";
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
      out << ' ' << Sig(r.eigenvalues(i), 6);
    }
    out << '\n';
  }
  return r.zero == r.orbit_dimension && r.negative == 0 ? kExitOk
                                                        : kExitFailure;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"LQG policy optimization over minimal controllers", "lqgopt"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Options opt;
  std::uint64_t seed = 0;
  app.add_option("--config", opt.config, "JSON run configuration")->required();
  app.add_option("--out-dir", opt.out_dir,
                 "directory for relative output paths");
  auto* seed_opt = app.add_option("--seed", seed, "overrides optimizer.seed")
                       ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", opt.quiet, "print only failures and results");
  app.add_flag("--timing", opt.timing, "fill the wall_ms column of traces");

  auto* check = app.add_subcommand("check", "validate plant and controller");
  auto* solve = app.add_subcommand("solve", "run RGD or GD on one plant");
  auto* compare =
      app.add_subcommand("compare", "GD vs RGD on a list of systems");
  auto* oracle = app.add_subcommand("oracle", "Riccati optimum J* and K*");
  auto* hess = app.add_subcommand("hess-check",
                                  "Hessian signature at the optimum");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) opt.seed = seed;

  try {
    RunConfigDocument doc;
    try {
      doc = LoadRunConfig(opt.config);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIoError) throw UsageError(e.what());
      throw;
    }
    if (opt.seed) doc.optimizer.seed = *opt.seed;
    if (check->parsed()) return Check(opt, doc, out);
    if (solve->parsed()) return Solve(opt, doc, out, err);
    if (compare->parsed()) return Compare(opt, doc, out);
    if (oracle->parsed()) return Oracle(opt, doc, out);
    if (hess->parsed()) return HessCheck(opt, doc, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::kParseError ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace lqgopt::cli
