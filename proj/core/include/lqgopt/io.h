#pragma once

// JSON run configuration, controller and system files; trace and summary
// CSV writers. All parse failures throw Error with kParseError and a message
// naming the offending key path.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lqgopt/bench.h"

namespace lqgopt {

inline constexpr std::string_view kTraceHeader =
    "iter,cost,grad_norm,step,gap,wall_ms";
inline constexpr std::string_view kSummaryHeader =
    "system,algorithm,iters_to_1e-6,final_gap,wall_ms";

struct OutputPaths {
  std::string trace_path;
  std::string summary_path;
  std::string controller_path;
};

struct RandomFamilySpec {
  RandomPlantSpec plant;
  int count = 20;
  std::uint64_t seed = 1;
};

/// A named benchmark entry. `plant` is empty for systems whose matrices are
/// not available; those are reported as failed rows rather than rejected.
struct SystemEntry {
  std::string name;
  std::string provenance;
  std::optional<PlantMatrices> plant;
  std::optional<double> known_cost;
};

struct HessianOptions {
  double h_factor = 1e-4;
  double zero_tol = 1e-6;
};

struct RunConfigDocument {
  std::optional<PlantMatrices> plant;
  std::optional<Controller> controller;  // starting point; random if absent
  OptimizerConfig optimizer;
  OutputPaths output;
  std::vector<SystemEntry> systems;
  std::optional<RandomFamilySpec> random_family;
  HessianOptions hessian;
};

/// Relative system file paths are resolved against `base_dir`.
RunConfigDocument ParseRunConfig(std::string_view text,
                                 const std::filesystem::path& base_dir = {});
RunConfigDocument LoadRunConfig(const std::filesystem::path& path);

SystemEntry ParseSystem(std::string_view text);
SystemEntry LoadSystem(const std::filesystem::path& path);

std::string ControllerToJson(const Controller& K);
Controller ParseController(std::string_view text);

std::string ReadFile(const std::filesystem::path& path);
/// Creates parent directories as needed. Throws kIoError.
void WriteFile(const std::filesystem::path& path, std::string_view content);

/// Round-trip representation (17 significant digits).
std::string FormatDouble(double value);

/// wall_ms is left empty unless `include_timing`, so traces of identical runs
/// compare byte-for-byte.
void WriteTraceCsv(std::ostream& out, const RunTrace& trace,
                   bool include_timing);
std::vector<IterationRecord> ReadTraceCsv(std::istream& in);

void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace lqgopt
