#include "lqgopt/io.h"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lqgopt {

namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kParseError, path + ": " + what);
}

std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void RejectUnknownKeys(const json& object, const std::string& path,
                       std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) Fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : object.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) Fail(Join(path, item.key()), "unknown key");
  }
}

double ReadNumber(const json& v, const std::string& path) {
  if (!v.is_number()) Fail(path, "expected a number");
  return v.get<double>();
}

int ReadInt(const json& v, const std::string& path) {
  if (!v.is_number_integer()) Fail(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t ReadSeed(const json& v, const std::string& path) {
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    Fail(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string ReadString(const json& v, const std::string& path) {
  if (!v.is_string()) Fail(path, "expected a string");
  return v.get<std::string>();
}

Matrix ReadMatrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) Fail(path, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) {
    Fail(path + "[0]", "expected a non-empty array of numbers");
  }
  const std::size_t cols = v[0].size();
  Matrix M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_array()) Fail(row_path, "expected an array of numbers");
    if (v[i].size() != cols) {
      Fail(row_path, "has " + std::to_string(v[i].size()) + " entries, expected " +
                         std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      M(i, j) = ReadNumber(v[i][j], row_path + "[" + std::to_string(j) + "]");
    }
  }
  return M;
}

json MatrixToJson(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

const json& Require(const json& object, const std::string& key,
                    const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) Fail(Join(path, key), "missing");
  return *it;
}

PlantMatrices ReadPlant(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path, {"A", "B", "C", "W", "V", "Q", "R"});
  PlantMatrices d;
  d.A = ReadMatrix(Require(v, "A", path), Join(path, "A"));
  d.B = ReadMatrix(Require(v, "B", path), Join(path, "B"));
  d.C = ReadMatrix(Require(v, "C", path), Join(path, "C"));
  d.W = ReadMatrix(Require(v, "W", path), Join(path, "W"));
  d.V = ReadMatrix(Require(v, "V", path), Join(path, "V"));
  d.Q = ReadMatrix(Require(v, "Q", path), Join(path, "Q"));
  d.R = ReadMatrix(Require(v, "R", path), Join(path, "R"));
  return d;
}

Controller ReadController(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path, {"order", "A_K", "B_K", "C_K"});
  Controller K;
  K.A_K = ReadMatrix(Require(v, "A_K", path), Join(path, "A_K"));
  K.B_K = ReadMatrix(Require(v, "B_K", path), Join(path, "B_K"));
  K.C_K = ReadMatrix(Require(v, "C_K", path), Join(path, "C_K"));
  if (auto it = v.find("order"); it != v.end()) {
    const int q = ReadInt(*it, Join(path, "order"));
    if (q != K.A_K.rows()) Fail(Join(path, "order"), "does not match A_K");
  }
  if (K.A_K.rows() != K.A_K.cols() || K.B_K.rows() != K.A_K.rows() ||
      K.C_K.cols() != K.A_K.rows()) {
    Fail(path.empty() ? "<controller>" : path, "inconsistent block shapes");
  }
  return K;
}

OptimizerConfig ReadOptimizer(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path,
                    {"algorithm", "w1", "w2", "w3", "T", "gamma", "beta", "eps",
                     "sbar", "halt_gap", "seed", "perturb_scale",
                     "certificate_clamp"});
  OptimizerConfig c;
  for (const auto& item : v.items()) {
    const std::string& key = item.key();
    const json& x = item.value();
    const std::string p = Join(path, key);
    if (key == "algorithm") {
      try {
        c.algorithm = ParseAlgorithm(ReadString(x, p));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kParseError) throw;
        Fail(p, e.what());
      }
    } else if (key == "w1") {
      c.weights.w1 = ReadNumber(x, p);
    } else if (key == "w2") {
      c.weights.w2 = ReadNumber(x, p);
    } else if (key == "w3") {
      c.weights.w3 = ReadNumber(x, p);
    } else if (key == "T") {
      c.max_iters = ReadInt(x, p);
    } else if (key == "gamma") {
      c.armijo = ReadNumber(x, p);
    } else if (key == "beta") {
      c.backtrack = ReadNumber(x, p);
    } else if (key == "eps") {
      c.grad_tol = ReadNumber(x, p);
    } else if (key == "sbar") {
      c.initial_step = ReadNumber(x, p);
    } else if (key == "halt_gap") {
      if (x.is_null()) {
        c.halt_gap.reset();
      } else {
        c.halt_gap = ReadNumber(x, p);
      }
    } else if (key == "seed") {
      c.seed = ReadSeed(x, p);
    } else if (key == "perturb_scale") {
      c.perturb_scale = ReadNumber(x, p);
    } else if (key == "certificate_clamp") {
      if (!x.is_boolean()) Fail(p, "expected a boolean");
      c.certificate_clamp = x.get<bool>();
    }
  }
  try {
    c.Validate();
  } catch (const Error& e) {
    Fail(path, e.what());
  }
  return c;
}

OutputPaths ReadOutput(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path, {"trace_path", "summary_path", "controller_path"});
  OutputPaths out;
  if (auto it = v.find("trace_path"); it != v.end()) {
    out.trace_path = ReadString(*it, Join(path, "trace_path"));
  }
  if (auto it = v.find("summary_path"); it != v.end()) {
    out.summary_path = ReadString(*it, Join(path, "summary_path"));
  }
  if (auto it = v.find("controller_path"); it != v.end()) {
    out.controller_path = ReadString(*it, Join(path, "controller_path"));
  }
  return out;
}

SystemEntry ReadSystem(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path, {"name", "provenance", "plant", "known_cost"});
  SystemEntry s;
  s.name = ReadString(Require(v, "name", path), Join(path, "name"));
  if (auto it = v.find("provenance"); it != v.end()) {
    s.provenance = ReadString(*it, Join(path, "provenance"));
  }
  const json& plant = Require(v, "plant", path);
  if (!plant.is_null()) s.plant = ReadPlant(plant, Join(path, "plant"));
  if (auto it = v.find("known_cost"); it != v.end() && !it->is_null()) {
    s.known_cost = ReadNumber(*it, Join(path, "known_cost"));
  }
  return s;
}

RandomFamilySpec ReadRandomFamily(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path, {"n", "m", "p", "density", "count", "seed"});
  RandomFamilySpec f;
  if (auto it = v.find("n"); it != v.end()) f.plant.n = ReadInt(*it, Join(path, "n"));
  if (auto it = v.find("m"); it != v.end()) f.plant.m = ReadInt(*it, Join(path, "m"));
  if (auto it = v.find("p"); it != v.end()) f.plant.p = ReadInt(*it, Join(path, "p"));
  if (auto it = v.find("density"); it != v.end()) {
    f.plant.density = ReadNumber(*it, Join(path, "density"));
  }
  if (auto it = v.find("count"); it != v.end()) {
    f.count = ReadInt(*it, Join(path, "count"));
  }
  if (auto it = v.find("seed"); it != v.end()) f.seed = ReadSeed(*it, Join(path, "seed"));
  if (f.plant.n < 1 || f.plant.m < 1 || f.plant.p < 1) {
    Fail(path, "dimensions must be >= 1");
  }
  if (!(f.plant.density > 0.0 && f.plant.density <= 1.0)) {
    Fail(Join(path, "density"), "must lie in (0,1]");
  }
  if (f.count < 0) Fail(Join(path, "count"), "must be >= 0");
  return f;
}

HessianOptions ReadHessian(const json& v, const std::string& path) {
  RejectUnknownKeys(v, path, {"h_factor", "zero_tol"});
  HessianOptions h;
  if (auto it = v.find("h_factor"); it != v.end()) {
    h.h_factor = ReadNumber(*it, Join(path, "h_factor"));
  }
  if (auto it = v.find("zero_tol"); it != v.end()) {
    h.zero_tol = ReadNumber(*it, Join(path, "zero_tol"));
  }
  if (!(h.h_factor > 0.0)) Fail(Join(path, "h_factor"), "must be > 0");
  if (!(h.zero_tol >= 0.0)) Fail(Join(path, "zero_tol"), "must be >= 0");
  return h;
}

json Parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

RunConfigDocument ParseRunConfig(std::string_view text,
                                 const std::filesystem::path& base_dir) {
  const json root = Parse(text);
  RejectUnknownKeys(root, "",
                    {"plant", "controller", "optimizer", "output", "systems",
                     "random_family", "hessian"});
  RunConfigDocument doc;
  if (auto it = root.find("plant"); it != root.end() && !it->is_null()) {
    doc.plant = ReadPlant(*it, "plant");
  }
  if (auto it = root.find("controller"); it != root.end() && !it->is_null()) {
    doc.controller = ReadController(*it, "controller");
  }
  if (auto it = root.find("optimizer"); it != root.end()) {
    doc.optimizer = ReadOptimizer(*it, "optimizer");
  }
  if (auto it = root.find("output"); it != root.end()) {
    doc.output = ReadOutput(*it, "output");
  }
  if (auto it = root.find("systems"); it != root.end()) {
    if (!it->is_array()) Fail("systems", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& entry = (*it)[i];
      const std::string p = "systems[" + std::to_string(i) + "]";
      if (entry.is_string()) {
        std::filesystem::path file = entry.get<std::string>();
        if (file.is_relative()) file = base_dir / file;
        doc.systems.push_back(LoadSystem(file));
      } else {
        doc.systems.push_back(ReadSystem(entry, p));
      }
    }
  }
  if (auto it = root.find("random_family"); it != root.end() && !it->is_null()) {
    doc.random_family = ReadRandomFamily(*it, "random_family");
  }
  if (auto it = root.find("hessian"); it != root.end()) {
    doc.hessian = ReadHessian(*it, "hessian");
  }
  return doc;
}

RunConfigDocument LoadRunConfig(const std::filesystem::path& path) {
  return ParseRunConfig(ReadFile(path), path.parent_path());
}

SystemEntry ParseSystem(std::string_view text) {
  return ReadSystem(Parse(text), "");
}

SystemEntry LoadSystem(const std::filesystem::path& path) {
  try {
    return ParseSystem(ReadFile(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

std::string ControllerToJson(const Controller& K) {
  json j;
  j["order"] = K.order();
  j["A_K"] = MatrixToJson(K.A_K);
  j["B_K"] = MatrixToJson(K.B_K);
  j["C_K"] = MatrixToJson(K.C_K);
  return j.dump(2) + "\n";
}

Controller ParseController(std::string_view text) {
  return ReadController(Parse(text), "");
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::kIoError,
                  "cannot create " + path.parent_path().string());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string FormatDouble(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void WriteTraceCsv(std::ostream& out, const RunTrace& trace,
                   bool include_timing) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.iter << ',' << FormatDouble(r.cost) << ','
        << FormatDouble(r.grad_norm) << ',' << FormatDouble(r.step) << ',';
    if (r.gap) out << FormatDouble(*r.gap);
    out << ',';
    if (include_timing) out << FormatDouble(r.wall_ms);
    out << '\n';
  }
}

std::vector<IterationRecord> ReadTraceCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw Error(ErrorCode::kParseError, "trace: unexpected header");
  }
  std::vector<IterationRecord> records;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 6) {
      throw Error(ErrorCode::kParseError,
                  "trace line " + std::to_string(lineno) + ": expected 6 fields");
    }
    try {
      IterationRecord r;
      r.iter = std::stoi(fields[0]);
      r.cost = std::stod(fields[1]);
      r.grad_norm = std::stod(fields[2]);
      r.step = std::stod(fields[3]);
      if (!fields[4].empty()) r.gap = std::stod(fields[4]);
      if (!fields[5].empty()) r.wall_ms = std::stod(fields[5]);
      records.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kParseError,
                  "trace line " + std::to_string(lineno) + ": bad number");
    }
  }
  return records;
}

void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.system << ',' << r.algorithm << ',';
    if (r.iters_to_target) out << *r.iters_to_target;
    out << ',';
    if (r.final_gap) out << FormatDouble(*r.final_gap);
    out << ',' << FormatDouble(r.wall_ms) << '\n';
  }
}

}  // namespace lqgopt
