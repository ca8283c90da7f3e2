#pragma once

// Experiment orchestration: sweeps over (V, N), result records and their
// CSV/JSON persistence, flat key=value configuration files.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "boltzgap/collision_matrix.hpp"
#include "boltzgap/error.hpp"
#include "boltzgap/grad.hpp"
#include "boltzgap/mesh.hpp"
#include "boltzgap/spectra.hpp"

namespace boltzgap {

enum class BackendChoice : int { grad = 0, direct = 1, both = 2 };
enum class MethodChoice : int { nullspace = 0, corrected = 1, both = 2 };
enum class OutputFormat : int { csv = 0, json = 1 };

struct RunConfig {
  OperatorParams params = make_params(2, 0.0, -1.0);
  std::optional<bool> normalize_b;  // unset: normalized exactly when alpha < 0
  std::vector<double> V;
  std::vector<int> N;
  std::optional<double> fixed_dv;  // N = 2V/dv for every V; overrides the N list
  int p = 0;
  BackendChoice backend = BackendChoice::grad;
  MethodChoice method = MethodChoice::nullspace;

  int tri_order = 3;
  int plane_order = 32;
  double ang_tol = 1e-7;
  int kernel_order = 3;
  int near_order = 4;
  int nu_order = 4;
  NearRule near_rule = NearRule::exact;
  Representation grad_representation = Representation::F;
  bool symmetry = true;

  int threads = 0;  // 0: BOLTZGAP_THREADS, else 1
  bool parallel_points = false;
  std::string out;  // empty: records are only returned
  OutputFormat format = OutputFormat::csv;
  std::string dump_matrix;  // path stem for binary matrix dumps
  bool resume = true;
  std::string tier;  // informational tag of presets ("ci", "slow")

  /// params with the cross-section normalization resolved.
  OperatorParams physics() const;
  /// Throws invalid_argument for inconsistent settings.
  void validate() const;
};

/// Sets one option by its flag name without dashes, e.g. ("gamma", "0.5"),
/// ("V", "4,5,6"), ("basis", "p1"). Throws invalid_argument for unknown keys.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

/// Current value of an option in the syntax accepted by set_option.
std::string get_option(const RunConfig& cfg, const std::string& key);

/// Reads '#'-commented key=value lines. Later keys override earlier ones.
void load_config(RunConfig& cfg, const std::string& path);
RunConfig parse_config(const std::string& text);

inline constexpr int record_eigenvalues = 9;

struct ResultRecord {
  int d = 2;
  double gamma = 0.0;
  double alpha = 0.0;
  double V = 0.0;
  int N = 0;
  int p = 0;
  std::string backend;
  std::string method;
  int M = 0;
  double gap = 0.0;
  std::array<double, record_eigenvalues> eig{};  // first d+6 eigenvalues, NaN past that
  int zeros = 0;
  double t_asm = 0.0;
  double t_eig = 0.0;
  AssemblyDiagnostics diagnostics;
  bool gap_exists = true;
  std::string diagnostic;
};

/// Points that failed: key description and error text.
struct PointFailure {
  double V = 0.0;
  int N = 0;
  std::string backend;
  ErrorCode code = ErrorCode::internal;
  std::string message;
};

struct RunReport {
  std::vector<ResultRecord> records;  // in sweep order
  std::vector<PointFailure> failures;
  int skipped = 0;                    // resumed points found in the output
};

using ProgressFn = std::function<void(const ResultRecord*, const PointFailure*)>;

/// Runs every (V, N) point and backend. When cfg.out is set, records are
/// written as they complete and points already present there are skipped.
RunReport run(const RunConfig& cfg, const ProgressFn& progress = {});

/// True when both records describe the same experiment point.
bool same_point(const ResultRecord& a, const ResultRecord& b);

std::string csv_header();
void emit(const std::vector<ResultRecord>& records, OutputFormat format, const std::string& path);
std::vector<ResultRecord> read_records(const std::string& path, OutputFormat format);

std::string to_csv(const std::vector<ResultRecord>& records);
std::string to_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> from_csv(const std::string& text);
std::vector<ResultRecord> from_json(const std::string& text);

}  // namespace boltzgap
