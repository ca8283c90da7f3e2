#include "boltzgap/boltzgap.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "boltzgap/driver.hpp"
#include "boltzgap/error.hpp"

struct bg_config {
  boltzgap::RunConfig cfg;
};

struct bg_results {
  boltzgap::RunReport report;
  std::vector<std::string> failure_text;
};

namespace {

thread_local std::string last_error;

bg_status status_of(boltzgap::ErrorCode c) { return static_cast<bg_status>(static_cast<int>(c)); }

template <class Fn>
bg_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const boltzgap::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return BG_MEMORY_BUDGET;
  } catch (const std::exception& e) {
    last_error = e.what();
    return BG_INTERNAL;
  } catch (...) {
    last_error = "unknown exception";
    return BG_INTERNAL;
  }
}

bg_status null_arg(const char* what) {
  last_error = std::string("null argument: ") + what;
  return BG_INVALID_ARGUMENT;
}

void copy_name(char* dst, std::size_t n, const std::string& src) {
  std::strncpy(dst, src.c_str(), n - 1);
  dst[n - 1] = '\0';
}

bg_record to_c(const boltzgap::ResultRecord& r) {
  bg_record c{};
  c.d = r.d;
  c.gamma = r.gamma;
  c.alpha = r.alpha;
  c.V = r.V;
  c.N = r.N;
  c.p = r.p;
  copy_name(c.backend, sizeof c.backend, r.backend);
  copy_name(c.method, sizeof c.method, r.method);
  c.M = r.M;
  c.gap = r.gap;
  c.gap_exists = r.gap_exists ? 1 : 0;
  for (int i = 0; i < BG_RECORD_EIGENVALUES; ++i) c.eig[i] = r.eig[i];
  c.zeros = r.zeros;
  c.t_asm = r.t_asm;
  c.t_eig = r.t_eig;
  c.kernel_evaluations = r.diagnostics.kernel_evaluations;
  c.angular_integrals = r.diagnostics.angular_integrals;
  c.angular_failures = r.diagnostics.angular_failures;
  c.max_angular_error = r.diagnostics.max_angular_error;
  c.max_asymmetry = r.diagnostics.max_asymmetry;
  return c;
}

std::string describe(const boltzgap::PointFailure& f) {
  return "V=" + std::to_string(f.V) + " N=" + std::to_string(f.N) + (f.backend.empty() ? "" : " " + f.backend) +
         ": " + f.message;
}

}  // namespace

extern "C" {

const char* bg_version(void) { return "1.0.0"; }

const char* bg_last_error(void) { return last_error.c_str(); }

const char* bg_status_name(bg_status s) {
  switch (s) {
    case BG_OK: return "ok";
    case BG_INVALID_ARGUMENT: return "invalid_argument";
    case BG_SINGULAR_EVALUATION: return "singular_evaluation";
    case BG_NOT_APPLICABLE: return "not_applicable";
    case BG_MEMORY_BUDGET: return "memory_budget";
    case BG_TOLERANCE_NOT_MET: return "tolerance_not_met";
    case BG_RANK_DEFICIENT: return "rank_deficient";
    case BG_ILL_CONDITIONED: return "ill_conditioned";
    case BG_NOT_POSITIVE_DEFINITE: return "not_positive_definite";
    case BG_REPRESENTATION_MISMATCH: return "representation_mismatch";
    case BG_IO: return "io";
    case BG_DIAGNOSTIC: return "diagnostic";
    case BG_POINT_FAILED: return "point_failed";
    case BG_INTERNAL: return "internal";
  }
  return "unknown";
}

bg_status bg_config_create(bg_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new bg_config{};
    return BG_OK;
  });
}

void bg_config_destroy(bg_config* cfg) { delete cfg; }

bg_status bg_config_set(bg_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key || !value) return null_arg("key/value");
  return guarded([&] {
    boltzgap::set_option(cfg->cfg, key, value);
    return BG_OK;
  });
}

bg_status bg_config_get(const bg_config* cfg, const char* key, char* buf, size_t len) {
  if (!cfg) return null_arg("cfg");
  if (!key || !buf || len == 0) return null_arg("key/buf");
  return guarded([&] {
    copy_name(buf, len, boltzgap::get_option(cfg->cfg, key));
    return BG_OK;
  });
}

bg_status bg_config_load(bg_config* cfg, const char* path) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return guarded([&] {
    boltzgap::load_config(cfg->cfg, path);
    return BG_OK;
  });
}

bg_status bg_config_validate(const bg_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    cfg->cfg.validate();
    return BG_OK;
  });
}

bg_status bg_run(const bg_config* cfg, bg_progress_fn progress, void* user, bg_results** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    boltzgap::ProgressFn fn;
    if (progress)
      fn = [&](const boltzgap::ResultRecord* r, const boltzgap::PointFailure* f) {
        if (r) {
          const bg_record c = to_c(*r);
          progress(&c, nullptr, user);
        } else {
          const std::string text = describe(*f);
          progress(nullptr, text.c_str(), user);
        }
      };
    auto res = std::make_unique<bg_results>();
    res->report = boltzgap::run(cfg->cfg, fn);
    for (const auto& f : res->report.failures) res->failure_text.push_back(describe(f));
    const bool failed = !res->report.failures.empty();
    if (failed) last_error = res->failure_text.front();
    *out = res.release();
    return failed ? BG_POINT_FAILED : BG_OK;
  });
}

void bg_results_destroy(bg_results* res) { delete res; }

size_t bg_results_count(const bg_results* res) { return res ? res->report.records.size() : 0; }
size_t bg_results_failures(const bg_results* res) { return res ? res->report.failures.size() : 0; }
size_t bg_results_skipped(const bg_results* res) { return res ? static_cast<size_t>(res->report.skipped) : 0; }

bg_status bg_results_get(const bg_results* res, size_t i, bg_record* out) {
  if (!res) return null_arg("res");
  if (!out) return null_arg("out");
  if (i >= res->report.records.size()) {
    last_error = "record index out of range";
    return BG_INVALID_ARGUMENT;
  }
  *out = to_c(res->report.records[i]);
  return BG_OK;
}

const char* bg_results_failure(const bg_results* res, size_t i) {
  if (!res || i >= res->failure_text.size()) return nullptr;
  return res->failure_text[i].c_str();
}

bg_status bg_results_write(const bg_results* res, const char* format, const char* path) {
  if (!res) return null_arg("res");
  if (!format || !path) return null_arg("format/path");
  return guarded([&] {
    const std::string f = format;
    boltzgap::require(f == "csv" || f == "json", boltzgap::ErrorCode::invalid_argument, "format must be csv or json");
    boltzgap::emit(res->report.records, f == "csv" ? boltzgap::OutputFormat::csv : boltzgap::OutputFormat::json, path);
    return BG_OK;
  });
}

bg_status bg_gap(const bg_config* cfg, double V, int N, double* gap) {
  if (!cfg) return null_arg("cfg");
  if (!gap) return null_arg("gap");
  return guarded([&] {
    boltzgap::RunConfig one = cfg->cfg;
    one.V = {V};
    one.N = {N};
    one.fixed_dv.reset();
    one.out.clear();
    one.dump_matrix.clear();
    one.parallel_points = false;
    const boltzgap::RunReport rep = boltzgap::run(one);
    if (!rep.failures.empty()) {
      last_error = describe(rep.failures.front());
      return status_of(rep.failures.front().code);
    }
    boltzgap::require(!rep.records.empty(), boltzgap::ErrorCode::internal, "no record produced");
    *gap = rep.records.front().gap;
    return BG_OK;
  });
}

}  // extern "C"
