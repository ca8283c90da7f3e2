#include "boltzgap/driver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <new>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "boltzgap/constraints.hpp"
#include "boltzgap/direct.hpp"
#include "boltzgap/error.hpp"
#include "boltzgap/parallel.hpp"
#include "boltzgap/symmetry.hpp"

namespace boltzgap {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "nan") return nan_value;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  require(ec == std::errc() && ptr == t.data() + t.size() && !t.empty(), ErrorCode::invalid_argument,
          key + ": not a number: '" + text + "'");
  return x;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  require(ec == std::errc() && ptr == t.data() + t.size() && !t.empty(), ErrorCode::invalid_argument,
          key + ": not an integer: '" + text + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "on" || t == "true" || t == "1" || t == "yes") return true;
  if (t == "off" || t == "false" || t == "0" || t == "no") return false;
  fail(ErrorCode::invalid_argument, key + ": expected on|off, got '" + text + "'");
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse) {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ',')) out.push_back(parse(key, item));
  return out;
}

const char* backend_name(Backend b) { return to_string(b); }

}  // namespace

OperatorParams RunConfig::physics() const {
  OperatorParams prm = params;
  prm.b_normalized = normalize_b.value_or(prm.alpha < 0.0);
  return prm;
}

void RunConfig::validate() const {
  physics().validate();
  require(p == 0 || p == 1, ErrorCode::invalid_argument, "basis must be p0 or p1");
  require(!(backend == BackendChoice::grad && !params.integrable()), ErrorCode::invalid_argument,
          "backend grad requires alpha < 0");
  for (double v : V) require(v > 0.0 && std::isfinite(v), ErrorCode::invalid_argument, "V must be positive");
  if (!fixed_dv)
    for (int n : N) require(n > 0, ErrorCode::invalid_argument, "N must be positive");
  require(!fixed_dv || *fixed_dv > 0.0, ErrorCode::invalid_argument, "fixed-dv must be positive");
  require(tri_order == 1 || tri_order == 3 || tri_order == 6 || tri_order == 7, ErrorCode::invalid_argument,
          "tri-order must be 1, 3, 6 or 7");
  require(plane_order >= 2 && kernel_order >= 1 && near_order >= 1 && nu_order >= 1, ErrorCode::invalid_argument,
          "quadrature orders must be positive");
  require(ang_tol > 0.0 && ang_tol < 1.0, ErrorCode::invalid_argument, "ang-tol must lie in (0, 1)");
  require(threads >= 0, ErrorCode::invalid_argument, "threads must be nonnegative");
}

void set_option(RunConfig& cfg, const std::string& key_in, const std::string& value) {
  const std::string key = trim(key_in);
  const std::string v = trim(value);
  if (key == "dim") {
    cfg.params.d = parse_int(key, v);
  } else if (key == "gamma") {
    cfg.params.gamma = parse_double(key, v);
  } else if (key == "alpha") {
    cfg.params.alpha = parse_double(key, v);
  } else if (key == "normalize-b") {
    if (v == "default")
      cfg.normalize_b.reset();
    else
      cfg.normalize_b = parse_bool(key, v);
  } else if (key == "V") {
    cfg.V = parse_list<double>(key, v, parse_double);
  } else if (key == "N") {
    cfg.N = parse_list<int>(key, v, parse_int);
  } else if (key == "fixed-dv") {
    if (v.empty() || v == "none")
      cfg.fixed_dv.reset();
    else
      cfg.fixed_dv = parse_double(key, v);
  } else if (key == "basis") {
    require(v == "p0" || v == "p1" || v == "0" || v == "1", ErrorCode::invalid_argument, "basis must be p0 or p1");
    cfg.p = v.back() - '0';
  } else if (key == "backend") {
    if (v == "grad")
      cfg.backend = BackendChoice::grad;
    else if (v == "direct")
      cfg.backend = BackendChoice::direct;
    else if (v == "both")
      cfg.backend = BackendChoice::both;
    else
      fail(ErrorCode::invalid_argument, "backend must be grad, direct or both");
  } else if (key == "method") {
    if (v == "nullspace")
      cfg.method = MethodChoice::nullspace;
    else if (v == "corrected")
      cfg.method = MethodChoice::corrected;
    else if (v == "both")
      cfg.method = MethodChoice::both;
    else
      fail(ErrorCode::invalid_argument, "method must be nullspace, corrected or both");
  } else if (key == "tri-order") {
    cfg.tri_order = parse_int(key, v);
  } else if (key == "plane-order") {
    cfg.plane_order = parse_int(key, v);
  } else if (key == "ang-tol") {
    cfg.ang_tol = parse_double(key, v);
  } else if (key == "kernel-order") {
    cfg.kernel_order = parse_int(key, v);
  } else if (key == "near-order") {
    cfg.near_order = parse_int(key, v);
  } else if (key == "nu-order") {
    cfg.nu_order = parse_int(key, v);
  } else if (key == "near-rule") {
    if (v == "exact")
      cfg.near_rule = NearRule::exact;
    else if (v == "offset")
      cfg.near_rule = NearRule::offset;
    else
      fail(ErrorCode::invalid_argument, "near-rule must be exact or offset");
  } else if (key == "grad-rep") {
    if (v == "F")
      cfg.grad_representation = Representation::F;
    else if (v == "g")
      cfg.grad_representation = Representation::g;
    else
      fail(ErrorCode::invalid_argument, "grad-rep must be F or g");
  } else if (key == "symmetry") {
    cfg.symmetry = parse_bool(key, v);
  } else if (key == "threads") {
    cfg.threads = parse_int(key, v);
  } else if (key == "parallel-points") {
    cfg.parallel_points = parse_bool(key, v);
  } else if (key == "out") {
    cfg.out = v;
  } else if (key == "format") {
    if (v == "csv")
      cfg.format = OutputFormat::csv;
    else if (v == "json")
      cfg.format = OutputFormat::json;
    else
      fail(ErrorCode::invalid_argument, "format must be csv or json");
  } else if (key == "dump-matrix") {
    cfg.dump_matrix = v;
  } else if (key == "resume") {
    cfg.resume = parse_bool(key, v);
  } else if (key == "tier") {
    cfg.tier = v;
  } else {
    fail(ErrorCode::invalid_argument, "unknown option '" + key + "'");
  }
}

namespace {

std::string real_text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_same_v<T, double>)
      s += real_text(xs[i]);
    else
      s += std::to_string(xs[i]);
  }
  return s;
}

const char* on_off(bool b) { return b ? "on" : "off"; }

}  // namespace

std::string get_option(const RunConfig& cfg, const std::string& key) {
  static const char* backends[] = {"grad", "direct", "both"};
  static const char* methods[] = {"nullspace", "corrected", "both"};
  if (key == "dim") return std::to_string(cfg.params.d);
  if (key == "gamma") return real_text(cfg.params.gamma);
  if (key == "alpha") return real_text(cfg.params.alpha);
  if (key == "normalize-b") return cfg.normalize_b ? on_off(*cfg.normalize_b) : "default";
  if (key == "V") return join(cfg.V);
  if (key == "N") return join(cfg.N);
  if (key == "fixed-dv") return cfg.fixed_dv ? real_text(*cfg.fixed_dv) : "none";
  if (key == "basis") return cfg.p == 0 ? "p0" : "p1";
  if (key == "backend") return backends[static_cast<int>(cfg.backend)];
  if (key == "method") return methods[static_cast<int>(cfg.method)];
  if (key == "tri-order") return std::to_string(cfg.tri_order);
  if (key == "plane-order") return std::to_string(cfg.plane_order);
  if (key == "ang-tol") return real_text(cfg.ang_tol);
  if (key == "kernel-order") return std::to_string(cfg.kernel_order);
  if (key == "near-order") return std::to_string(cfg.near_order);
  if (key == "nu-order") return std::to_string(cfg.nu_order);
  if (key == "near-rule") return cfg.near_rule == NearRule::exact ? "exact" : "offset";
  if (key == "grad-rep") return to_string(cfg.grad_representation);
  if (key == "symmetry") return on_off(cfg.symmetry);
  if (key == "threads") return std::to_string(cfg.threads);
  if (key == "parallel-points") return on_off(cfg.parallel_points);
  if (key == "out") return cfg.out;
  if (key == "format") return cfg.format == OutputFormat::csv ? "csv" : "json";
  if (key == "dump-matrix") return cfg.dump_matrix;
  if (key == "resume") return on_off(cfg.resume);
  if (key == "tier") return cfg.tier;
  fail(ErrorCode::invalid_argument, "unknown option '" + key + "'");
}

namespace {

void apply_lines(RunConfig& cfg, const std::string& text, const std::string& where) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::invalid_argument,
            where + ":" + std::to_string(lineno) + ": expected key=value");
    set_option(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  apply_lines(cfg, text, "config");
  return cfg;
}

void load_config(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_lines(cfg, ss.str(), path);
}

// ---------------------------------------------------------------------------
// records

std::string csv_header() {
  std::string h = "d,gamma,alpha,V,N,p,backend,method,M,gap";
  for (int i = 1; i <= record_eigenvalues; ++i) h += ",eig" + std::to_string(i);
  return h + ",zeros,t_asm,t_eig";
}

namespace {

std::string fmt_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_row(const ResultRecord& r) {
  std::string s = std::to_string(r.d) + "," + fmt_real(r.gamma) + "," + fmt_real(r.alpha) + "," + fmt_real(r.V) +
                  "," + std::to_string(r.N) + "," + std::to_string(r.p) + "," + r.backend + "," + r.method + "," +
                  std::to_string(r.M) + "," + fmt_real(r.gap);
  for (double e : r.eig) s += "," + fmt_real(e);
  s += "," + std::to_string(r.zeros) + "," + fmt_real(r.t_asm) + "," + fmt_real(r.t_eig);
  return s;
}

nlohmann::json real_json(double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); }
double json_real(const nlohmann::json& j) { return j.is_null() ? nan_value : j.get<double>(); }

}  // namespace

std::string to_csv(const std::vector<ResultRecord>& records) {
  std::string s = csv_header() + "\n";
  for (const auto& r : records) s += csv_row(r) + "\n";
  return s;
}

std::vector<ResultRecord> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ResultRecord> out;
  if (!std::getline(in, line)) return out;
  require(trim(line) == csv_header(), ErrorCode::io, "unexpected CSV header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    require(f.size() == 13 + record_eigenvalues, ErrorCode::io, "malformed CSV row: " + line);
    ResultRecord r;
    std::size_t i = 0;
    r.d = parse_int("d", f[i++]);
    r.gamma = parse_double("gamma", f[i++]);
    r.alpha = parse_double("alpha", f[i++]);
    r.V = parse_double("V", f[i++]);
    r.N = parse_int("N", f[i++]);
    r.p = parse_int("p", f[i++]);
    r.backend = f[i++];
    r.method = f[i++];
    r.M = parse_int("M", f[i++]);
    r.gap = parse_double("gap", f[i++]);
    for (double& e : r.eig) e = parse_double("eig", f[i++]);
    r.zeros = parse_int("zeros", f[i++]);
    r.t_asm = parse_double("t_asm", f[i++]);
    r.t_eig = parse_double("t_eig", f[i++]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_json(const std::vector<ResultRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["d"] = r.d;
    j["gamma"] = real_json(r.gamma);
    j["alpha"] = real_json(r.alpha);
    j["V"] = real_json(r.V);
    j["N"] = r.N;
    j["p"] = r.p;
    j["backend"] = r.backend;
    j["method"] = r.method;
    j["M"] = r.M;
    j["gap"] = real_json(r.gap);
    for (int i = 0; i < record_eigenvalues; ++i) j["eig" + std::to_string(i + 1)] = real_json(r.eig[i]);
    j["zeros"] = r.zeros;
    j["t_asm"] = real_json(r.t_asm);
    j["t_eig"] = real_json(r.t_eig);
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

std::vector<ResultRecord> from_json(const std::string& text) {
  std::vector<ResultRecord> out;
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, std::string("malformed JSON: ") + e.what());
  }
  require(arr.is_array(), ErrorCode::io, "JSON results must be an array");
  try {
    for (const auto& j : arr) {
      ResultRecord r;
      r.d = j.at("d").get<int>();
      r.gamma = json_real(j.at("gamma"));
      r.alpha = json_real(j.at("alpha"));
      r.V = json_real(j.at("V"));
      r.N = j.at("N").get<int>();
      r.p = j.at("p").get<int>();
      r.backend = j.at("backend").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.M = j.at("M").get<int>();
      r.gap = json_real(j.at("gap"));
      for (int i = 0; i < record_eigenvalues; ++i) r.eig[i] = json_real(j.at("eig" + std::to_string(i + 1)));
      r.zeros = j.at("zeros").get<int>();
      r.t_asm = json_real(j.at("t_asm"));
      r.t_eig = json_real(j.at("t_eig"));
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::io, std::string("malformed JSON record: ") + e.what());
  }
  return out;
}

void emit(const std::vector<ResultRecord>& records, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::io, "cannot write " + path);
  out << (format == OutputFormat::csv ? to_csv(records) : to_json(records));
  out.flush();
  require(out.good(), ErrorCode::io, "write failed for " + path);
}

std::vector<ResultRecord> read_records(const std::string& path, OutputFormat format) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return format == OutputFormat::csv ? from_csv(ss.str()) : from_json(ss.str());
}

bool same_point(const ResultRecord& a, const ResultRecord& b) {
  return a.d == b.d && a.gamma == b.gamma && a.alpha == b.alpha && a.V == b.V && a.N == b.N && a.p == b.p &&
         a.backend == b.backend && a.method == b.method;
}

// ---------------------------------------------------------------------------
// execution

namespace {

struct PointTask {
  double V;
  int N;
  Backend backend;
};

std::vector<GapMethod> methods_of(MethodChoice m) {
  if (m == MethodChoice::both) return {GapMethod::nullspace, GapMethod::corrected};
  return {m == MethodChoice::nullspace ? GapMethod::nullspace : GapMethod::corrected};
}

std::string dump_path(const std::string& stem, const PointTask& t, bool many) {
  if (!many) return stem;
  const std::filesystem::path p(stem);
  char tag[96];
  std::snprintf(tag, sizeof tag, "_V%g_N%d_%s", t.V, t.N, backend_name(t.backend));
  return (p.parent_path() / (p.stem().string() + tag + p.extension().string())).string();
}

std::vector<ResultRecord> run_point(const RunConfig& cfg, const PointTask& t, int threads, bool many_points) {
  const OperatorParams prm = cfg.physics();
  const int d = prm.d;
  const Mesh mesh(t.V, t.N, d);
  const BasisSpec basis = make_basis(cfg.p, d);
  const auto t0 = std::chrono::steady_clock::now();

  std::unique_ptr<NuProfile> nu;
  std::unique_ptr<RowAssembler> asmb;
  if (t.backend == Backend::grad) {
    require(prm.integrable(), ErrorCode::not_applicable, "grad backend requires alpha < 0");
    nu = std::make_unique<NuProfile>(make_nu_profile(prm, mesh));
    GradSettings gs;
    gs.near_rule = cfg.near_rule;
    gs.representation = cfg.grad_representation;
    gs.kernel_order = cfg.kernel_order;
    gs.nu_order = cfg.nu_order;
    gs.near_order = cfg.near_order;
    gs.plane_order = cfg.plane_order;
    gs.threads = threads;
    asmb = std::make_unique<GradAssembler>(mesh, basis, prm, *nu, gs);
  } else {
    DirectSettings ds;
    ds.tri_order = cfg.tri_order;
    ds.angular.tol = cfg.ang_tol;
    ds.threads = threads;
    asmb = std::make_unique<DirectAssembler>(mesh, basis, prm, ds);
  }
  const ConstraintSet cs = constraint_matrix(mesh, basis, asmb->representation());
  const ReflectionSectors sym(mesh, basis, cfg.symmetry);
  SectoredProblem prob;
  if (!cfg.dump_matrix.empty()) {
    const CollisionMatrix G = assemble_full(*asmb, threads, default_memory_budget);
    write_matrix_dump(dump_path(cfg.dump_matrix, t, many_points), G);
    prob = project_sectors(G, sym, cs);
    prob.diagnostics = G.diagnostics;
  } else {
    prob = assemble_sectors(*asmb, sym, cs, threads);
  }
  const double t_asm = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<ResultRecord> out;
  for (GapMethod m : methods_of(cfg.method)) {
    const SpectralResult res = sectored_gap(prob, m);
    ResultRecord r;
    r.d = d;
    r.gamma = prm.gamma;
    r.alpha = prm.alpha;
    r.V = t.V;
    r.N = t.N;
    r.p = cfg.p;
    r.backend = backend_name(t.backend);
    r.method = to_string(m);
    r.M = basis_size(mesh, basis);
    r.gap = res.gap;
    r.eig.fill(nan_value);
    for (int i = 0; i < std::min<int>(d + 6, static_cast<int>(res.eigenvalues.size())); ++i)
      r.eig[i] = res.eigenvalues[i];
    r.zeros = res.zeros;
    r.t_asm = t_asm;
    r.t_eig = res.seconds;
    r.diagnostics = prob.diagnostics;
    r.gap_exists = res.gap_exists;
    r.diagnostic = res.diagnostic;
    out.push_back(std::move(r));
  }
  return out;
}

// Single writer for incremental output.
class RecordSink {
 public:
  RecordSink(const RunConfig& cfg, std::vector<ResultRecord> existing)
      : path_(cfg.out), format_(cfg.format), all_(std::move(existing)) {
    if (path_.empty()) return;
    // rewrite once so the file is well formed even if it was truncated
    emit(all_, format_, path_);
  }

  void add(const std::vector<ResultRecord>& recs) {
    if (path_.empty()) return;
    std::lock_guard lock(mutex_);
    all_.insert(all_.end(), recs.begin(), recs.end());
    if (format_ == OutputFormat::json) {
      emit(all_, format_, path_);
      return;
    }
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    require(out.good(), ErrorCode::io, "cannot append to " + path_);
    for (const auto& r : recs) out << csv_row(r) << "\n";
    out.flush();
    require(out.good(), ErrorCode::io, "write failed for " + path_);
  }

 private:
  std::string path_;
  OutputFormat format_;
  std::vector<ResultRecord> all_;
  std::mutex mutex_;
};

}  // namespace

RunReport run(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const OperatorParams prm = cfg.physics();
  RunReport report;

  std::vector<ResultRecord> existing;
  if (!cfg.out.empty() && cfg.resume && std::filesystem::exists(cfg.out) && std::filesystem::file_size(cfg.out) > 0)
    existing = read_records(cfg.out, cfg.format);

  std::vector<Backend> backends;
  if (cfg.backend != BackendChoice::direct) backends.push_back(Backend::grad);
  if (cfg.backend != BackendChoice::grad) backends.push_back(Backend::direct);
  const std::vector<GapMethod> methods = methods_of(cfg.method);

  std::vector<PointTask> tasks;
  std::vector<PointFailure> early;
  for (double V : cfg.V) {
    std::vector<int> Ns = cfg.N;
    if (cfg.fixed_dv) {
      const double n = 2.0 * V / *cfg.fixed_dv;
      const int ni = static_cast<int>(std::lround(n));
      if (ni < 1 || std::abs(n - ni) > 1e-9 * std::max(1.0, n)) {
        early.push_back({V, 0, "", ErrorCode::invalid_argument, "2V/dv is not a positive integer"});
        continue;
      }
      Ns = {ni};
    }
    for (int N : Ns)
      for (Backend b : backends) {
        bool done = !existing.empty();
        for (GapMethod m : methods) {
          ResultRecord key;
          key.d = prm.d;
          key.gamma = prm.gamma;
          key.alpha = prm.alpha;
          key.V = V;
          key.N = N;
          key.p = cfg.p;
          key.backend = backend_name(b);
          key.method = to_string(m);
          done = done && std::any_of(existing.begin(), existing.end(),
                                     [&](const ResultRecord& r) { return same_point(r, key); });
        }
        if (done)
          ++report.skipped;
        else
          tasks.push_back({V, N, b});
      }
  }

  RecordSink sink(cfg, std::move(existing));
  const int workers = resolve_threads(cfg.threads);
  const int n = static_cast<int>(tasks.size());
  const int jobs = cfg.parallel_points ? std::max(1, std::min(workers, n)) : 1;
  const int per_point = std::max(1, workers / jobs);
  std::vector<std::vector<ResultRecord>> results(n);
  std::vector<std::optional<PointFailure>> failed(n);
  std::mutex progress_mutex;

  parallel_for(n, jobs, [&](int i) {
    const PointTask& t = tasks[i];
    try {
      results[i] = run_point(cfg, t, per_point, n > 1);
    } catch (const Error& e) {
      failed[i] = PointFailure{t.V, t.N, backend_name(t.backend), e.code(), e.what()};
    } catch (const std::bad_alloc&) {
      failed[i] = PointFailure{t.V, t.N, backend_name(t.backend), ErrorCode::memory_budget, "out of memory"};
    } catch (const std::exception& e) {
      failed[i] = PointFailure{t.V, t.N, backend_name(t.backend), ErrorCode::internal, e.what()};
    }
    if (!failed[i]) sink.add(results[i]);
    if (progress) {
      std::lock_guard lock(progress_mutex);
      if (failed[i])
        progress(nullptr, &*failed[i]);
      else
        for (const auto& r : results[i]) progress(&r, nullptr);
    }
  });

  report.failures = std::move(early);
  for (int i = 0; i < n; ++i) {
    if (failed[i]) {
      report.failures.push_back(*failed[i]);
      continue;
    }
    report.records.insert(report.records.end(), results[i].begin(), results[i].end());
  }
  return report;
}

}  // namespace boltzgap
