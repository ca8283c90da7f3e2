// Command-line front end. Flags map one-to-one onto config keys; a preset
// file given with --config is applied first and flags override it.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "boltzgap/boltzgap.h"

namespace {

struct Flag {
  const char* key;
  const char* help;
  std::string value;
};

void print_record(const bg_record* r, const char* failure, void*) {
  if (failure) {
    std::fprintf(stderr, "point failed: %s\n", failure);
    return;
  }
  std::fprintf(stderr, "d=%d gamma=%g alpha=%g V=%g N=%d p%d %s/%s M=%d gap=%.10g zeros=%d t_asm=%.2fs t_eig=%.2fs\n",
               r->d, r->gamma, r->alpha, r->V, r->N, r->p, r->backend, r->method, r->M, r->gap, r->zeros, r->t_asm,
               r->t_eig);
  if (r->angular_failures > 0)
    std::fprintf(stderr, "  warning: %lld angular integrals missed the tolerance (max error %.3g)\n",
                 static_cast<long long>(r->angular_failures), r->max_angular_error);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical spectral gaps of linearized Boltzmann operators on DG velocity meshes"};
  app.set_version_flag("--version", bg_version());

  std::string preset;
  app.add_option("--config", preset, "key=value preset applied before the flags")->check(CLI::ExistingFile);

  std::vector<Flag> flags = {
      {"dim", "velocity dimension, 2 or 3", {}},
      {"gamma", "potential exponent", {}},
      {"alpha", "angular exponent", {}},
      {"V", "domain half widths, comma list", {}},
      {"N", "elements per axis, comma list", {}},
      {"fixed-dv", "element width; derives N = 2V/dv and overrides --N", {}},
      {"basis", "p0 or p1", {}},
      {"backend", "grad, direct or both", {}},
      {"method", "nullspace, corrected or both", {}},
      {"tri-order", "points per triangle of the direct rule: 1, 3, 6 or 7", {}},
      {"plane-order", "Gauss-Hermite order of the plane integral", {}},
      {"ang-tol", "relative tolerance of the angular integrals", {}},
      {"kernel-order", "far-field Gauss points per axis (grad)", {}},
      {"near-order", "near-field relative-coordinate order (grad)", {}},
      {"nu-order", "collision-frequency Gauss points per axis (grad)", {}},
      {"near-rule", "exact or offset (grad)", {}},
      {"grad-rep", "F or g representation for the grad backend", {}},
      {"symmetry", "on or off: reflection sector decomposition", {}},
      {"threads", "worker count (default: BOLTZGAP_THREADS, else 1)", {}},
      {"parallel-points", "on or off: run sweep points concurrently", {}},
      {"out", "result file, appended to and resumed from", {}},
      {"format", "csv or json", {}},
      {"dump-matrix", "write the dense collision matrix to this path", {}},
      {"normalize-b", "on, off or default", {}},
      {"resume", "on or off: skip points already present in --out", {}},
  };
  std::vector<std::pair<CLI::Option*, Flag*>> opts;
  for (Flag& f : flags) opts.emplace_back(app.add_option(std::string("--") + f.key, f.value, f.help), &f);

  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "no per-point progress on stderr");

  CLI11_PARSE(app, argc, argv);

  bg_config* cfg = nullptr;
  if (bg_config_create(&cfg) != BG_OK) {
    std::fprintf(stderr, "error: %s\n", bg_last_error());
    return 2;
  }
  auto bail = [&](const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, bg_last_error());
    bg_config_destroy(cfg);
    return 2;
  };
  if (!preset.empty() && bg_config_load(cfg, preset.c_str()) != BG_OK) return bail("config");
  for (const auto& [opt, f] : opts) {
    if (opt->count() == 0) continue;
    if (bg_config_set(cfg, f->key, f->value.c_str()) != BG_OK) return bail(f->key);
  }
  if (bg_config_validate(cfg) != BG_OK) return bail("config");
  char out_path[4096], format[16];
  bg_config_get(cfg, "out", out_path, sizeof out_path);
  bg_config_get(cfg, "format", format, sizeof format);

  bg_results* res = nullptr;
  const bg_status st = bg_run(cfg, quiet ? nullptr : print_record, nullptr, &res);
  if (st != BG_OK && st != BG_POINT_FAILED) return bail("run");

  if (res && bg_results_skipped(res) > 0 && !quiet)
    std::fprintf(stderr, "%zu point(s) already present, skipped\n", bg_results_skipped(res));
  if (out_path[0] == '\0' && res) {
    // no output file: records go to stdout
    if (bg_results_write(res, format, "/dev/stdout") != BG_OK) {
      bg_results_destroy(res);
      return bail("write");
    }
  }
  int code = 0;
  if (st == BG_POINT_FAILED) {
    for (size_t i = 0; i < bg_results_failures(res); ++i) std::fprintf(stderr, "failed: %s\n", bg_results_failure(res, i));
    code = 1;
  }
  bg_results_destroy(res);
  bg_config_destroy(cfg);
  return code;
}
