#pragma once

#include "kaefam/expr.hpp"
#include "kaefam/torus.hpp"

#include <string>
#include <vector>

namespace kaefam {

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Validated experiment configuration with defaults filled in.
struct RunConfig {
  struct Grid {
    int resolution = 64;
    double tau_re = 0.0;
    double tau_im = 1.0;
  } grid;

  struct Family {
    std::string potential; // required
    double h_tt = 1.0;
    double h_zz = 1.0;
    double h_tz_re = 0.0;
    double h_tz_im = 0.0;
    std::vector<cplx> base_points{cplx(0.0, 0.0)};
    std::vector<double> epsilon_list{1.0, 0.5, 0.25, 0.1, 0.05};
    bool allow_non_psd = false;
  } family;

  struct Solver {
    double tol = 1e-12;
    int max_iters = 50;
  } solver;

  struct Bergman {
    double radius = 1.0;
    std::string weight = "abs2(t)";
    std::vector<int> m_list{10, 20, 40};
    int degree = 24;
    int quadrature = 64;
    std::vector<cplx> points{cplx(0.0, 0.0)};
  } bergman;

  struct Output {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
  } output;

  cplx tau() const { return {grid.tau_re, grid.tau_im}; }
  TorusGrid make_grid() const { return TorusGrid(grid.resolution, tau()); }
  BackgroundForm background() const {
    return BackgroundForm{family.h_tt, family.h_zz, cplx(family.h_tz_re, family.h_tz_im)};
  }

  /// Canonical serialized form (sorted keys); also used for equality.
  std::string to_json_text() const;
  bool operator==(const RunConfig& other) const {
    return to_json_text() == other.to_json_text();
  }
};

/// Parse + validate a JSON document. Errors name the offending key.
RunConfig parse_config_text(const std::string& json_text);

RunConfig load_config(const std::string& path);

struct LoadedConfig {
  RunConfig config;
  std::string raw_bytes;  // exact file contents (pre-override)
  std::string hash;       // FNV-1a 64 over raw_bytes, hex
};

/// Load raw bytes, apply dotted-path overrides ("solver.tol=1e-10"),
/// validate. The manifest hash covers the raw file bytes.
LoadedConfig load_config_file(const std::string& path,
                              const std::vector<std::string>& overrides = {});

std::string fnv1a_hex(std::string_view bytes);

} // namespace kaefam
