#ifndef NLSTEFAN_IO_HPP
#define NLSTEFAN_IO_HPP

// Artifact serialization. Every emitter is deterministic: fixed key order,
// fixed float formatting, no timestamps, LF line ends; identical inputs give
// byte-identical files. Writes go through a temp file and a rename so a
// crashed run never leaves a half-written artifact.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nlstefan/asymptotics.hpp"
#include "nlstefan/diagnostics.hpp"
#include "nlstefan/evolution.hpp"
#include "nlstefan/grid.hpp"
#include "nlstefan/kernel.hpp"
#include "nlstefan/phaseloss.hpp"

namespace nlstefan::io {

using ordered_json = nlohmann::ordered_json;

// Shortest exact decimal: round-trips the double and is stable across runs.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Infinite distances appear in separation reports; JSON has no literal for
// them, so they are emitted as a string.
inline ordered_json json_number(double x) {
  if (std::isinf(x)) return x > 0 ? "infinity" : "-infinity";
  return x;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hash_hex(std::string_view s) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(s)));
  return buf;
}

inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("rename failed: " + path.string() + ": " + ec.message());
}

inline std::string field_csv(const Field& f) {
  const Grid& g = f.grid;
  std::string out = g.dim == 1 ? "index,coord,value\n" : "index,coord,coord2,value\n";
  for (index_t i = 0; i < g.node_count(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(g.coord(i, 0));
    if (g.dim == 2) {
      out += ',';
      out += format_double(g.coord(i, 1));
    }
    out += ',';
    out += format_double(f[i]);
    out += '\n';
  }
  return out;
}

inline ordered_json grid_json(const Grid& g) {
  ordered_json j;
  j["dim"] = g.dim;
  j["shape"] = g.dim == 1 ? ordered_json::array({g.shape[0]})
                          : ordered_json::array({g.shape[0], g.shape[1]});
  j["spacing"] = g.h;
  j["origin"] = g.dim == 1 ? ordered_json::array({g.origin[0]})
                           : ordered_json::array({g.origin[0], g.origin[1]});
  return j;
}

inline ordered_json field_json(const Field& f) {
  ordered_json j;
  j["grid"] = grid_json(f.grid);
  j["values"] = f.values;
  return j;
}

inline Grid grid_from_json(const ordered_json& j) {
  for (const char* key : {"dim", "shape", "spacing", "origin"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("grid json: missing \"") + key + "\"");
  int dim = j.at("dim").get<int>();
  auto shape = j.at("shape");
  double h = j.at("spacing").get<double>();
  auto origin = j.at("origin");
  if (dim == 1) {
    if (shape.size() != 1 || origin.size() != 1)
      throw std::invalid_argument("grid json: 1D needs one shape entry and one origin entry");
    return Grid::make_1d(shape[0].get<index_t>(), h, origin[0].get<double>());
  }
  if (dim == 2) {
    if (shape.size() != 2 || origin.size() != 2)
      throw std::invalid_argument("grid json: 2D needs two shape entries and two origin entries");
    return Grid::make_2d(shape[0].get<index_t>(), shape[1].get<index_t>(), h,
                         origin[0].get<double>(), origin[1].get<double>());
  }
  throw std::invalid_argument("grid json: dim must be 1 or 2");
}

inline Field field_from_json(const ordered_json& j) {
  if (!j.contains("grid")) throw std::invalid_argument("field json: missing \"grid\"");
  if (!j.contains("values") || !j.at("values").is_array())
    throw std::invalid_argument("field json: missing \"values\" array");
  Grid g = grid_from_json(j.at("grid"));
  std::vector<double> values = j.at("values").get<std::vector<double>>();
  return Field(g, std::move(values));
}

inline ordered_json kernel_json(const DiscreteKernel& k) {
  ordered_json j;
  j["profile"] = profile_name(k.profile);
  j["R_J"] = k.radius;
  j["h"] = k.h;
  j["dim"] = k.dim;
  j["weights"] = k.w;
  return j;
}

// One row per recorded step: the per-step scalar diagnostics series.
inline std::string diagnostics_csv(const Trajectory& traj) {
  std::string out = "t,mass,linf,l1_gamma,supp_plus_count,supp_minus_count\n";
  for (const DiagRow& r : traj.rows) {
    out += format_double(r.t);
    out += ',';
    out += format_double(r.mass);
    out += ',';
    out += format_double(r.linf);
    out += ',';
    out += format_double(r.l1_gamma);
    out += ',';
    out += std::to_string(r.supp_plus);
    out += ',';
    out += std::to_string(r.supp_minus);
    out += '\n';
  }
  return out;
}

inline ordered_json report_json(const CheckReport& rep) {
  ordered_json j;
  j["check"] = rep.check;
  j["pass"] = rep.pass;
  j["points_checked"] = rep.points_checked;
  ordered_json arr = ordered_json::array();
  for (const Violation& v : rep.violations) {
    ordered_json e;
    e["t"] = v.t;
    e["node"] = v.node;
    e["lhs"] = v.lhs;
    e["rhs"] = v.rhs;
    arr.push_back(e);
  }
  j["violations"] = arr;
  return j;
}

inline ordered_json bop_json(const BopResult& r, const std::string& w_inf_file,
                             const std::string& f_tilde_file) {
  ordered_json j;
  j["method"] = bop_method_name(r.method);
  ordered_json res;
  res["complementarity"] = r.residuals.complementarity;
  res["bound"] = r.residuals.bound;
  res["fixed_point"] = r.residuals.fixed_point;
  j["residuals"] = res;
  j["w_inf_file"] = w_inf_file;
  j["f_tilde_file"] = f_tilde_file;
  if (r.method == BopMethod::direct_sweep)
    j["sweeps"] = r.sweeps;
  else
    j["t_reached"] = r.t_reached;
  return j;
}

inline ordered_json interaction_json(const InteractionReport& r) {
  ordered_json j;
  j["level"] = interaction_level_name(r.level);
  j["projected_support_distance"] = json_number(r.dist_projected_supports);
  j["temperature_envelope_distance"] = json_number(r.dist_temperature_envelopes);
  j["R_J"] = r.r_j;
  return j;
}

inline ordered_json phase_loss_json(const PhaseLossReport& r, const std::string& config_hash) {
  ordered_json j;
  j["R"] = r.r;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["v_minus_l1"] = r.v_minus_l1;
  j["f_minus_sup"] = r.f_minus_sup;
  j["eta_bar"] = r.eta_bar;
  j["kappa"] = r.kappa;
  j["eta_star"] = r.eta_star;
  j["t1"] = r.t1;
  j["criterion_holds"] = r.criterion_holds;
  j["failure_reason"] = r.failure_reason;
  j["tol_loss"] = r.tol_loss;
  j["dt"] = r.dt;
  if (r.measured_loss_time) j["measured_loss_time"] = *r.measured_loss_time;
  if (r.loss_within_bound) j["loss_within_bound"] = *r.loss_within_bound;
  j["config_hash"] = config_hash;
  return j;
}

}  // namespace nlstefan::io

#endif
