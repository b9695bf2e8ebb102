// shatterlab: command-line front end.
//
// Exit codes: 0 ok, 1 I/O or parse error, 2 domain error, 3 non-convergence.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shatterlab/campaign.hpp"
#include "shatterlab/diagnostics.hpp"
#include "shatterlab/errors.hpp"
#include "shatterlab/io.hpp"
#include "shatterlab/manifest.hpp"
#include "shatterlab/noise.hpp"
#include "shatterlab/pseudospectrum.hpp"
#include "shatterlab/specr.hpp"
#include "shatterlab/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace shatterlab;

namespace {

ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(io::format_double(x)); }

std::string csv_schema(const char* schema) { return std::string("# schema=") + schema + "\n"; }

Complex parse_complex(const std::string& s, const char* what) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) return {io::parse_double(s), 0.0};
    return {io::parse_double(s.substr(0, comma)), io::parse_double(s.substr(comma + 1))};
  } catch (const ParseError&) {
    throw ParseError(std::string("expected re,im for ") + what + ", got '" + s + "'", "");
  }
}

struct Written {
  std::vector<std::string> files;
  std::uint64_t seed = 0;
};

// Emits `content` to out_dir/name, or stdout when name is empty.
void emit(const std::string& out_dir, const std::string& name, const std::string& content, Written& w) {
  if (name.empty()) {
    std::cout << content;
    return;
  }
  io::write_file_atomic((fs::path(out_dir) / name).string(), content);
  w.files.push_back(name);
}

std::string diagnose_json(const SpectralReport& r) {
  ojson j;
  j["schema"] = "shatterlab.diagnose/1";
  j["n"] = r.eigenvalues.size();
  ojson eigs = ojson::array();
  for (const auto& l : r.eigenvalues) eigs.push_back({l.real(), l.imag()});
  j["eigenvalues"] = eigs;
  ojson kj = ojson::array();
  for (double k : r.kappa_j) kj.push_back(num(k));
  j["kappa_j"] = kj;
  j["kappa_v_lower"] = num(r.kappa_v_lower);
  j["kappa_v_upper"] = num(r.kappa_v_upper);
  j["kappa_v_direct"] = num(r.kappa_v_direct);
  j["eta"] = num(r.eta);
  j["sigma_n"] = num(r.sigma_n);
  j["sigma_n_minus_1"] = num(r.sigma_n_minus_1);
  j["defective"] = r.defective;
  return j.dump(2) + "\n";
}

std::string diagnose_csv(const SpectralReport& r) {
  using io::format_double;
  std::string out = csv_schema("shatterlab.diagnose/1");
  out += "j,re,im,kappa_j,kappa_v_lower,kappa_v_upper,kappa_v_direct,eta,sigma_n,sigma_n_minus_1,defective\n";
  const std::string tail = "," + format_double(r.kappa_v_lower) + "," + format_double(r.kappa_v_upper) + "," +
                           format_double(r.kappa_v_direct) + "," + format_double(r.eta) + "," +
                           format_double(r.sigma_n) + "," + format_double(r.sigma_n_minus_1) + "," +
                           (r.defective ? "1" : "0") + "\n";
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j)
    out += std::to_string(j) + "," + format_double(r.eigenvalues[j].real()) + "," +
           format_double(r.eigenvalues[j].imag()) + "," + format_double(r.kappa_j[j]) + tail;
  return out;
}

// Every command runs from a JSON config so that replay can repeat it.
Written execute(const std::string& command, const json& cfg, const std::string& out_dir, bool dry_run = false) {
  Written w;
  if (command == "perturb") {
    const auto loaded = io::read_matrix_market(cfg.at("input").get<std::string>());
    const NoiseSpec spec{loaded.matrix.n(), cfg.at("rho").get<double>(), cfg.at("scale").get<double>(),
                         cfg.at("seed").get<std::uint64_t>()};
    spec.validate();
    w.seed = spec.seed;
    const auto out = perturb(loaded.matrix, spec);
    const auto text = loaded.layout == io::Layout::Array ? io::format_matrix_market_array(out.to_dense())
                                                         : io::format_matrix_market(out);
    emit(out_dir, cfg.at("out").get<std::string>(), text, w);
  } else if (command == "diagnose") {
    const auto a = io::read_matrix_market(cfg.at("input").get<std::string>()).matrix.to_dense();
    const auto report = diagnose(a, cfg.at("defect_threshold").get<double>());
    const auto fmt = cfg.at("format").get<std::string>();
    emit(out_dir, cfg.at("out").get<std::string>(), fmt == "csv" ? diagnose_csv(report) : diagnose_json(report), w);
  } else if (command == "pseudospectrum") {
    const auto a = io::read_matrix_market(cfg.at("input").get<std::string>()).matrix.to_dense();
    const auto& c = cfg.at("center");
    const auto grid = pseudospectrum_grid(a, cfg.at("eps").get<std::vector<double>>(),
                                          {c.at(0).get<double>(), c.at(1).get<double>()},
                                          cfg.at("radius").get<double>(), cfg.at("res").get<std::int64_t>());
    const auto fmt = cfg.at("format").get<std::string>();
    emit(out_dir, cfg.at("out").get<std::string>(),
         fmt == "json" ? io::grid_to_json(grid) : csv_schema("shatterlab.pseudospectrum/1") + io::grid_to_csv(grid),
         w);
  } else if (command == "specr") {
    const auto m = io::read_matrix_market(cfg.at("input").get<std::string>()).matrix;
    SpecrConfig sc;
    sc.rho = cfg.at("rho").get<double>();
    sc.eps = cfg.at("eps").get<double>();
    sc.delta = cfg.at("delta").get<double>();
    sc.seed = cfg.at("seed").get<std::uint64_t>();
    if (!cfg.at("k").is_null()) sc.k_override = cfg.at("k").get<std::int64_t>();
    w.seed = sc.seed;
    const auto r = specr_estimate(m, sc);
    ojson j;
    j["schema"] = "shatterlab.specr/1";
    j["estimate"] = num(r.estimate);
    j["k_used"] = r.k_used;
    j["nnz_perturbed"] = r.nnz_perturbed;
    j["perturbation_norm"] = num(r.perturbation_norm);
    ojson trace = ojson::array();
    for (double x : r.log_norm_trace) trace.push_back(num(x));
    j["log_norm_trace"] = trace;
    if (cfg.at("with_oracle").get<bool>()) {
      const double spr = exact_spectral_radius(r.perturbed.to_dense());
      ojson o;
      o["spectral_radius"] = num(spr);
      o["relative_error"] = num(spr > 0.0 ? std::abs(r.estimate - spr) / spr : r.estimate);
      o["within_eps"] = (1.0 - sc.eps) * spr <= r.estimate && r.estimate <= (1.0 + sc.eps) * spr;
      j["oracle"] = o;
    }
    emit(out_dir, cfg.at("out").get<std::string>(), j.dump(2) + "\n", w);
  } else if (command == "experiment") {
    const auto c = campaign::parse_campaign(cfg);
    campaign::validate(c);
    w.seed = cfg.at("seed").get<std::uint64_t>();
    if (dry_run) {
      const auto p = campaign::plan(c);
      std::cout << "campaign: " << c.kind << "\n"
                << "trials: " << p.trials << "\n"
                << "estimated_matvecs: " << p.matvecs << "\n";
      return w;
    }
    for (const auto& f : campaign::run(c)) emit(out_dir, f.name, f.content, w);
  } else {
    throw ParseError("unknown command '" + command + "'", "/command");
  }
  return w;
}

void write_manifest(const std::string& command, const json& cfg, const std::string& out_dir,
                    const std::string& manifest_name, const Written& w) {
  if (w.files.empty()) return;
  const auto m = RunManifest::make(command, cfg, w.seed, w.files);
  io::write_file_atomic((fs::path(out_dir) / manifest_name).string(), m.to_json().dump(2) + "\n");
}

// Splits an --out path into (directory, file name).
std::pair<std::string, std::string> split_out(const std::string& out) {
  if (out.empty()) return {".", ""};
  const fs::path p(out);
  const auto dir = p.has_parent_path() ? p.parent_path().string() : std::string(".");
  return {dir, p.filename().string()};
}

std::string absolute(const std::string& path) { return fs::absolute(path).lexically_normal().string(); }

void apply_thread_cap() {
  const char* env = std::getenv("SHATTERLAB_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw ParseError(std::string("SHATTERLAB_THREADS must be a positive integer, got '") + env + "'", "");
  omp_set_num_threads(static_cast<int>(std::min<long>(v, omp_get_max_threads())));
}

int run(int argc, char** argv) {
  CLI::App app{"Pseudospectral shattering lab: perturb, diagnose and probe random matrices"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  // perturb
  std::string p_in, p_out;
  double p_rho = 1.0, p_scale = 1.0;
  std::uint64_t p_seed = 0;
  auto* perturb_cmd = app.add_subcommand("perturb", "Add sparse complex Gaussian noise to a matrix");
  perturb_cmd->add_option("input", p_in, "Matrix Market file")->required();
  perturb_cmd->add_option("--rho", p_rho, "Entry density in (0, 1]")->required();
  perturb_cmd->add_option("--scale", p_scale, "Noise multiplier");
  perturb_cmd->add_option("--seed", p_seed, "PRNG seed")->required();
  perturb_cmd->add_option("--out", p_out, "Output Matrix Market file")->required();

  // diagnose
  std::string d_in, d_out;
  bool d_json = false, d_csv = false;
  double d_threshold = kDefectiveThreshold;
  auto* diag_cmd = app.add_subcommand("diagnose", "Eigenvalue conditioning, gap and smallest singular values");
  diag_cmd->add_option("input", d_in, "Matrix Market file")->required();
  auto* dj = diag_cmd->add_flag("--json", d_json, "JSON output (default)");
  diag_cmd->add_flag("--csv", d_csv, "CSV output, one row per eigenvalue")->excludes(dj);
  diag_cmd->add_option("--out", d_out, "Write to a file instead of stdout");
  diag_cmd->add_option("--defect-threshold", d_threshold, "|w*v| below this marks a defective eigenpair");

  // pseudospectrum
  std::string s_in, s_out, s_center = "0,0";
  std::vector<double> s_eps;
  double s_radius = 1.0;
  std::int64_t s_res = 101;
  bool s_json = false;
  auto* ps_cmd = app.add_subcommand("pseudospectrum", "sigma_min(zI - A) on a square grid");
  ps_cmd->add_option("input", s_in, "Matrix Market file")->required();
  ps_cmd->add_option("--eps", s_eps, "Contour levels recorded with the grid");
  ps_cmd->add_option("--center", s_center, "Grid center as re,im");
  ps_cmd->add_option("--radius", s_radius, "Half-width of the grid");
  ps_cmd->add_option("--res", s_res, "Nodes per side");
  ps_cmd->add_option("--out", s_out, "Output file (stdout if omitted)");
  ps_cmd->add_flag("--json", s_json, "JSON instead of CSV");

  // specr
  std::string r_in, r_out;
  double r_rho = 1.0, r_eps = 0.1, r_delta = 1e-3;
  std::uint64_t r_seed = 0;
  std::optional<std::int64_t> r_k;
  bool r_oracle = false;
  auto* specr_cmd = app.add_subcommand("specr", "Spectral radius estimate via a randomly perturbed power method");
  specr_cmd->add_option("input", r_in, "Matrix Market file")->required();
  specr_cmd->add_option("--rho", r_rho, "Noise density")->required();
  specr_cmd->add_option("--eps", r_eps, "Relative accuracy")->required();
  specr_cmd->add_option("--delta", r_delta, "Backward perturbation size")->required();
  specr_cmd->add_option("--seed", r_seed, "PRNG seed")->required();
  specr_cmd->add_option("--k", r_k, "Override the iteration count");
  specr_cmd->add_flag("--with-oracle", r_oracle, "Also compute the exact spectral radius of the realized matrix");
  specr_cmd->add_option("--out", r_out, "Output file (stdout if omitted)");

  // experiment
  std::string e_cfg, e_out_dir = ".";
  bool e_dry = false;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte-Carlo campaign described by a JSON file");
  exp_cmd->add_option("config", e_cfg, "Campaign JSON")->required();
  exp_cmd->add_flag("--dry-run", e_dry, "Print the planned work and exit");
  exp_cmd->add_option("--out-dir", e_out_dir, "Directory for result files");

  // replay
  std::string m_path, m_out_dir;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", m_path, "Manifest JSON")->required();
  replay_cmd->add_option("--out-dir", m_out_dir, "Directory for outputs (default: the manifest's directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  apply_thread_cap();

  if (*perturb_cmd) {
    const auto [dir, name] = split_out(p_out);
    const json cfg = {{"input", absolute(p_in)}, {"rho", p_rho}, {"scale", p_scale}, {"seed", p_seed}, {"out", name}};
    write_manifest("perturb", cfg, dir, name + ".manifest.json", execute("perturb", cfg, dir));
  } else if (*diag_cmd) {
    const auto [dir, name] = split_out(d_out);
    const json cfg = {{"input", absolute(d_in)},
                      {"format", d_csv ? "csv" : "json"},
                      {"defect_threshold", d_threshold},
                      {"out", name}};
    write_manifest("diagnose", cfg, dir, name + ".manifest.json", execute("diagnose", cfg, dir));
  } else if (*ps_cmd) {
    const auto [dir, name] = split_out(s_out);
    const auto c = parse_complex(s_center, "--center");
    const json cfg = {{"input", absolute(s_in)}, {"eps", s_eps},   {"center", {c.real(), c.imag()}},
                      {"radius", s_radius},      {"res", s_res},   {"format", s_json ? "json" : "csv"},
                      {"out", name}};
    write_manifest("pseudospectrum", cfg, dir, name + ".manifest.json", execute("pseudospectrum", cfg, dir));
  } else if (*specr_cmd) {
    const auto [dir, name] = split_out(r_out);
    const json cfg = {{"input", absolute(r_in)}, {"rho", r_rho},
                      {"eps", r_eps},            {"delta", r_delta},
                      {"seed", r_seed},          {"k", r_k ? json(*r_k) : json(nullptr)},
                      {"with_oracle", r_oracle}, {"out", name}};
    write_manifest("specr", cfg, dir, name + ".manifest.json", execute("specr", cfg, dir));
  } else if (*exp_cmd) {
    const auto c = campaign::parse_campaign_text(io::read_file(e_cfg), e_cfg);
    const auto w = execute("experiment", c.document, e_out_dir, e_dry);
    if (!e_dry) write_manifest("experiment", c.document, e_out_dir, c.name + "_manifest.json", w);
  } else if (*replay_cmd) {
    json doc;
    try {
      doc = json::parse(io::read_file(m_path));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), m_path + ":byte " + std::to_string(e.byte));
    }
    const auto m = RunManifest::from_json(doc);
    const auto dir = m_out_dir.empty() ? split_out(m_path).first : m_out_dir;
    const auto w = execute(m.command, m.config, dir);
    if (!m_out_dir.empty()) write_manifest(m.command, m.config, dir, fs::path(m_path).filename().string(), w);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed configuration: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
