// rotent: command-line front end.
//
// Exit status: 0 success, 1 usage or input error, 2 certification failure,
// 3 cap exhausted. JSON goes to --json (default stdout) even on failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rotent/boundary_example.hpp"
#include "rotent/io.hpp"
#include "rotent/localized_entropy.hpp"
#include "rotent/perron.hpp"
#include "rotent/potential.hpp"
#include "rotent/rotation_set.hpp"
#include "rotent/sft.hpp"
#include "rotent/thermo.hpp"

using namespace rotent;

namespace {

struct Outputs {
  std::string json;
  std::string svg;
  std::string csv;
  bool timestamp = false;
};

struct PotentialInput {
  std::string sft_path;
  std::string potential_path;
  std::string oracle;
  double decay = 0.5;
  std::string g_path;
};

struct Loaded {
  SftPtr sft;
  std::optional<LcPotential> lc;
  std::optional<PotentialOracle> oracle;
  int m() const { return lc ? lc->m() : oracle->m(); }
};

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::CapExceeded:
    case ErrorCode::CycleCapExceeded:
      return 3;
    case ErrorCode::NotCertified:
    case ErrorCode::ConstructionViolated:
    case ErrorCode::EmptySelection:
    case ErrorCode::EnclosureTooWide:
    case ErrorCode::ToleranceUnreachable:
    case ErrorCode::NoConvergence:
    case ErrorCode::Divergence:
    case ErrorCode::DegenerateRotationSet:
      return 2;
    default:
      return 1;
  }
}

void emit(const Outputs& out, const Json& doc) {
  const std::string text = dump(doc);
  if (out.json.empty() || out.json == "-") {
    std::cout << text;
  } else {
    write_text(out.json, text);
  }
}

SvgOptions svg_options(const Outputs& out) {
  SvgOptions opt;
  if (out.timestamp) {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    opt.timestamp = buf;
  }
  return opt;
}

Json potential_config(const PotentialInput& in) {
  Json j;
  j["sft"] = in.sft_path.empty() ? Json("full 2-shift, theta 1/2") : Json(in.sft_path);
  if (!in.potential_path.empty()) j["potential"] = in.potential_path;
  if (!in.oracle.empty()) {
    j["oracle"] = in.oracle;
    j["decay"] = in.decay;
    if (!in.g_path.empty()) j["g"] = in.g_path;
  }
  return j;
}

Loaded load(const PotentialInput& in) {
  Loaded L;
  if (in.oracle == "boundary-example") {
    L.oracle = example_potential(BoundaryExampleConfig{});
    L.sft = L.oracle->sft();
    return L;
  }
  L.sft = in.sft_path.empty() ? share(full_shift(2)) : share(parse_sft(read_text(in.sft_path), in.sft_path));
  if (!in.potential_path.empty() == !in.oracle.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --potential and --oracle");
  }
  if (!in.potential_path.empty()) {
    L.lc = parse_potential(read_text(in.potential_path), L.sft, in.potential_path);
  } else if (in.oracle == "first-one") {
    L.oracle = first_one_oracle(L.sft, in.decay);
  } else if (in.oracle == "weighted-sum") {
    if (in.g_path.empty()) throw Error(ErrorCode::InvalidArgument, "weighted-sum needs --g");
    L.oracle = weighted_sum_oracle(L.sft, in.decay, parse_matrix(read_text(in.g_path), in.g_path));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown oracle '" + in.oracle + "'");
  }
  return L;
}

void add_potential_options(CLI::App* cmd, PotentialInput& in) {
  cmd->add_option("--sft", in.sft_path, "SFT file (default: full 2-shift)");
  cmd->add_option("--potential", in.potential_path, "locally constant potential file");
  cmd->add_option("--oracle", in.oracle, "named potential: first-one, weighted-sum, boundary-example");
  cmd->add_option("--decay", in.decay, "decay of first-one / weighted-sum")->capture_default_str();
  cmd->add_option("--g", in.g_path, "letter values for weighted-sum (matrix file, one row per letter)");
}

Eigen::VectorXd parse_point(const std::string& s) {
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "malformed point '" + s + "'");
    }
  }
  if (vals.empty()) throw Error(ErrorCode::InvalidArgument, "empty point");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

RotationPolytope rotation_polytope(const Loaded& L, double tol) {
  if (L.lc) return L.lc->m() <= 2 ? support_hull(*L.lc) : elementary_hull(*L.lc);
  return rot_approx(*L.oracle, tol);
}

Eigen::Matrix2Xd hull_2d(const RotationPolytope& poly) {
  Eigen::Matrix2Xd V(2, poly.vertices().cols());
  if (poly.m() == 2) {
    V = poly.vertices();
  } else {
    V.row(0) = poly.vertices().row(0);
    V.row(1).setZero();
  }
  return V;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation sets and localized entropy of locally constant and continuous potentials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));
  Outputs out;
  app.add_option("--json", out.json, "JSON output path (default stdout)");
  app.add_option("--svg", out.svg, "SVG output path");
  app.add_option("--csv", out.csv, "CSV output path");
  app.add_flag("--timestamp", out.timestamp, "write a generation time comment into SVG files");

  auto* pf = app.add_subcommand("pf", "Perron eigenvalue enclosure of a nonnegative matrix");
  std::string matrix_path;
  double pf_tol = 1e-10;
  bool pf_relative = false;
  pf->add_option("matrix", matrix_path, "matrix file")->required();
  pf->add_option("--tol", pf_tol, "bracket width")->capture_default_str();
  pf->add_flag("--relative", pf_relative, "tol relative to the eigenvalue");

  auto* rot = app.add_subcommand("rot", "rotation set polytope");
  PotentialInput rot_in;
  double rot_tol = 1e-2;
  add_potential_options(rot, rot_in);
  rot->add_option("--tol", rot_tol, "Hausdorff tolerance for oracle potentials")->capture_default_str();

  auto* ent = app.add_subcommand("entropy", "localized entropy enclosure at an interior point");
  PotentialInput ent_in;
  std::string ent_w;
  double ent_tol = 1e-3;
  int ent_levels = 14;
  std::optional<double> ent_rmin;
  add_potential_options(ent, ent_in);
  ent->add_option("--w", ent_w, "point, comma separated coordinates")->required();
  ent->add_option("--tol", ent_tol, "target half-width")->capture_default_str();
  ent->add_option("--max-levels", ent_levels, "sandwich levels")->capture_default_str();
  ent->add_option("--r-min", ent_rmin, "certified inscribed radius (computed when absent)");

  auto* spec = app.add_subcommand("spectrum", "localized entropy over a grid of interior points");
  PotentialInput spec_in;
  int spec_grid = 9;
  double spec_tol = 1e-2;
  double spec_margin = 0.05;
  add_potential_options(spec, spec_in);
  spec->add_option("--grid", spec_grid, "points per axis")->capture_default_str();
  spec->add_option("--tol", spec_tol, "target half-width per point")->capture_default_str();
  spec->add_option("--margin", spec_margin, "skip points closer than this to the boundary")->capture_default_str();

  auto* bex = app.add_subcommand("boundary-example", "entropy gap at the exposed point of the boundary example");
  int n_min = 1, n_max = 3, j_max = 12, max_K = 8;
  BoundaryExampleConfig cfg;
  double x_scale = 0.25, x_ratio = 0.5;
  bool no_sweep = false;
  bex->add_option("--n-min", n_min)->capture_default_str();
  bex->add_option("--n-max", n_max)->capture_default_str();
  bex->add_option("--a", cfg.a, "value on Y0")->capture_default_str();
  bex->add_option("--lam-off", cfg.lam_off, "offset lambda >= 3")->capture_default_str();
  bex->add_option("--x-scale", x_scale, "x_k = x_scale * x_ratio^k")->capture_default_str();
  bex->add_option("--x-ratio", x_ratio)->capture_default_str();
  bex->add_option("--j-max", j_max, "last polygon vertex index")->capture_default_str();
  bex->add_option("--max-K", max_K, "largest explicit table level")->capture_default_str();
  bex->add_flag("--no-sweep", no_sweep, "skip the non-certifying equilibrium sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::string command;
  Json config;
  try {
    if (pf->parsed()) {
      command = "pf";
      config = Json{{"matrix", matrix_path}, {"tol", pf_tol}, {"relative", pf_relative}};
      Eigen::MatrixXd B = parse_matrix(read_text(matrix_path), matrix_path);
      PerronOptions opt;
      opt.relative = pf_relative;
      emit(out, envelope(command, config, to_json(perron(B, pf_tol, opt))));
      return 0;
    }
    if (rot->parsed()) {
      command = "rot";
      config = potential_config(rot_in);
      config["tol"] = rot_tol;
      Loaded L = load(rot_in);
      RotationPolytope poly = rotation_polytope(L, rot_tol);
      emit(out, envelope(command, config, to_json(poly)));
      if (!out.svg.empty()) {
        if (poly.m() > 2) throw Error(ErrorCode::InvalidArgument, "SVG output needs m <= 2");
        write_text(out.svg, polygon_svg(hull_2d(poly), Eigen::Matrix2Xd(2, 0), {}, svg_options(out)));
      }
      return 0;
    }
    if (ent->parsed()) {
      command = "entropy";
      config = potential_config(ent_in);
      config["w"] = ent_w;
      config["tol"] = ent_tol;
      config["max_levels"] = ent_levels;
      if (ent_rmin) config["r_min"] = *ent_rmin;
      Loaded L = load(ent_in);
      SandwichOptions opt;
      opt.max_levels = ent_levels;
      opt.r_min = ent_rmin;
      Eigen::VectorXd w = parse_point(ent_w);
      EntropyEnclosure enc = L.lc ? localized_entropy(*L.lc, w, ent_tol, opt) : localized_entropy(*L.oracle, w, ent_tol, opt);
      emit(out, envelope(command, config, to_json(enc)));
      return enc.converged ? 0 : 2;
    }
    if (spec->parsed()) {
      command = "spectrum";
      config = potential_config(spec_in);
      config["grid"] = spec_grid;
      config["tol"] = spec_tol;
      config["margin"] = spec_margin;
      if (spec_grid < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points per axis");
      Loaded L = load(spec_in);
      const int m = L.m();
      if (m > 2) throw Error(ErrorCode::InvalidArgument, "spectrum needs m <= 2");
      RotationPolytope poly = rotation_polytope(L, spec_margin / 4);
      Eigen::VectorXd lo = poly.vertices().rowwise().minCoeff(), hi = poly.vertices().rowwise().maxCoeff();
      std::vector<SpectrumRow> rows;
      Json points = Json::array();
      const int ny = m == 2 ? spec_grid : 1;
      for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < spec_grid; ++ix) {
          SpectrumRow row;
          row.w.resize(m);
          row.w(0) = lo(0) + (hi(0) - lo(0)) * (ix + 0.5) / spec_grid;
          if (m == 2) row.w(1) = lo(1) + (hi(1) - lo(1)) * (iy + 0.5) / spec_grid;
          Json p{{"w", to_json(row.w)}};
          try {
            if (poly.affine_dim() < m || poly.shape.boundary_distance(row.w) <= spec_margin) {
              p["skipped"] = "outside or near the boundary";
            } else {
              EntropyEnclosure enc =
                  L.lc ? localized_entropy(*L.lc, row.w, spec_tol) : localized_entropy(*L.oracle, row.w, spec_tol);
              row.l = enc.l;
              row.u = enc.u;
              row.ok = enc.converged;
              p["l"] = enc.l;
              p["u"] = enc.u;
              p["converged"] = enc.converged;
            }
          } catch (const Error& e) {
            if (exit_code(e.code()) == 1) throw;
            p["error"] = e.what();
          }
          rows.push_back(row);
          points.push_back(std::move(p));
        }
      }
      emit(out, envelope(command, config, Json{{"rotation_set", to_json(poly)}, {"points", std::move(points)}}));
      if (!out.csv.empty()) write_text(out.csv, spectrum_csv(rows));
      if (!out.svg.empty()) write_text(out.svg, spectrum_svg(rows, svg_options(out)));
      return 0;
    }
    if (bex->parsed()) {
      command = "boundary-example";
      cfg.x_seq = [x_scale, x_ratio](int k) { return x_scale * std::pow(x_ratio, k); };
      config = Json{{"n_min", n_min},     {"n_max", n_max}, {"a", cfg.a},           {"lam_off", cfg.lam_off},
                    {"x_scale", x_scale}, {"x_ratio", x_ratio}, {"ell1", "sqrt"}, {"j_max", j_max},
                    {"max_K", max_K},     {"sweep", !no_sweep}};
      if (n_min < 1 || n_max < n_min) throw Error(ErrorCode::InvalidArgument, "need 1 <= n-min <= n-max");
      cfg.validate();
      Json levels = Json::array();
      for (int n = n_min; n <= n_max; ++n) {
        LowerCertificate lower = certify_lower(cfg, n, 1, max_K);
        LowerCertificate lower2 = certify_lower(cfg, n, 2, max_K);
        UpperWitness upper = certify_upper(cfg, n, !no_sweep, max_K);
        levels.push_back(Json{{"n", n},
                              {"eps_n", upper.eps},
                              {"K_n", upper.K},
                              {"h_l_certified", lower.h_l},
                              {"h_u_witness", upper.entropy},
                              {"gap", upper.entropy - lower.h_l},
                              {"lower", to_json(lower)},
                              {"lower_branch2", to_json(lower2)},
                              {"upper", to_json(upper)}});
      }
      Json exposed = Json::array();
      for (const auto& r : certify_exposed(cfg, n_max)) exposed.push_back(to_json(r));
      ExampleVertices V = example_vertices(cfg, j_max);
      Json result{{"levels", std::move(levels)},
                  {"exposed", std::move(exposed)},
                  {"vertices",
                   Json{{"w0", to_json(Eigen::VectorXd(V.w0))},
                        {"w_inf", to_json(Eigen::VectorXd(V.w_inf))},
                        {"j", V.j},
                        {"w1", to_json(Eigen::MatrixXd(V.w1))},
                        {"w2", to_json(Eigen::MatrixXd(V.w2))}}}};
      emit(out, envelope(command, config, std::move(result)));
      if (!out.svg.empty()) {
        const Eigen::Index n = V.w1.cols();
        Eigen::MatrixXd pts(2, 2 * n + 2);
        pts << V.w0, V.w_inf, V.w1, V.w2;
        RotationPolytope hull = convex_hull(pts);
        Eigen::Matrix2Xd ring = hull.vertices();
        write_text(out.svg, polygon_svg(ring, Eigen::Matrix2Xd(pts), {V.w_inf}, svg_options(out)));
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "rotent " << command << ": " << e.what() << "\n";
    Json err{{"code", to_string(e.code())}, {"message", e.what()}};
    if (auto cap = e.required_cap()) err["required_cap"] = *cap;
    try {
      emit(out, envelope(command, config, Json{{"error", err}}));
    } catch (const Error&) {
    }
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "rotent " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}
