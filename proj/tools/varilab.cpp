// Command-line front end: mesh generation, energy/curvature/density reports,
// Moebius inversion, the rigidity pipeline, Bochner grid checks, and the
// acceptance suite. Reports are JSON; per-vertex and per-radius tables are
// CSV. Exit codes: 0 ok, 2 invalid input, 3 numeric failure, 4 expected
// out-of-hypothesis abort.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "varilab/bochner.hpp"
#include "varilab/mesh_io.hpp"
#include "varilab/moebius.hpp"
#include "varilab/monotonicity.hpp"
#include "varilab/rigidity.hpp"
#include "varilab/suite.hpp"
#include "varilab/zoo.hpp"

using nlohmann::json;
using namespace varilab;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int thread_count_from_env() {
  const char* env = std::getenv("VARILAB_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

json value(double x, const char* units) { return json{{"value", x}, {"units", units}}; }

void emit_report(const std::string& path, const json& report) {
  if (path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream os(path);
    if (!os) throw Error(ErrorKind::IoError, "cannot write report to '" + path + "'");
    os << report.dump(2) << "\n";
  }
}

json provenance(const DiscreteVarifold* mesh, const Timer& timer) {
  json p;
  p["tool_version"] = kVersion;
  if (mesh) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(mesh_hash(*mesh)));
    p["mesh_hash"] = buf;
    p["vertices"] = mesh->num_vertices();
    p["faces"] = mesh->num_faces();
  }
  p["wall_time_s"] = timer.seconds();
  p["threads"] = thread_count_from_env();
  return p;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

Vec parse_point(const std::string& s, int dim) {
  auto xs = parse_list(s);
  if (static_cast<int>(xs.size()) != dim)
    throw Error(ErrorKind::ConfigError, "expected " + std::to_string(dim) + " coordinates");
  return Eigen::Map<Vec>(xs.data(), dim);
}

void write_curvature_csv(const DiscreteVarifold& v, const CurvatureField& f,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  os.precision(12);
  os << "vertex";
  for (int d = 0; d < v.ambient_dim; ++d) os << ",H" << d;
  os << ",Hnorm,K,area,valid\n";
  for (int i = 0; i < v.num_vertices(); ++i) {
    os << i;
    for (int d = 0; d < v.ambient_dim; ++d) os << "," << f.mean_curvature(i, d);
    os << "," << f.mean_curvature.row(i).norm() << "," << f.gauss_curvature(i) << ","
       << f.vertex_area(i) << "," << (f.valid[i] ? 1 : 0) << "\n";
  }
}

// Rescales the input's radial deviation from its mean sphere to a target
// rms amplitude; used by `rigidity --sweep` on near-sphere inputs.
DiscreteVarifold rescale_radial_deviation(const DiscreteVarifold& v, double eps) {
  Vec centroid = Vec::Zero(v.ambient_dim);
  for (int f = 0; f < v.num_faces(); ++f) {
    double w = v.multiplicity(f) * v.face_area(f) / (3.0 * v.total_measure);
    for (int c = 0; c < 3; ++c) centroid += w * Vec(v.vertices.row(v.faces(f, c)));
  }
  Vec radii(v.num_vertices());
  for (int i = 0; i < v.num_vertices(); ++i)
    radii(i) = (Vec(v.vertices.row(i)) - centroid).norm();
  double rbar = radii.mean();
  double rms = std::sqrt((radii.array() - rbar).square().mean()) / rbar;
  if (rms <= 0) throw Error(ErrorKind::ConfigError, "input is an exact sphere; cannot sweep");
  double factor = eps / rms;
  Mat V2 = v.vertices;
  for (int i = 0; i < v.num_vertices(); ++i) {
    Vec u = (Vec(v.vertices.row(i)) - centroid) / radii(i);
    V2.row(i) = (centroid + (rbar + factor * (radii(i) - rbar)) * u).transpose();
  }
  return build(std::move(V2), v.faces, v.multiplicity, v.ambient_dim);
}

json rigidity_report_json(const RigidityReport& rep) {
  json r;
  r["operation"] = "rigidity_metrics";
  r["delta"] = value(rep.delta, "dimensionless");
  r["sup_deviation"] = value(rep.sup_deviation, "length (unit-sphere frame)");
  r["conformal_log_range"] = {rep.conformal_log_range.first, rep.conformal_log_range.second};
  r["laplace_defect"] = value(rep.laplace_defect, "dimensionless (L2 squared)");
  r["w22_deviation"] = value(rep.w22_deviation, "dimensionless (squared)");
  r["coverage"] = value(rep.coverage, "fraction of 4 pi r^2");
  r["sphere"] = {{"radius", rep.sphere.radius},
                 {"center", std::vector<double>(rep.sphere.center.data(),
                                                rep.sphere.center.data() + rep.sphere.center.size())}};
  r["empirical_constants"] = rep.empirical_constants;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for multiplicity-weighted triangle varifolds"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags like --output may follow the subcommand

  std::string out_report;
  app.add_option("--output", out_report, "write the JSON report here (default: stdout)")
      ->capture_default_str();

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a zoo surface as mesh + sidecar");
  std::string gen_kind = "icosphere", gen_out = "mesh.off", gen_axes, gen_spec_file, gen_pole;
  ZooSpec spec;
  gen->add_option("--kind", gen_kind, "icosphere|perturbed_sphere|ellipsoid|torus|y_prism|double_bubble|multiplicity_sphere");
  gen->add_option("--subdiv", spec.subdivisions, "icosphere subdivision level");
  gen->add_option("--radius", spec.radius, "sphere radius");
  gen->add_option("--eps", spec.amplitude, "harmonic perturbation amplitude");
  gen->add_option("--l", spec.harmonic_l, "harmonic degree");
  gen->add_option("--m", spec.harmonic_m, "harmonic order");
  gen->add_option("--axes", gen_axes, "ellipsoid semi-axes a,b,c");
  gen->add_option("--R", spec.torus_R, "torus major radius");
  gen->add_option("--r", spec.torus_r, "torus minor radius");
  gen->add_option("--nu", spec.torus_nu, "torus tube resolution");
  gen->add_option("--nv", spec.torus_nv, "torus ring resolution");
  gen->add_option("--half-length", spec.half_length, "y_prism half-length along the junction");
  gen->add_option("--trunc", spec.truncation, "y_prism sheet truncation radius");
  gen->add_option("--base-edge", spec.base_edge, "y_prism grading seed edge length");
  gen->add_option("--pole", gen_pole, "double bubble inversion pole x,y,z");
  gen->add_option("--theta", spec.multiplicity, "multiplicity for multiplicity_sphere");
  gen->add_option("--spec", gen_spec_file, "read the full ZooSpec from a JSON file");
  gen->add_option("--out", gen_out, "output mesh path (.off or .obj)");

  // ---- energy ----
  auto* energy = app.add_subcommand("energy", "Willmore energy breakdown of a mesh");
  std::string in_path;
  energy->add_option("--input", in_path, "input mesh")->required();

  // ---- curvature ----
  auto* curv = app.add_subcommand("curvature", "per-vertex curvature field as CSV");
  std::string curv_csv = "curvature.csv";
  curv->add_option("--input", in_path, "input mesh")->required();
  curv->add_option("--csv", curv_csv, "output CSV path");

  // ---- density ----
  auto* dens = app.add_subcommand("density", "density profile about a point");
  int dens_vertex = -1;
  bool dens_liyau = false;
  std::string dens_center, dens_radii, dens_csv;
  dens->add_option("--input", in_path, "input mesh")->required();
  dens->add_option("--vertex", dens_vertex, "center on this vertex");
  dens->add_option("--center", dens_center, "center coordinates x,y,...");
  dens->add_option("--radii", dens_radii, "comma-separated radii (default: log schedule)");
  dens->add_option("--csv", dens_csv, "also dump radius,ratio,remainder CSV here");
  dens->add_flag("--li-yau", dens_liyau, "run the Li-Yau check instead of a single profile");

  // ---- invert ----
  auto* inv_cmd = app.add_subcommand("invert", "Moebius inversion about a point");
  int inv_vertex = -1;
  std::string inv_pole, inv_out;
  double inv_eta = -1.0;
  inv_cmd->add_option("--input", in_path, "input mesh")->required();
  inv_cmd->add_option("--vertex", inv_vertex, "pole on this vertex (runs identity checks)");
  inv_cmd->add_option("--pole", inv_pole, "pole coordinates x,y,...");
  inv_cmd->add_option("--eta", inv_eta, "excision radius (default: 2.5 local edges)");
  inv_cmd->add_option("--out", inv_out, "write the inverted mesh here");

  // ---- rigidity ----
  auto* rig = app.add_subcommand("rigidity", "comparison-sphere pipeline");
  std::string rig_sweep, rig_corr_csv, rig_sphere_out;
  rig->add_option("--input", in_path, "input mesh")->required();
  rig->add_option("--sweep", rig_sweep, "rescale the radial deviation to these rms amplitudes");
  rig->add_option("--dump-correspondence", rig_corr_csv, "CSV of (source vertex, q, p)");
  rig->add_option("--export-sphere", rig_sphere_out, "write the comparison sphere as a mesh");

  // ---- bochner ----
  auto* boch = app.add_subcommand("bochner", "conformal Bochner identity on a grid chart");
  std::string boch_chart = "stereographic", boch_csv;
  double boch_L = 2.0, boch_h = 1.0 / 32.0, boch_scale = 3.0;
  boch->add_option("--chart", boch_chart, "identity|scaled_plane|stereographic");
  boch->add_option("--L", boch_L, "half-width of the grid");
  boch->add_option("--spacing", boch_h, "grid spacing h");
  boch->add_option("--scale", boch_scale, "factor for the scaled_plane chart");
  boch->add_option("--dump-v", boch_csv, "CSV of x,y,v over interior nodes");

  // ---- suite ----
  auto* suite_cmd = app.add_subcommand("suite", "run the acceptance battery");
  bool suite_quick = false;
  std::string suite_filter;
  suite_cmd->add_flag("--quick", suite_quick, "reduced resolutions, smoke run");
  suite_cmd->add_option("--filter", suite_filter, "only criteria whose name contains this");

  int threads = thread_count_from_env();
  app.add_option("--threads", threads, "worker threads (results are thread-count independent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Timer timer;
  json report;
  report["config"] = json::object();
  for (int i = 1; i < argc; ++i) report["config"]["argv"].push_back(argv[i]);

  try {
    if (*gen) {
      if (!gen_spec_file.empty()) {
        std::ifstream is(gen_spec_file);
        if (!is) throw Error(ErrorKind::ConfigError, "cannot read spec '" + gen_spec_file + "'");
        spec = zoo_spec_from_json(json::parse(is));
      } else {
        spec.kind = zoo_kind_from_name(gen_kind);
        if (!gen_axes.empty()) {
          auto a = parse_list(gen_axes);
          if (a.size() != 3) throw Error(ErrorKind::ConfigError, "--axes needs a,b,c");
          for (int d = 0; d < 3; ++d) spec.semi_axes[d] = a[d];
        }
        if (!gen_pole.empty()) spec.pole = Eigen::Vector3d(parse_point(gen_pole, 3));
      }
      DiscreteVarifold v = generate(spec);
      save_mesh(v, gen_out);
      report["results"].push_back({{"operation", "generate"},
                                   {"kind", zoo_kind_name(spec.kind)},
                                   {"spec", zoo_spec_to_json(spec)},
                                   {"mesh", gen_out},
                                   {"total_mass", value(total_mass(v), "length^2")}});
      try {
        AnalyticReference ref = analytic_reference(spec);
        json jr;
        if (ref.mass) jr["mass"] = *ref.mass;
        if (ref.willmore) jr["willmore"] = *ref.willmore;
        if (ref.max_density) jr["max_density"] = *ref.max_density;
        if (ref.diameter) jr["diameter"] = *ref.diameter;
        report["results"].back()["analytic_reference"] = jr;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoReference) throw;
      }
      report["provenance"] = provenance(&v, timer);
    } else if (*energy) {
      DiscreteVarifold v = load_mesh(in_path);
      EnergyBreakdown e = willmore_energy(v);
      report["results"].push_back(
          {{"operation", "willmore_energy"},
           {"willmore", value(e.willmore, "dimensionless")},
           {"tracefree_sq_integral", value(e.tracefree_sq_integral, "dimensionless")},
           {"full_sff_sq_integral", value(e.full_sff_sq_integral, "dimensionless")},
           {"excluded_mass", value(e.excluded_mass, "length^2")},
           {"codim_heuristic", e.codim_heuristic},
           {"total_mass", value(total_mass(v), "length^2")},
           {"delta", value(std::sqrt(std::max(e.willmore - 4 * kPi, 0.0)), "dimensionless")}});
      report["provenance"] = provenance(&v, timer);
    } else if (*curv) {
      DiscreteVarifold v = load_mesh(in_path);
      CurvatureField f = mean_curvature(v);
      write_curvature_csv(v, f, curv_csv);
      report["results"].push_back({{"operation", "mean_curvature"}, {"csv", curv_csv}});
      report["provenance"] = provenance(&v, timer);
    } else if (*dens) {
      DiscreteVarifold v = load_mesh(in_path);
      if (dens_liyau) {
        MonotonicityReport rep = li_yau_check(v);
        report["results"].push_back(
            {{"operation", "li_yau_check"},
             {"willmore", value(rep.willmore, "dimensionless")},
             {"max_density_estimate", value(rep.max_density_estimate, "dimensionless")},
             {"argmax_vertex", rep.argmax_vertex},
             {"li_yau_slack", value(rep.li_yau_slack, "dimensionless")},
             {"diameter", value(rep.diameter_check.diam, "length")},
             {"diameter_lower_ok", rep.diameter_check.lower_ok},
             {"diameter_upper_constant",
              value(rep.diameter_check.upper_constant, "dimensionless")}});
        report["provenance"] = provenance(&v, timer);
        emit_report(out_report, report);
        return 0;
      }
      Vec center;
      if (dens_vertex >= 0) {
        if (dens_vertex >= v.num_vertices())
          throw Error(ErrorKind::InvalidIndex, "--vertex out of range");
        center = v.vertices.row(dens_vertex);
      } else if (!dens_center.empty()) {
        center = parse_point(dens_center, v.ambient_dim);
      } else {
        throw Error(ErrorKind::ConfigError, "density needs --vertex or --center");
      }
      std::vector<double> radii = dens_radii.empty()
                                      ? default_radius_schedule(v, diameter(v).value)
                                      : parse_list(dens_radii);
      CurvatureField f = mean_curvature(v);
      auto tangents = vertex_tangent_bases(v);
      DensityProfile prof = density_profile(v, center, radii, &f, &tangents);
      json jr{{"operation", "density_profile"},
              {"radii", prof.radii},
              {"ratios", prof.ratios},
              {"remainder", prof.remainder},
              {"limit_estimate", value(prof.limit_estimate, "dimensionless")},
              {"radius_warning", prof.radius_warning}};
      if (dens_vertex >= 0)
        jr["via_energy"] =
            value(density_at_point_via_energy(v, dens_vertex, f, tangents), "dimensionless");
      report["results"].push_back(jr);
      if (!dens_csv.empty()) {
        std::ofstream os(dens_csv);
        if (!os) throw Error(ErrorKind::IoError, "cannot write '" + dens_csv + "'");
        os.precision(12);
        os << "radius,ratio,remainder\n";
        for (std::size_t k = 0; k < prof.radii.size(); ++k)
          os << prof.radii[k] << "," << prof.ratios[k] << ","
             << (k < prof.remainder.size() ? prof.remainder[k] : 0.0) << "\n";
      }
      report["provenance"] = provenance(&v, timer);
    } else if (*inv_cmd) {
      DiscreteVarifold v = load_mesh(in_path);
      if (inv_vertex >= 0) {
        if (inv_vertex >= v.num_vertices())
          throw Error(ErrorKind::InvalidIndex, "--vertex out of range");
        double eta = inv_eta > 0 ? inv_eta : 2.5 * local_edge_length(v, inv_vertex);
        InversionIdentityReport rep = verify_inversion_identities(v, inv_vertex, eta);
        report["results"].push_back(
            {{"operation", "verify_inversion_identities"},
             {"lhs_energy", value(rep.lhs_energy, "dimensionless")},
             {"rhs_energy", value(rep.rhs_energy, "dimensionless")},
             {"energy_minus_density", value(rep.energy_minus_density, "dimensionless")},
             {"theta_infinity", value(rep.theta_infinity, "dimensionless")},
             {"theta_at_p", value(rep.theta_at_p, "dimensionless")},
             {"excised_mass", value(rep.excised_mass, "length^2")}});
        if (!inv_out.empty()) {
          Vec p = v.vertices.row(inv_vertex);
          save_mesh(invert(v, p, eta).image, inv_out);
          report["results"].back()["image_mesh"] = inv_out;
        }
      } else if (!inv_pole.empty()) {
        Vec p = parse_point(inv_pole, v.ambient_dim);
        double eta = inv_eta >= 0 ? inv_eta : 0.0;
        InversionResult res = invert(v, p, eta);
        if (!inv_out.empty()) save_mesh(res.image, inv_out);
        report["results"].push_back({{"operation", "invert"},
                                     {"excised_mass", value(res.excised_mass, "length^2")},
                                     {"image_mass", value(total_mass(res.image), "length^2")},
                                     {"image_mesh", inv_out}});
      } else {
        throw Error(ErrorKind::ConfigError, "invert needs --vertex or --pole");
      }
      report["provenance"] = provenance(&v, timer);
    } else if (*rig) {
      DiscreteVarifold v = load_mesh(in_path);
      if (!rig_sweep.empty()) {
        json table = json::array();
        for (double eps : parse_list(rig_sweep)) {
          RigidityReport rep = run_rigidity_pipeline(rescale_radial_deviation(v, eps));
          json row = rigidity_report_json(rep);
          row["rms_amplitude"] = eps;
          table.push_back(row);
        }
        report["results"].push_back({{"operation", "rigidity_sweep"}, {"table", table}});
      } else {
        RigidityReport rep = run_rigidity_pipeline(v);
        report["results"].push_back(rigidity_report_json(rep));
        if (!rig_sphere_out.empty()) {
          if (v.ambient_dim != 3)
            throw Error(ErrorKind::ConfigError, "sphere export needs ambient dim 3");
          ZooSpec ss;
          ss.subdivisions = 4;
          ss.radius = rep.sphere.radius;
          DiscreteVarifold sm = generate(ss);
          Mat V2 = sm.vertices;
          V2.rowwise() += Eigen::RowVector3d(rep.sphere.center(0), rep.sphere.center(1),
                                             rep.sphere.center(2));
          save_mesh(build(std::move(V2), sm.faces, sm.multiplicity, 3), rig_sphere_out);
          report["results"].back()["sphere_mesh"] = rig_sphere_out;
        }
        if (!rig_corr_csv.empty()) {
          std::ofstream os(rig_corr_csv);
          if (!os) throw Error(ErrorKind::IoError, "cannot write '" + rig_corr_csv + "'");
          os.precision(12);
          os << "source_vertex";
          for (int d = 0; d < v.ambient_dim; ++d) os << ",q" << d;
          for (int d = 0; d < v.ambient_dim; ++d) os << ",p" << d;
          os << "\n";
          const auto& corr = rep.correspondence;
          for (int i = 0; i < corr.sphere_points.rows(); ++i) {
            os << corr.source_vertex[i];
            for (int d = 0; d < v.ambient_dim; ++d) os << "," << corr.sphere_points(i, d);
            for (int d = 0; d < v.ambient_dim; ++d) os << "," << corr.surface_points(i, d);
            os << "\n";
          }
        }
      }
      report["provenance"] = provenance(&v, timer);
    } else if (*boch) {
      GridImmersion g;
      if (boch_chart == "identity")
        g = identity_chart(boch_L, boch_h);
      else if (boch_chart == "scaled_plane")
        g = scaled_plane_chart(boch_L, boch_h, boch_scale);
      else if (boch_chart == "stereographic")
        g = stereographic_chart(boch_L, boch_h);
      else
        throw Error(ErrorKind::ConfigError, "unknown chart '" + boch_chart + "'");
      BochnerReport rep = bochner_liouville(g);
      report["results"].push_back(
          {{"operation", "bochner_liouville"},
           {"residual_l1", value(rep.residual_l1, "dimensionless")},
           {"conformal_defect", value(rep.conformal_defect, "dimensionless")},
           {"conformal_warning", rep.conformal_warning},
           {"v_infinity_estimate", value(rep.v_infinity_estimate, "dimensionless")},
           {"liouville_spread", value(rep.liouville_spread, "dimensionless")},
           {"max_rhs", value(rep.max_rhs, "1/length^2")}});
      if (!boch_csv.empty()) {
        auto st = bochner_detail::stencils(g);
        std::ofstream os(boch_csv);
        if (!os) throw Error(ErrorKind::IoError, "cannot write '" + boch_csv + "'");
        os.precision(12);
        os << "x,y,v\n";
        for (int i = 1; i + 1 < g.nodes; ++i)
          for (int j = 1; j + 1 < g.nodes; ++j)
            os << g.x(i) << "," << g.y(j) << "," << st.v(i, j) << "\n";
      }
      report["provenance"] = provenance(nullptr, timer);
    } else if (*suite_cmd) {
      SuiteOptions opt;
      opt.quick = suite_quick;
      opt.filter = suite_filter;
      auto results = run_acceptance_suite(opt);
      bool all = true;
      json table = json::array();
      for (const auto& r : results) {
        std::printf("[%s] %2d %-28s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.seconds);
        std::fputs(r.detail.c_str(), stdout);
        all = all && r.pass;
        table.push_back({{"id", r.id},
                         {"name", r.name},
                         {"pass", r.pass},
                         {"detail", r.detail},
                         {"seconds", r.seconds}});
      }
      report["results"].push_back({{"operation", "suite"}, {"criteria", table}, {"pass", all}});
      report["provenance"] = provenance(nullptr, timer);
      if (!out_report.empty()) emit_report(out_report, report);
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    json err{{"error", error_kind_name(e.kind())},
             {"message", e.what()},
             {"exit_code", exit_code_for(e.kind())}};
    std::cerr << err.dump() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    json err{{"error", "NumericFailure"}, {"message", e.what()}, {"exit_code", 3}};
    std::cerr << err.dump() << "\n";
    return 3;
  }

  emit_report(out_report, report);
  return 0;
}
