#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "varilab/bochner.hpp"
#include "varilab/curvature.hpp"
#include "varilab/moebius.hpp"
#include "varilab/monotonicity.hpp"
#include "varilab/rigidity.hpp"
#include "varilab/zoo.hpp"

// The verification battery. Each criterion checks one quantitative anchor at
// a tolerance fixed here; runtimes are part of the pass condition in full
// mode. `quick` trims resolutions for a smoke run.

namespace varilab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace suite_detail {

struct Check {
  std::ostringstream log;
  bool ok = true;
  void expect(bool cond, const std::string& what) {
    if (!cond) ok = false;
    log << (cond ? "  ok: " : "  FAIL: ") << what << "\n";
  }
  template <typename... Args>
  void expectf(bool cond, const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    expect(cond, buf);
  }
};

inline DiscreteVarifold icosphere(int subdiv, double radius = 1.0) {
  ZooSpec s;
  s.kind = ZooKind::Icosphere;
  s.subdivisions = subdiv;
  s.radius = radius;
  return generate(s);
}

inline DiscreteVarifold perturbed_sphere(int subdiv, double eps) {
  ZooSpec s;
  s.kind = ZooKind::PerturbedSphere;
  s.subdivisions = subdiv;
  s.amplitude = eps;
  return generate(s);
}

inline DiscreteVarifold double_bubble(double trunc, double base_edge = 0.05) {
  ZooSpec s;
  s.kind = ZooKind::DoubleBubble;
  s.half_length = trunc;
  s.truncation = trunc;
  s.base_edge = base_edge;
  return generate(s);
}

inline int bubble_junction_vertex(const DiscreteVarifold& bubble) {
  int best = -1;
  double bestn = std::numeric_limits<double>::infinity();
  for (int i = 0; i < bubble.num_vertices(); ++i) {
    if (bubble.tags[i] != VertexTag::Junction) continue;
    double n = Vec(bubble.vertices.row(i)).norm();
    if (n < bestn) {
      bestn = n;
      best = i;
    }
  }
  return best;
}

}  // namespace suite_detail

// 1. Round-sphere energy: W(icosphere) = 4pi within 0.5% at the finest level,
//    observed convergence order >= 1.5 across three levels.
inline CriterionResult criterion_sphere_energy(bool quick) {
  using namespace suite_detail;
  Check c;
  const int top = quick ? 4 : 5;
  std::vector<double> errs;
  double wtop = 0.0;
  for (int s = top - 2; s <= top; ++s) {
    double w = willmore_energy(icosphere(s)).willmore;
    errs.push_back(std::abs(w - 4.0 * kPi));
    if (s == top) wtop = w;
  }
  double rel = std::abs(wtop - 4.0 * kPi) / (4.0 * kPi);
  double order = 0.5 * std::log2(errs[0] / errs[2]);
  c.expectf(rel <= 5e-3, "W(subdiv %d) = 4pi within 0.5%% (rel %.2e)", top, rel);
  c.expectf(order >= 1.5, "convergence order %.2f >= 1.5", order);
  CriterionResult r{1, "round-sphere energy", c.ok, c.log.str(), 0.0};
  return r;
}

// 2. Scale / rigid-motion / multiplicity invariance of the energy at 1e-10.
inline CriterionResult criterion_invariances(bool quick) {
  using namespace suite_detail;
  Check c;
  DiscreteVarifold base = icosphere(quick ? 3 : 4);
  double w0 = willmore_energy(base).willmore;
  for (double lam : {0.5, 3.0}) {
    Mat V = base.vertices * lam;
    double w = willmore_energy(build(std::move(V), base.faces, base.multiplicity, 3)).willmore;
    c.expectf(std::abs(w - w0) <= 1e-10 * w0, "scale %.1f invariance (rel %.2e)", lam,
              std::abs(w - w0) / w0);
  }
  Mat Q = random_rotation(3, 42);
  Mat V = base.vertices * Q.transpose();
  V.rowwise() += Eigen::RowVector3d(0.3, -0.2, 0.7);
  double wr = willmore_energy(build(std::move(V), base.faces, base.multiplicity, 3)).willmore;
  c.expectf(std::abs(wr - w0) <= 1e-10 * w0, "rigid motion invariance (rel %.2e)",
            std::abs(wr - w0) / w0);
  double w2 =
      willmore_energy(build(base.vertices, base.faces,
                            Eigen::VectorXi::Constant(base.num_faces(), 2), 3))
          .willmore;
  c.expectf(std::abs(w2 - 2.0 * w0) <= 1e-10 * 2.0 * w0, "theta=2 doubles energy (rel %.2e)",
            std::abs(w2 - 2.0 * w0) / (2.0 * w0));
  return {2, "energy invariances", c.ok, c.log.str(), 0.0};
}

// 3. Li-Yau W >= 4pi Theta_max on sphere, theta=2 sphere, double bubble.
inline CriterionResult criterion_li_yau(bool quick) {
  using namespace suite_detail;
  Check c;
  int sub = quick ? 3 : 4;
  auto check_surface = [&](const DiscreteVarifold& v, const char* name) -> MonotonicityReport {
    MonotonicityReport rep = li_yau_check(v);
    c.expectf(rep.li_yau_slack >= -0.03 * rep.willmore, "%s slack %.4f >= -3%% of W=%.4f", name,
              rep.li_yau_slack, rep.willmore);
    return rep;
  };
  check_surface(icosphere(sub), "sphere");
  {
    ZooSpec s;
    s.kind = ZooKind::MultiplicitySphere;
    s.subdivisions = sub;
    s.multiplicity = 2;
    MonotonicityReport rep = check_surface(generate(s), "theta=2 sphere");
    c.expectf(std::abs(rep.willmore - 8.0 * kPi) <= 0.01 * 8.0 * kPi,
              "theta=2 sphere W = 8pi within 1%% (W=%.5f)", rep.willmore);
    c.expectf(std::abs(rep.max_density_estimate - 2.0) <= 0.05 * 2.0,
              "theta=2 sphere max density = 2 within 5%% (%.4f)", rep.max_density_estimate);
  }
  {
    MonotonicityReport rep = check_surface(double_bubble(quick ? 10.0 : 20.0), "double bubble");
    c.expectf(std::abs(rep.max_density_estimate - 1.5) <= 0.1 * 1.5,
              "double bubble max density near 3/2 (%.4f)", rep.max_density_estimate);
  }
  return {3, "Li-Yau bound", c.ok, c.log.str(), 0.0};
}

// 4. Inversion identities on the eps = 0.05 perturbed sphere.
inline CriterionResult criterion_inversion_identities(bool quick) {
  using namespace suite_detail;
  Check c;
  DiscreteVarifold v = perturbed_sphere(quick ? 4 : 5, 0.05);
  int pole = 0;
  double eta = 2.5 * local_edge_length(v, pole);
  InversionIdentityReport rep = verify_inversion_identities(v, pole, eta);
  double scale = std::max(rep.lhs_energy, rep.rhs_energy);
  c.expectf(std::abs(rep.lhs_energy - rep.rhs_energy) <= 0.05 * scale,
            "energy routes agree within 5%% (lhs %.5f, rhs %.5f)", rep.lhs_energy,
            rep.rhs_energy);
  c.expectf(std::abs(rep.theta_infinity - rep.theta_at_p) <= 0.05 * rep.theta_at_p,
            "Theta(inf) %.4f matches Theta(p) %.4f within 5%%", rep.theta_infinity,
            rep.theta_at_p);
  // double inversion about an off-mesh point restores positions
  Vec p_off = Vec::Zero(3);
  p_off(0) = 3.0;
  InversionResult i1 = invert(v, p_off, 0.0);
  InversionResult i2 = invert(i1.image, p_off, 0.0);
  double worst = 0.0;
  for (int i = 0; i < i2.image.num_vertices(); ++i) {
    int s = i1.source_vertex[i2.source_vertex[i]];
    Vec orig = v.vertices.row(s);
    worst = std::max(worst,
                     (Vec(i2.image.vertices.row(i)) - orig).norm() / (1.0 + orig.norm()));
  }
  c.expectf(worst <= 1e-12, "double inversion restores positions (max rel %.2e)", worst);
  return {4, "inversion identities", c.ok, c.log.str(), 0.0};
}

// 5. Double bubble: truncated energies extrapolate to 6pi, junction density 3/2.
inline CriterionResult criterion_double_bubble(bool quick) {
  using namespace suite_detail;
  Check c;
  std::vector<double> Ts = quick ? std::vector<double>{5, 10, 20} : std::vector<double>{10, 20, 40};
  Vec pole(3);
  pole << std::cos(kPi / 6.0), std::sin(kPi / 6.0), 0.0;
  Mat X(3, 2);
  Vec y(3);
  for (int k = 0; k < 3; ++k) {
    ZooSpec s;
    s.kind = ZooKind::YPrism;
    s.half_length = Ts[k];
    s.truncation = Ts[k];
    DiscreteVarifold prism = generate(s);
    CurvatureField field = mean_curvature(prism);
    double e = transformed_energy_face_quadrature(prism, field, pole);
    X(k, 0) = 1.0;
    X(k, 1) = 1.0 / Ts[k];
    y(k) = e;
    c.log << "  E(T=" << Ts[k] << ") = " << e << "\n";
  }
  Vec coef = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  double einf = coef(0);
  c.expectf(std::abs(einf - 6.0 * kPi) <= 0.02 * 6.0 * kPi,
            "extrapolated energy %.5f = 6pi within 2%%", einf);

  DiscreteVarifold bubble = double_bubble(quick ? 10.0 : 20.0);
  int jv = bubble_junction_vertex(bubble);
  c.expect(jv >= 0, "bubble carries junction tags");
  if (jv >= 0) {
    double r0 = 3.0 * local_edge_length(bubble, jv);
    std::vector<double> radii;
    for (int i = 0; i < 6; ++i) radii.push_back(r0 * std::pow(0.35 / r0, i / 5.0));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    DensityProfile prof = density_profile(bubble, bubble.vertices.row(jv), radii);
    c.expectf(std::abs(prof.limit_estimate - 1.5) <= 0.05 * 1.5,
              "junction density %.4f = 3/2 within 5%%", prof.limit_estimate);
  }
  return {5, "double bubble 6pi", c.ok, c.log.str(), 0.0};
}

// 6. Torus threshold: mesh energy of the sqrt(2)-torus vs the 1D oracle = 2pi^2.
inline CriterionResult criterion_torus(bool quick) {
  suite_detail::Check c;
  ZooSpec s;
  s.kind = ZooKind::Torus;
  if (quick) {
    s.torus_nu = 48;
    s.torus_nv = 116;
  }
  double oracle = torus_willmore_oracle(s.torus_R, s.torus_r);
  c.expectf(std::abs(oracle - 2.0 * kPi * kPi) <= 1e-8,
            "oracle reproduces 2pi^2 (%.10f)", oracle);
  double w = willmore_energy(generate(s)).willmore;
  c.expectf(std::abs(w - oracle) <= 0.01 * oracle, "mesh energy %.5f within 1%% of oracle %.5f",
            w, oracle);
  return {6, "sqrt2-torus threshold", c.ok, c.log.str(), 0.0};
}

// 7. Rigidity scaling across the (2,0) harmonic sweep + exact-sphere floor.
inline CriterionResult criterion_rigidity_scaling(bool quick) {
  using namespace suite_detail;
  Check c;
  std::vector<double> epss = quick ? std::vector<double>{0.05, 0.1}
                                   : std::vector<double>{0.025, 0.05, 0.1};
  int sweep_sub = quick ? 5 : 6;
  std::vector<double> r_sup, r_log, r_lap;
  for (double eps : epss) {
    RigidityReport rep = run_rigidity_pipeline(perturbed_sphere(sweep_sub, eps));
    c.expectf(rep.delta > 0, "eps=%.3f has positive delta (%.4f)", eps, rep.delta);
    if (rep.delta <= 0) continue;
    r_sup.push_back(rep.sup_deviation / rep.delta);
    r_log.push_back(std::max(std::abs(rep.conformal_log_range.first),
                             std::abs(rep.conformal_log_range.second)) /
                    rep.delta);
    r_lap.push_back(std::sqrt(rep.laplace_defect) / rep.delta);
    c.log << "  eps=" << eps << ": delta=" << rep.delta << " sup/d=" << r_sup.back()
          << " log/d=" << r_log.back() << " sqrt(lap)/d=" << r_lap.back() << "\n";
  }
  auto stable = [&](const std::vector<double>& r, const char* name) {
    if (r.size() < 2) {
      c.expect(false, std::string(name) + " ratio list incomplete");
      return;
    }
    double lo = *std::min_element(r.begin(), r.end());
    double hi = *std::max_element(r.begin(), r.end());
    c.expectf(hi / lo < 2.0, "%s ratio stable within factor 2 (spread %.3f)", name, hi / lo);
  };
  stable(r_sup, "sup|Phi-q|/delta");
  stable(r_log, "max|logconf|/delta");
  stable(r_lap, "sqrt(lap defect)/delta");

  RigidityReport sphere = run_rigidity_pipeline(icosphere(quick ? 4 : 5));
  c.expectf(sphere.sup_deviation <= 1e-3, "exact sphere sup deviation %.2e <= 1e-3",
            sphere.sup_deviation);
  double maxlog = std::max(std::abs(sphere.conformal_log_range.first),
                           std::abs(sphere.conformal_log_range.second));
  c.expectf(maxlog <= 1e-3, "exact sphere log conformal %.2e <= 1e-3", maxlog);
  c.expectf(sphere.laplace_defect <= 1e-3, "exact sphere laplace defect %.2e <= 1e-3",
            sphere.laplace_defect);
  c.expectf(sphere.w22_deviation <= 1e-3, "exact sphere W22 deviation %.2e <= 1e-3",
            sphere.w22_deviation);
  return {7, "rigidity delta-scaling", c.ok, c.log.str(), 0.0};
}

// 8. Out-of-hypothesis gate: the double bubble must abort, never report.
inline CriterionResult criterion_bubble_abort(bool quick) {
  using namespace suite_detail;
  Check c;
  DiscreteVarifold bubble = double_bubble(quick ? 10.0 : 20.0, 0.08);
  try {
    RigidityReport rep = run_rigidity_pipeline(bubble);
    c.expectf(false, "pipeline produced a report (sup deviation %.3f) instead of aborting",
              rep.sup_deviation);
  } catch (const Error& e) {
    c.expectf(exit_code_for(e.kind()) == 4, "pipeline aborts with code-4 kind (%s)",
              error_kind_name(e.kind()));
  }
  return {8, "out-of-hypothesis abort", c.ok, c.log.str(), 0.0};
}

// 9. Bochner identity: order-2 residual, exact flat cases, Liouville spread.
inline CriterionResult criterion_bochner(bool quick) {
  suite_detail::Check c;
  double h1 = quick ? 1.0 / 16 : 1.0 / 32;
  double h2 = quick ? 1.0 / 32 : 1.0 / 64;
  double r1 = bochner_residual(stereographic_chart(2.0, h1)).residual_l1;
  double r2 = bochner_residual(stereographic_chart(2.0, h2)).residual_l1;
  c.expectf(r1 / r2 >= 3.5, "halving h reduces residual by %.2f >= 3.5", r1 / r2);
  double ri = bochner_residual(identity_chart(1.0, 1.0 / 32)).residual_l1;
  double rs = bochner_residual(scaled_plane_chart(1.0, 1.0 / 32, 3.0)).residual_l1;
  c.expectf(ri <= 1e-12, "identity chart residual %.2e <= 1e-12", ri);
  c.expectf(rs <= 1e-12, "scaled plane residual %.2e <= 1e-12", rs);
  BochnerReport rep = bochner_liouville(stereographic_chart(2.0, h1));
  double bound = 5.0 * h1 * h1 * rep.max_rhs;
  c.expectf(rep.liouville_spread <= bound, "liouville spread %.4f <= 5h^2 max|rhs| = %.4f",
            rep.liouville_spread, bound);
  return {9, "Bochner identity", c.ok, c.log.str(), 0.0};
}

// 10. Diameter bounds under the 32pi hypothesis; theta=2 sphere must raise.
inline CriterionResult criterion_diameter_bounds(bool quick) {
  using namespace suite_detail;
  Check c;
  int sub = quick ? 3 : 4;
  auto lower = [&](const DiscreteVarifold& v, const char* name) {
    try {
      DiameterCheck chk = diameter_bounds_check(v);
      c.expectf(chk.lower_ok, "%s satisfies diam >= (1/7) sqrt(mu/4pi) (diam %.3f)", name,
                chk.diam);
    } catch (const Error& e) {
      c.expect(false, std::string(name) + " unexpectedly raised " + error_kind_name(e.kind()));
    }
  };
  lower(icosphere(sub), "sphere");
  lower(perturbed_sphere(sub, 0.05), "perturbed sphere");
  {
    ZooSpec s;
    s.kind = ZooKind::Ellipsoid;
    s.subdivisions = sub;
    s.semi_axes[2] = 2.0;
    lower(generate(s), "ellipsoid(1,1,2)");
  }
  {
    ZooSpec s;
    s.kind = ZooKind::Torus;
    s.torus_nu = 48;
    s.torus_nv = 116;
    lower(generate(s), "sqrt2 torus");
  }
  lower(double_bubble(quick ? 10.0 : 20.0, 0.08), "double bubble");
  {
    ZooSpec s;
    s.kind = ZooKind::MultiplicitySphere;
    s.subdivisions = sub;
    s.multiplicity = 2;
    try {
      diameter_bounds_check(generate(s));
      c.expect(false, "theta=2 sphere failed to raise HypothesisViolated");
    } catch (const Error& e) {
      c.expect(e.kind() == ErrorKind::HypothesisViolated,
               std::string("theta=2 sphere raises HypothesisViolated (got ") +
                   error_kind_name(e.kind()) + ")");
    }
  }
  return {10, "diameter bounds", c.ok, c.log.str(), 0.0};
}

struct SuiteOptions {
  bool quick = false;
  std::string filter;  // substring on criterion name; empty = all
};

inline std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& opt = {}) {
  using Fn = std::function<CriterionResult(bool)>;
  // runtime budgets (seconds) enforced in full mode
  struct Entry {
    int id;
    const char* name;
    Fn fn;
    double budget;
  };
  std::vector<Entry> entries = {
      {1, "round-sphere energy", criterion_sphere_energy, 10.0},
      {2, "energy invariances", criterion_invariances, 10.0},
      {3, "Li-Yau bound", criterion_li_yau, 120.0},
      {4, "inversion identities", criterion_inversion_identities, 30.0},
      {5, "double bubble 6pi", criterion_double_bubble, 60.0},
      {6, "sqrt2-torus threshold", criterion_torus, 30.0},
      {7, "rigidity delta-scaling", criterion_rigidity_scaling, 180.0},
      {8, "out-of-hypothesis abort", criterion_bubble_abort, 60.0},
      {9, "Bochner identity", criterion_bochner, 30.0},
      {10, "diameter bounds", criterion_diameter_bounds, 120.0},
  };
  std::vector<CriterionResult> out;
  for (auto& e : entries) {
    if (!opt.filter.empty() && std::string(e.name).find(opt.filter) == std::string::npos)
      continue;
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = e.fn(opt.quick);
    } catch (const std::exception& ex) {
      r.id = e.id;
      r.name = e.name;
      r.pass = false;
      r.detail = std::string("  FAIL: unhandled error: ") + ex.what() + "\n";
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!opt.quick && r.seconds > e.budget) {
      r.pass = false;
      r.detail += "  FAIL: runtime " + std::to_string(r.seconds) + "s over budget " +
                  std::to_string(e.budget) + "s\n";
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace varilab
