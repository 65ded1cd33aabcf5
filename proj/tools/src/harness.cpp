#include "coupled_tools/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

namespace coupled::tools {

using nlohmann::json;

namespace {

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

SolverConfig parse_solver(const json& j) {
  SolverConfig sc;
  sc.use_theorem1 = j.value("use_theorem1", true);
  sc.tau = opt<double>(j, "tau");
  sc.eta = opt<double>(j, "eta");
  sc.theta = opt<double>(j, "theta");
  sc.alpha = opt<double>(j, "alpha");
  sc.limits.max_iters = j.value("max_iters", sc.limits.max_iters);
  sc.limits.tol_x = j.value("tol_x", sc.limits.tol_x);
  sc.limits.tol_feas = j.value("tol_feas", sc.limits.tol_feas);
  sc.target_rel_err = opt<double>(j, "target_rel_err");
  return sc;
}

SweepConfig parse_sweep(const json& j) {
  SweepConfig s;
  s.param = j.at("param").get<std::string>();
  if (s.param != "kappa_f" && s.param != "kappa_A" && s.param != "path_n")
    throw UsageError("sweep.param must be kappa_f, kappa_A or path_n");
  s.values = j.at("values").get<std::vector<double>>();
  if (s.values.empty()) throw UsageError("sweep.values is empty");
  s.n = j.value("n", s.n);
  s.d = j.value("d", s.d);
  s.kappa_f = j.value("kappa_f", s.kappa_f);
  s.kappa_A = j.value("kappa_A", s.kappa_A);
  s.topology = j.value("topology", s.topology);
  s.target_rel_err = j.value("target_rel_err", s.target_rel_err);
  s.max_iters = j.value("max_iters", s.max_iters);
  return s;
}

Graph graph_from_spec(const json& spec, std::size_t n, std::uint64_t seed) {
  const json g = spec.value("graph", json::object());
  const auto topo = parse_topology(g.value("topology", std::string("path")));
  return make_graph(topo, n, opt<double>(g, "edge_prob"), g.value("seed", seed));
}

Vector vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    RunConfig cfg;
    if (doc.contains("instance")) {
      const json& inst = doc.at("instance");
      if (inst.is_string()) {
        cfg.instance_path = inst.get<std::string>();
      } else if (inst.is_object()) {
        cfg.generator_json = inst.dump();
      } else {
        throw UsageError("instance must be a path or a generator object");
      }
    }
    if (doc.contains("solver")) cfg.solver = parse_solver(doc.at("solver"));
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.output = opt<std::string>(doc, "output");
    const std::string ref = doc.value("reference", std::string("kkt"));
    if (ref != "kkt" && ref != "none") throw UsageError("reference must be kkt or none");
    cfg.reference_kkt = ref == "kkt";
    if (doc.contains("sweep")) cfg.sweep = parse_sweep(doc.at("sweep"));
    if (doc.contains("faults")) {
      const json& f = doc.at("faults");
      cfg.faults.perturb_W = f.value("perturb_W", false);
      cfg.faults.theta_scale = f.value("theta_scale", 1.0);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

ProblemInstance build_instance(const RunConfig& cfg) {
  if (cfg.instance_path && cfg.generator_json)
    throw UsageError("give either an instance path or a generator spec, not both");
  if (cfg.instance_path) {
    try {
      return load_instance(*cfg.instance_path);
    } catch (const InvalidParam& e) {
      throw UsageError(e.what());
    }
  }
  if (!cfg.generator_json) throw UsageError("config has no instance");
  const json spec = json::parse(*cfg.generator_json);
  try {
    const std::string kind = spec.at("kind").get<std::string>();
    const std::uint64_t seed = spec.value("seed", cfg.seed);
    if (kind == "synthetic") {
      const std::size_t n = spec.value("n", std::size_t{20});
      return gen_synthetic_regression(n, spec.value("d", Eigen::Index{3}),
                                      spec.value("m", Eigen::Index{10}),
                                      spec.value("theta", 1e-3),
                                      graph_from_spec(spec, n, seed), seed);
    }
    if (kind == "resource") {
      const std::size_t n = spec.value("n", std::size_t{2});
      const Eigen::Index d = spec.value("d", Eigen::Index{1});
      std::vector<Vector> centers;
      if (spec.contains("centers")) {
        for (const auto& c : spec.at("centers")) centers.push_back(vec_from(c));
      } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        for (std::size_t i = 0; i < n; ++i) {
          Vector c(d);
          for (Eigen::Index k = 0; k < d; ++k) c[k] = normal(rng);
          centers.push_back(c);
        }
      }
      const Vector budget = spec.contains("budget") ? vec_from(spec.at("budget"))
                                                    : Vector::Ones(d);
      return gen_resource_allocation(n, d, centers, budget, graph_from_spec(spec, n, seed));
    }
    if (kind == "vfl") {
      const auto path = spec.at("libsvm").get<std::string>();
      SparseExamples ex;
      try {
        ex = read_libsvm_file(path, opt<std::size_t>(spec, "rows"));
      } catch (const InvalidParam& e) {
        throw UsageError(e.what());
      }
      const std::size_t n = spec.value("n", std::size_t{7});
      std::vector<std::size_t> split;
      if (spec.contains("split")) {
        split = spec.at("split").get<std::vector<std::size_t>>();
      } else {
        for (std::size_t i = 0; i < n; ++i)
          split.push_back(ex.num_features / n + (i < ex.num_features % n ? 1 : 0));
      }
      return gen_vfl(ex, spec.value("lambda", 1e-2), graph_from_spec(spec, n, seed), split);
    }
    if (kind == "lowerbound") {
      return gen_lower_bound_instance(spec.value("n", std::size_t{6}), spec.value("L_f", 2.0),
                                      spec.value("mu_f", 1.0), spec.value("L_A", 2.0),
                                      spec.value("mu_A", 1.0), spec.value("dim", std::size_t{8}));
    }
    if (kind == "conditioned") {
      const std::size_t n = spec.value("n", std::size_t{6});
      return gen_conditioned_quadratic(n, spec.value("d", Eigen::Index{3}),
                                       spec.value("kappa_f", 10.0), spec.value("kappa_A", 4.0),
                                       graph_from_spec(spec, n, seed), seed);
    }
    throw UsageError("unknown generator kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed generator spec: ") + e.what());
  }
}

Prepared prepare(const ProblemInstance& inst, const SolverConfig& sc) {
  Prepared p;
  p.gossip = laplacian_gossip(inst.graph());
  p.dc = derived_constants(inst);
  p.params = sc.use_theorem1 ? theorem1_params(inst.L_f(), inst.mu_f(), sc.limits, p.dc)
                             : proposition1_params(sc.limits, p.dc);
  if (sc.tau) p.params.tau = *sc.tau;
  if (sc.eta) p.params.eta = *sc.eta;
  if (sc.theta) p.params.theta = *sc.theta;
  if (sc.alpha) p.params.alpha = *sc.alpha;
  p.params.target_rel_err = sc.target_rel_err;
  p.n_B = b_schedule(p.dc).degree;
  p.n_W = wprime_schedule(p.gossip).degree;
  return p;
}

std::string spectral_summary(const ProblemInstance& inst) {
  const ConstraintSpectrum cs = constraint_spectrum(inst);
  const GossipMatrix gm = laplacian_gossip(inst.graph());
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "L_f=%.6g mu_f=%.6g kappa_f=%.6g L_A=%.6g mu_A=%.6g kappa_A=%.6g kappa_W=%.6g",
                inst.L_f(), inst.mu_f(), inst.L_f() / inst.mu_f(), cs.L_A, cs.mu_A, cs.kappa_A,
                gm.kappa_W);
  return buf;
}

double SolveReport::rel_err() const {
  const auto& recs = result.trace.records;
  if (!reference || recs.empty() || !recs.front().dist_to_opt)
    return std::numeric_limits<double>::quiet_NaN();
  const double d0 = *recs.front().dist_to_opt;
  return d0 > 0.0 ? *recs.back().dist_to_opt / d0 : 0.0;
}

SolveReport run_solve(const ProblemInstance& inst, const RunConfig& cfg) {
  SolveReport rep;
  rep.prep = prepare(inst, cfg.solver);
  rep.prep.params.theta *= cfg.faults.theta_scale;
  if (cfg.reference_kkt && inst.all_quadratic()) rep.reference = kkt_oracle(inst);
  SimNet net(inst.graph(), rep.prep.gossip);
  std::optional<Vector> ref;
  if (rep.reference) ref = rep.reference->x_star;
  rep.result = solve(inst, rep.prep.params, net, ref);
  return rep;
}

LiftedVector lifted_from_stacked(const Vector& v, const ProblemInstance& inst) {
  const Eigen::Index d = inst.total_dim();
  const Eigen::Index m = inst.m();
  const auto n = static_cast<Eigen::Index>(inst.n());
  if (v.size() != d + m * n) throw ShapeMismatch("stacked vector has the wrong size");
  return {v.head(d), Eigen::Map<const Matrix>(v.data() + d, m, n)};
}

Matrix operator_wprime(const GossipMatrix& gossip, const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  SimNet net(g, gossip);
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix e = Matrix::Zero(1, n);
    e(0, j) = 1.0;
    out.col(j) = mul_wprime(e, net).row(0).transpose();
  }
  return out;
}

Matrix operator_pb(const ProblemInstance& inst, const DerivedConstants& dc,
                   const GossipMatrix& gossip) {
  SimNet net(inst.graph(), gossip);
  const Eigen::Index dim = inst.total_dim() + static_cast<Eigen::Index>(inst.n()) * inst.m();
  const Vector base = k_chebyshev(lifted_from_stacked(Vector::Zero(dim), inst), inst, dc, net)
                          .stacked();
  Matrix out(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    Vector e = Vector::Zero(dim);
    e[j] = 1.0;
    out.col(j) = k_chebyshev(lifted_from_stacked(e, inst), inst, dc, net).stacked() - base;
  }
  return out;
}

Vector restricted_eigenvalues(const Matrix& sym, const Matrix& basis) {
  const Matrix R = basis.transpose() * sym * basis;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Matrix range_basis(const Matrix& M) {
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double cutoff = 1e-10 * (s.size() > 0 ? s[0] : 0.0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel_diff(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), std::numeric_limits<double>::min());
}

constexpr int kVerifyProbes = 5;

}  // namespace

std::vector<CheckResult> run_verify(const RunConfig& cfg) {
  RunConfig base = cfg;
  if (!base.instance_path && !base.generator_json)
    base.generator_json =
        R"({"kind":"synthetic","n":6,"d":2,"m":3,"theta":0.1,"graph":{"topology":"ring"}})";
  const ProblemInstance inst = build_instance(base);
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };

  GossipMatrix gm = laplacian_gossip(inst.graph());
  {
    Matrix W = gm.W;
    if (cfg.faults.perturb_W) W(0, 1) += 1e-3;
    const GossipCheck gc = check_gossip(inst.graph(), W);
    add("gossip invariants", gc.ok(),
        std::string("symmetric=") + (gc.symmetric ? "1" : "0") + " psd=" + (gc.psd ? "1" : "0") +
            " kernel=" + (gc.consensus_kernel && gc.kernel_dim_one ? "1" : "0") +
            " pattern=" + (gc.pattern_matches ? "1" : "0"));
  }

  const DerivedConstants dc = derived_constants(inst);
  auto bound_check = [&](const char* name, auto&& fn) {
    try {
      const BoundReport r = fn();
      add(name, r.ok(), fmt("[%.6g, %.6g] within bounds", r.lambda_min, r.lambda_max));
    } catch (const BoundViolated& e) {
      add(name, false, e.what());
    }
  };
  if (inst.all_quadratic())
    bound_check("hessian of G in [mu_G, L_G]", [&] { return verify_lemma1_bounds(inst, dc, gm); });
  bound_check("sigma^2(B) in [mu_B, L_B]", [&] { return verify_lemma2_bounds(inst, dc, gm); });

  const Eigen::Index lifted = inst.total_dim() + static_cast<Eigen::Index>(inst.n()) * inst.m();
  const bool dense_ok = lifted <= kMaxDenseLiftedDim;
  const double lo = kLowerCompression - 1e-8, hi = kUpperCompression + 1e-8;
  {
    const Matrix Wp = operator_wprime(gm, inst.graph());
    const Vector ev = restricted_eigenvalues(Wp, range_basis(gm.W));
    add("W' spectrum on range W", ev.minCoeff() >= lo && ev.maxCoeff() <= hi,
        fmt("[%.12g, %.12g]", ev.minCoeff(), ev.maxCoeff()));
  }
  if (dense_ok) {
    const DenseLiftedOperators ops = dense_lifted_operators(inst, dc, gm);
    const Vector ev = restricted_eigenvalues(operator_pb(inst, dc, gm),
                                             range_basis(ops.B.transpose()));
    add("P_B(B'B) spectrum on range B'", ev.minCoeff() >= lo && ev.maxCoeff() <= hi,
        fmt("[%.12g, %.12g]", ev.minCoeff(), ev.maxCoeff()));

    std::mt19937_64 rng(cfg.seed + 1);
    std::normal_distribution<double> normal;
    auto randn = [&](Eigen::Index k) {
      Vector v(k);
      for (Eigen::Index i = 0; i < k; ++i) v[i] = normal(rng);
      return v;
    };
    const Eigen::Index m = inst.m();
    const auto n = static_cast<Eigen::Index>(inst.n());
    SimNet net(inst.graph(), gm);

    double worst = 0.0;
    for (int t = 0; t < kVerifyProbes; ++t) {
      const Vector yv = randn(m * n);
      const Matrix y = Eigen::Map<const Matrix>(yv.data(), m, n);
      const Matrix got = mul_wprime(y, net);
      const Matrix want = y * ops.W_prime;
      worst = std::max(worst, (got - want).norm() / want.norm());
    }
    add("mul_wprime vs dense P(W)", worst <= 1e-8, fmt("max rel err %.3g", worst));

    const Vector bstack = Eigen::Map<const Vector>(inst.b_columns().data(), m * n);
    const Vector u0 = ops.B.completeOrthogonalDecomposition().solve(bstack);
    worst = 0.0;
    for (int t = 0; t < kVerifyProbes; ++t) {
      const Vector uv = randn(lifted);
      const Vector got = k_chebyshev(lifted_from_stacked(uv, inst), inst, dc, net).stacked();
      worst = std::max(worst, rel_diff(got, ops.P_B_of_BtB * (uv - u0)));
    }
    add("k_chebyshev vs dense K'(Ku - b')", worst <= 1e-8, fmt("max rel err %.3g", worst));

    const SolverParams gp = theorem1_params(inst.L_f(), inst.mu_f(), {}, dc);
    worst = 0.0;
    for (int t = 0; t < kVerifyProbes; ++t) {
      const Vector uv = randn(lifted);
      const Vector g = grad_G(lifted_from_stacked(uv, inst), inst, gp, net).stacked();
      const Vector fd = finite_diff_grad(
          [&](const Vector& v) {
            return lifted_objective(inst, dc, ops.W_prime, lifted_from_stacked(v, inst));
          },
          uv, 1e-6 * (1.0 + uv.norm()));
      worst = std::max(worst, rel_diff(fd, g));
    }
    add("grad_G vs finite differences", worst <= 1e-5, fmt("max rel err %.3g", worst));
  } else {
    add("dense operator checks", true, "skipped: lifted dimension above dense limit");
  }

  RunConfig rc = base;
  if (!rc.solver.target_rel_err) rc.solver.target_rel_err = 1e-6;
  if (rc.solver.limits.max_iters == SolverLimits{}.max_iters) rc.solver.limits.max_iters = 20000;
  try {
    const SolveReport rep = run_solve(inst, rc);
    const auto& last = rep.result.trace.records.back();
    const Counters want = expected_counters(rep.result.iterations, rep.prep.n_B, rep.prep.n_W);
    add("counter audit", last.counters == want,
        fmt("grad=%.0f matmul=%.0f comm=%.0f", static_cast<double>(last.counters.grad_calls),
            static_cast<double>(last.counters.matmul_rounds),
            static_cast<double>(last.counters.comm_rounds)));
    const double rel = rep.rel_err();
    const bool reached = std::isnan(rel) ? rep.result.reason == StopReason::converged
                                         : rel <= *rc.solver.target_rel_err;
    add("solver reaches target", reached,
        fmt("iters=%.0f rel_err=%.3g", static_cast<double>(rep.result.iterations), rel));
    const double feas_tol = 1e-6 * (1.0 + inst.b_sum().norm());
    add("final feasibility", last.feas_residual <= feas_tol,
        fmt("residual %.3g (tol %.3g)", last.feas_residual, feas_tol));
  } catch (const NonFiniteIterate& e) {
    add("solver reaches target", false, e.what());
  } catch (const InvariantViolation& e) {
    add("solver reaches target", false, e.what());
  }
  return out;
}

std::vector<BenchRow> run_bench(const SweepConfig& sw, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  for (double value : sw.values) {
    std::size_t n = sw.n;
    double kf = sw.kappa_f, ka = sw.kappa_A;
    Topology topo = parse_topology(sw.topology);
    if (sw.param == "kappa_f") kf = value;
    if (sw.param == "kappa_A") ka = value;
    if (sw.param == "path_n") {
      n = static_cast<std::size_t>(value);
      topo = Topology::path;
    }
    const Graph g = make_graph(topo, n, std::nullopt, seed);
    const ProblemInstance inst = gen_conditioned_quadratic(n, sw.d, kf, ka, g, seed);
    SolverConfig sc;
    sc.limits.max_iters = sw.max_iters;
    sc.limits.tol_x = 0.0;  // run to the target error only
    sc.target_rel_err = sw.target_rel_err;
    const Prepared prep = prepare(inst, sc);
    const ReferenceSolution ref = kkt_oracle(inst);
    SimNet net(inst.graph(), prep.gossip);
    const SolveResult res = solve(inst, prep.params, net, ref.x_star);
    BenchRow row;
    row.value = value;
    row.iters = res.iterations;
    row.counters = res.trace.records.back().counters;
    row.kappa_f = inst.L_f() / inst.mu_f();
    row.kappa_A = prep.dc.L_A / prep.dc.mu_A;
    row.kappa_W = prep.gossip.kappa_W;
    row.reached = res.reason == StopReason::target_reached;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "value,iters,grad_calls,matmul_rounds,comm_rounds,kappa_f,kappa_A,kappa_W\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%zu,%llu,%llu,%llu,%.17g,%.17g,%.17g\n", r.value,
                  r.iters, static_cast<unsigned long long>(r.counters.grad_calls),
                  static_cast<unsigned long long>(r.counters.matmul_rounds),
                  static_cast<unsigned long long>(r.counters.comm_rounds), r.kappa_f, r.kappa_A,
                  r.kappa_W);
    out += buf;
  }
  return out;
}

}  // namespace coupled::tools
