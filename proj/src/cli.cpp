#include "omtk/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "omtk/audit.hpp"
#include "omtk/config.hpp"
#include "omtk/io.hpp"
#include "omtk/kernels.hpp"
#include "omtk/linalg.hpp"
#include "omtk/mpp.hpp"
#include "omtk/norms.hpp"
#include "omtk/om.hpp"
#include "omtk/rng.hpp"
#include "omtk/simulate.hpp"
#include "omtk/tube.hpp"

namespace omtk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out_dir = ".";
  std::string config;
  std::string preset;
};

/// Collects emitted files for the manifest.
struct Run {
  std::string subcommand;
  Globals globals;
  std::vector<std::string> outputs;
  std::string config_hash;

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return fs::path(globals.out_dir) / name;
  }
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCategory::usage, "bad number '" + item + "' in " + what);
    }
  }
  if (out.empty()) throw Error(ErrorCategory::usage, what + " is empty");
  return out;
}

std::vector<PathNorm> parse_norms(const std::string& text) {
  std::vector<PathNorm> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(PathNorm::parse(item));
  return out;
}

ProblemConfig resolve_config(Run& run) {
  const Globals& g = run.globals;
  if (!g.config.empty() && !g.preset.empty()) {
    throw Error(ErrorCategory::usage, "give either --config or --preset");
  }
  ProblemConfig cfg;
  if (!g.config.empty()) {
    cfg = load_config(g.config);
  } else if (!g.preset.empty()) {
    cfg = preset_config(g.preset);
  } else {
    throw Error(ErrorCategory::usage, "this subcommand needs --config or --preset");
  }
  run.config_hash = cfg.hash();
  return cfg;
}

ReferencePath load_path(const std::string& file, const ProblemConfig& cfg) {
  if (file.empty()) throw Error(ErrorCategory::usage, "missing path file");
  return io::read_path_csv(file, cfg.d, cfg.m);
}

bool is_paper_example(const DegenerateSystem& s) {
  if (s.d != 1 || s.m != 1 || !s.is_hamiltonian() || s.q[0].expr() == nullptr) return false;
  const auto reference = dsl::parse("M1*(x1^2-1)", s.dims());
  return dsl::to_string(*s.q[0].expr()) == dsl::to_string(reference);
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// action ---------------------------------------------------------------

struct ActionArgs {
  std::string path;
  std::string form = "reduced";
};

void run_action(Run& run, const ActionArgs& a, std::ostream& out) {
  const ProblemConfig cfg = resolve_config(run);
  const ReferencePath phi = load_path(a.path, cfg);
  ActionValue value;
  if (a.form == "reduced") {
    value = om_action(cfg.system, phi);
  } else if (a.form == "global") {
    value = om_action_global(cfg.system, phi);
  } else if (a.form == "nondegenerate") {
    value = om_action_nondegenerate_reduction(cfg.system, phi);
  } else if (a.form == "hamiltonian") {
    const HamiltonianPath h = phi.analytic
                                  ? HamiltonianPath{phi.grid, phi.first(), phi.second(),
                                                    phi.dsecond()}
                                  : HamiltonianPath::from_samples(phi.grid, phi.first());
    value = om_action_hamiltonian(cfg.system, h);
  } else {
    throw Error(ErrorCategory::usage, "unknown form '" + a.form + "'");
  }
  json j = io::to_json(value);
  j["form"] = a.form;
  io::write_json(run.file("action.json"), j);
  out << j.dump(2) << '\n';
}

// mpp ------------------------------------------------------------------

struct MppArgs {
  double dt = 1e-3;
  std::string kind;
  std::string left;
  std::string right;
  std::string init = "linear";
  double width = 0.0;
  std::size_t starts = 1;
  std::string method = "newton";
  double tolerance = 1e-6;
  std::size_t max_iterations = 10000;
};

void run_mpp(Run& run, const MppArgs& a, std::ostream& out) {
  const ProblemConfig cfg = resolve_config(run);
  const DegenerateSystem& sys = cfg.system;
  const Grid grid = Grid::uniform(cfg.horizon, a.dt);
  BoundaryConditions bc;
  const std::string kind = a.kind.empty() ? (sys.is_hamiltonian() ? "hamiltonian" : "general")
                                          : a.kind;
  if (kind == "hamiltonian") {
    bc.kind = BoundaryConditions::Kind::hamiltonian;
    bc.left = a.left.empty() ? Vector(sys.x0) : to_vector(parse_list(a.left, "--left"));
  } else if (kind == "general") {
    bc.kind = BoundaryConditions::Kind::general;
    bc.left = a.left.empty() ? Vector(sys.x0.tail(sys.m)) : to_vector(parse_list(a.left, "--left"));
  } else {
    throw Error(ErrorCategory::usage, "unknown boundary kind '" + kind + "'");
  }
  if (a.right.empty()) throw Error(ErrorCategory::usage, "mpp needs --right");
  bc.right = to_vector(parse_list(a.right, "--right"));

  MppOptions opts;
  opts.gradient_tolerance = a.tolerance;
  opts.max_iterations = a.max_iterations;
  if (a.method == "lbfgs") {
    opts.method = MppOptions::Method::lbfgs;
  } else if (a.method != "newton") {
    throw Error(ErrorCategory::usage, "unknown method '" + a.method + "'");
  }
  const double width = a.width > 0.0 ? a.width : 0.1 * cfg.horizon;
  std::vector<Matrix> inits;
  if (a.init == "linear") {
    inits.push_back(linear_initial_guess(sys, bc, grid));
  } else if (a.init == "tanh") {
    inits.push_back(tanh_initial_guess(sys, bc, grid, width));
  } else {
    throw Error(ErrorCategory::usage, "unknown init '" + a.init + "'");
  }
  for (std::size_t k = 1; k < a.starts; ++k) {
    inits.push_back(tanh_initial_guess(sys, bc, grid, width * std::pow(2.0, double(k) - 2.0)));
  }
  const std::vector<MppSolution> sols = minimize_action_multistart(sys, bc, grid, inits, opts);
  const MppSolution& best = sols.front();

  io::write_path_csv(run.file("mpp_path.csv"), best.path);
  json j = {{"kind", kind},
            {"action", io::to_json(best.action)},
            {"objective", best.objective},
            {"gradient_norm", best.gradient_norm},
            {"iterations", best.iterations},
            {"converged", best.converged},
            {"message", best.message},
            {"unknowns", best.unknowns.size()},
            {"starts", sols.size()},
            {"path_file", "mpp_path.csv"}};
  json objectives = json::array();
  for (const MppSolution& s : sols) objectives.push_back(s.objective);
  j["start_objectives"] = objectives;
  if (is_paper_example(sys) && kind == "hamiltonian" && grid.steps >= 9) {
    const ElResidual r = el_residual_example(grid, best.path.first());
    std::ostringstream csv;
    csv << "t,verbatim,derived\n";
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      csv << io::number(r.times[i]) << ',' << io::number(r.verbatim[i]) << ','
          << io::number(r.derived[i]) << '\n';
    }
    io::write_text(run.file("mpp_residual.csv"), csv.str());
    j["residual_file"] = "mpp_residual.csv";
    j["residual_l2_verbatim"] = r.l2_verbatim;
    j["residual_l2_derived"] = r.l2_derived;
  }
  io::write_json(run.file("mpp.json"), j);
  out << j.dump(2) << '\n';
}

// tube / ratio -----------------------------------------------------------

struct TubeArgs {
  std::string path;
  std::string psi;
  std::string eps = "0.5";
  std::string norm = "sup";
  std::size_t samples = 100000;
  std::size_t particles = 1000;
  std::string component = "full";
};

TubeConfig tube_config(const Run& run, const TubeArgs& a, const ReferencePath& phi) {
  TubeConfig cfg;
  cfg.sim.dt = phi.grid.dt();
  cfg.sim.horizon = phi.grid.horizon;
  cfg.sim.seed = run.globals.seed;
  cfg.sim.particles = a.particles;
  cfg.samples = a.samples;
  if (a.component == "second") {
    cfg.component = TubeComponent::second;
  } else if (a.component != "full") {
    throw Error(ErrorCategory::usage, "unknown component '" + a.component + "'");
  }
  return cfg;
}

void run_tube(Run& run, const TubeArgs& a, std::ostream& out) {
  const ProblemConfig cfg = resolve_config(run);
  const ReferencePath phi = load_path(a.path, cfg);
  phi.require_admissible(cfg.system);
  const PathNorm norm = PathNorm::parse(a.norm);
  const TubeConfig tc = tube_config(run, a, phi);
  const std::vector<double> dist = tube_distances(cfg.system, phi, norm, tc);
  const auto rows = tube_curve(dist, parse_list(a.eps, "--eps"), norm);
  io::write_text(run.file("tube.csv"), io::tube_csv(rows));
  json j = json::array();
  for (const TubeEstimate& e : rows) j.push_back(io::to_json(e));
  io::write_json(run.file("tube.json"), j);
  out << j.dump(2) << '\n';
}

void run_ratio(Run& run, const TubeArgs& a, std::ostream& out) {
  const ProblemConfig cfg = resolve_config(run);
  const ReferencePath phi = load_path(a.path, cfg);
  const ReferencePath psi = load_path(a.psi, cfg);
  const PathNorm norm = PathNorm::parse(a.norm);
  const RatioReport r = om_ratio_experiment(cfg.system, phi, psi, norm,
                                            parse_list(a.eps, "--eps"),
                                            tube_config(run, a, phi));
  const json j = io::to_json(r);
  io::write_json(run.file("ratio.json"), j);
  out << j.dump(2) << '\n';
}

// simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::size_t particles = 1000;
  double dt = 1e-3;
  std::size_t write_paths = 5;
};

void run_simulate(Run& run, const SimulateArgs& a, std::ostream& out) {
  const ProblemConfig cfg = resolve_config(run);
  const DegenerateSystem& sys = cfg.system;
  SimConfig sc;
  sc.particles = a.particles;
  sc.dt = a.dt;
  sc.horizon = cfg.horizon;
  sc.seed = run.globals.seed;
  sc.store_paths = a.write_paths > 0;
  const int dim = sys.state_dim();
  std::ostringstream stats;
  stats << "t";
  for (int c = 1; c <= dim; ++c) stats << ",mean_x" << c;
  for (int c = 1; c <= dim; ++c) stats << ",var_x" << c;
  stats << '\n';
  auto observe = [&](std::size_t, double t, const StateMatrix& state, const Matrix&) {
    Matrix mom;
    kernels::moments(state, 0, dim, 2, mom);
    stats << io::number(t);
    for (int c = 0; c < dim; ++c) stats << ',' << io::number(mom(0, c));
    for (int c = 0; c < dim; ++c) stats << ',' << io::number(mom(1, c) - mom(0, c) * mom(0, c));
    stats << '\n';
  };
  const PathBundle bundle = simulate_mv(sys, sc, observe);
  io::write_text(run.file("simulate_stats.csv"), stats.str());
  const std::size_t keep = std::min(a.write_paths, bundle.paths.size());
  if (keep > 0) {
    std::ostringstream paths;
    paths << "path,t";
    for (int c = 1; c <= dim; ++c) paths << ",x" << c;
    paths << '\n';
    for (std::size_t i = 0; i < keep; ++i) {
      for (Eigen::Index n = 0; n < bundle.paths[i].rows(); ++n) {
        paths << i << ',' << io::number(bundle.grid.time(static_cast<std::size_t>(n)));
        for (int c = 0; c < dim; ++c) paths << ',' << io::number(bundle.paths[i](n, c));
        paths << '\n';
      }
    }
    io::write_text(run.file("simulate_paths.csv"), paths.str());
  }
  json final_mean = json::array();
  for (int c = 0; c < dim; ++c) final_mean.push_back(bundle.final_state.col(c).mean());
  const json j = {{"particles", a.particles}, {"dt", a.dt}, {"steps", bundle.grid.steps},
                  {"final_mean", final_mean}};
  io::write_json(run.file("simulate.json"), j);
  out << j.dump(2) << '\n';
}

// audit ------------------------------------------------------------------

struct AuditArgs {
  std::string path;
  std::size_t samples = 1000;
  std::string norms = "sup,lp:4,holder:0.25";
  std::size_t h1_trials = 10000;
  std::string h3_eps = "1.2,1.0,0.8,0.7,0.6,0.5";
  std::size_t h3_samples = 100000;
};

void run_audit(Run& run, const AuditArgs& a, std::ostream& out) {
  const ProblemConfig cfg = resolve_config(run);
  const ReferencePath phi = load_path(a.path, cfg);
  const std::vector<PathNorm> norms = parse_norms(a.norms);
  SimConfig sc;
  sc.dt = phi.grid.dt();
  sc.horizon = phi.grid.horizon;
  sc.seed = run.globals.seed;
  const H4Report h4 = h4_audit(cfg.system, phi, norms, sc, a.samples);
  json j;
  j["h4"] = {{"lipschitz", h4.lipschitz}, {"samples", h4.samples}};
  json h4rows = json::array();
  for (const H4Row& r : h4.rows) {
    h4rows.push_back({{"norm", r.norm.name()},
                      {"max_ratio", r.max_ratio},
                      {"median_ratio", r.median_ratio},
                      {"gronwall", r.gronwall},
                      {"bound", r.bound},
                      {"bounded", r.bounded},
                      {"paths", r.ratios.size()}});
  }
  j["h4"]["rows"] = h4rows;
  json h1 = json::array();
  for (const PathNorm& n : norms) {
    const double defect = h1_sign_flip_defect(n, phi.grid, cfg.d + cfg.m, a.h1_trials,
                                              run.globals.seed);
    h1.push_back({{"norm", n.name()}, {"max_defect", defect}, {"exact", defect == 0.0}});
  }
  j["h1"] = h1;
  TubeConfig tc;
  tc.sim = sc;
  tc.samples = a.h3_samples;
  json h3 = json::array();
  for (const PathNorm& n : norms) {
    const H3Report r = h3_probe(n, parse_list(a.h3_eps, "--h3-eps"), cfg.m, tc);
    json rows = json::array();
    for (const H3Row& row : r.rows) {
      json e = io::to_json(row.estimate);
      e["max_quartic"] = row.max_quartic;
      rows.push_back(e);
    }
    h3.push_back({{"norm", n.name()}, {"q", r.q}, {"c3", r.c3}, {"p", r.p}, {"c2", r.c2},
                  {"q_below", r.q_below}, {"monotone", r.monotone}, {"rows", rows},
                  {"notices", r.notices}});
  }
  j["h3"] = h3;
  io::write_json(run.file("audit.json"), j);
  out << j.dump(2) << '\n';
}

// pinv-check ---------------------------------------------------------------

struct PinvArgs {
  std::size_t trials = 1000;
  int max_dim = 8;
};

void run_pinv(Run& run, const PinvArgs& a, std::ostream& out) {
  const json j = pinv_property_suite(a.trials, run.globals.seed, a.max_dim);
  io::write_json(run.file("pinv_check.json"), j);
  out << j.dump(2) << '\n';
}

void emit_error(std::ostream& err, ErrorCategory category, const std::string& message,
                const json& extra = json::object()) {
  json e = {{"category", std::string(to_string(category))}, {"message", message}};
  for (const auto& [k, v] : extra.items()) e[k] = v;
  err << json{{"error", e}}.dump() << '\n';
}

int exit_code(ErrorCategory c) { return c == ErrorCategory::usage ? 2 : 1; }

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

json pinv_property_suite(std::size_t trials, std::uint64_t seed, int max_dim) {
  if (max_dim < 1) throw InputError("max dimension must be >= 1");
  constexpr double kIdentityTol = 1e-10;
  constexpr double kPartitionTol = 1e-8;
  std::size_t failures[5] = {0, 0, 0, 0, 0};
  double worst[5] = {0, 0, 0, 0, 0};
  std::size_t partitioned = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto draw = [&](std::uint64_t k, int hi) {
      return 1 + static_cast<int>(uniform(seed, Stream::property, t, k) * hi) % hi;
    };
    const int r = draw(0, max_dim);
    const int c = draw(1, max_dim);
    auto gaussian = [&](int rows, int cols, std::uint64_t step) {
      Matrix g(rows, cols);
      std::vector<double> z(static_cast<std::size_t>(rows * cols));
      normals(seed, Stream::property, t, step, z);
      for (int i = 0; i < rows; ++i) {
        for (int k = 0; k < cols; ++k) g(i, k) = z[static_cast<std::size_t>(i * cols + k)];
      }
      return g;
    };
    Matrix m = gaussian(r, c, 10);
    if (t % 3 == 2 && std::min(r, c) > 1) {
      const int rank = std::min(r, c) - 1;
      m = gaussian(r, rank, 11) * gaussian(rank, c, 12);
    }
    m /= m.cwiseAbs().maxCoeff();
    const Matrix p = pinv(m);
    const PenroseResiduals res = penrose_residuals(m, p);
    const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
    const double values[4] = {res.reproduces, res.reflexive / scale, res.symmetric_left,
                              res.symmetric_right};
    for (int k = 0; k < 4; ++k) {
      worst[k] = std::max(worst[k], values[k]);
      failures[k] += values[k] > kIdentityTol;
    }
    if (r >= 2 && c >= 2) {
      const int a = draw(2, r - 1);
      const int b = draw(3, c - 1);
      PartitionedMatrix pm{m.topLeftCorner(a, b), m.topRightCorner(a, c - b),
                           m.bottomLeftCorner(r - a, b), m.bottomRightCorner(r - a, c - b)};
      const double diff = (pinv_partitioned(pm) - p).cwiseAbs().maxCoeff() / scale;
      worst[4] = std::max(worst[4], diff);
      failures[4] += diff > kPartitionTol;
      ++partitioned;
    }
  }
  const char* names[5] = {"reproduces", "reflexive", "symmetric_left", "symmetric_right",
                          "partitioned"};
  json checks = json::array();
  bool pass = true;
  for (int k = 0; k < 5; ++k) {
    checks.push_back({{"identity", names[k]},
                      {"failures", failures[k]},
                      {"max_residual", worst[k]},
                      {"tolerance", k < 4 ? kIdentityTol : kPartitionTol}});
    pass = pass && failures[k] == 0;
  }
  return {{"trials", trials}, {"partitioned_trials", partitioned}, {"max_dim", max_dim},
          {"checks", checks}, {"pass", pass}};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Onsager-Machlup toolkit for degenerate McKean-Vlasov SDEs", "omtk"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Run run;
  Globals& g = run.globals;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--workers", g.workers, "worker threads (default: OMTK_WORKERS or all)");
  app.add_option("--out-dir", g.out_dir, "directory for output files")->capture_default_str();

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", g.config, "problem file");
    sub->add_option("--preset", g.preset, "builtin problem");
  };

  ActionArgs action;
  auto* s_action = app.add_subcommand("action", "OM action of a path");
  with_config(s_action);
  s_action->add_option("--path", action.path, "path CSV")->required();
  s_action->add_option("--form", action.form, "reduced|global|hamiltonian|nondegenerate");

  MppArgs mpp;
  auto* s_mpp = app.add_subcommand("mpp", "most probable path by action minimisation");
  with_config(s_mpp);
  s_mpp->add_option("--dt", mpp.dt);
  s_mpp->add_option("--kind", mpp.kind, "hamiltonian|general");
  s_mpp->add_option("--left", mpp.left, "left boundary data (default from x0)");
  s_mpp->add_option("--right", mpp.right, "right boundary data")->required();
  s_mpp->add_option("--init", mpp.init, "linear|tanh");
  s_mpp->add_option("--width", mpp.width, "tanh width (default T/10)");
  s_mpp->add_option("--starts", mpp.starts, "number of starts");
  s_mpp->add_option("--method", mpp.method, "newton|lbfgs");
  s_mpp->add_option("--tol", mpp.tolerance);
  s_mpp->add_option("--max-iter", mpp.max_iterations);

  TubeArgs tube;
  auto* s_tube = app.add_subcommand("tube", "Monte Carlo tube probabilities");
  with_config(s_tube);
  s_tube->add_option("--path", tube.path, "tube centre CSV")->required();
  s_tube->add_option("--eps", tube.eps, "comma-separated radii");
  s_tube->add_option("--norm", tube.norm, "sup|lp:<p>|holder:<alpha>");
  s_tube->add_option("--samples", tube.samples);
  s_tube->add_option("--particles", tube.particles, "batch size for interacting systems");
  s_tube->add_option("--component", tube.component, "full|second");

  TubeArgs ratio;
  auto* s_ratio = app.add_subcommand("ratio", "tube ratio against the OM prediction");
  with_config(s_ratio);
  s_ratio->add_option("--phi", ratio.path, "first centre CSV")->required();
  s_ratio->add_option("--psi", ratio.psi, "second centre CSV")->required();
  s_ratio->add_option("--eps", ratio.eps, "comma-separated radii");
  s_ratio->add_option("--norm", ratio.norm);
  s_ratio->add_option("--samples", ratio.samples);
  s_ratio->add_option("--particles", ratio.particles);
  s_ratio->add_option("--component", ratio.component, "full|second");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "interacting-particle simulation");
  with_config(s_sim);
  s_sim->add_option("--particles", sim.particles);
  s_sim->add_option("--dt", sim.dt);
  s_sim->add_option("--write-paths", sim.write_paths, "trajectories written to CSV");

  PinvArgs pinv_args;
  auto* s_pinv = app.add_subcommand("pinv-check", "Penrose identity property suite");
  s_pinv->add_option("--trials", pinv_args.trials);
  s_pinv->add_option("--max-dim", pinv_args.max_dim);

  AuditArgs audit;
  auto* s_audit = app.add_subcommand("audit", "assumption audits H1, H3, H4");
  with_config(s_audit);
  s_audit->add_option("--path", audit.path, "reference path CSV")->required();
  s_audit->add_option("--samples", audit.samples);
  s_audit->add_option("--norms", audit.norms);
  s_audit->add_option("--h1-trials", audit.h1_trials);
  s_audit->add_option("--h3-eps", audit.h3_eps);
  s_audit->add_option("--h3-samples", audit.h3_samples);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    emit_error(err, ErrorCategory::usage, e.what());
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  try {
    int workers = g.workers;
    if (workers == 0) {
      if (const char* env = std::getenv("OMTK_WORKERS")) workers = std::atoi(env);
    }
    if (workers < 0) throw Error(ErrorCategory::usage, "--workers must be >= 0");
    set_workers(workers);
    fs::create_directories(g.out_dir);

    CLI::App* sub = app.get_subcommands().front();
    run.subcommand = sub->get_name();
    if (sub == s_action) run_action(run, action, out);
    else if (sub == s_mpp) run_mpp(run, mpp, out);
    else if (sub == s_tube) run_tube(run, tube, out);
    else if (sub == s_ratio) run_ratio(run, ratio, out);
    else if (sub == s_sim) run_simulate(run, sim, out);
    else if (sub == s_pinv) run_pinv(run, pinv_args, out);
    else if (sub == s_audit) run_audit(run, audit, out);

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"subcommand", run.subcommand},
                     {"config_hash", run.config_hash},
                     {"seed", g.seed},
                     {"version", kVersion},
                     {"outputs", run.outputs},
                     {"started_at", started},
                     {"duration_seconds", seconds}};
    io::write_json(fs::path(g.out_dir) / "manifest.json", manifest);
    return 0;
  } catch (const ConfigParseError& e) {
    emit_error(err, e.category(), e.what(), {{"key", e.key()}, {"offset", e.offset()}});
    return 1;
  } catch (const ParseError& e) {
    emit_error(err, e.category(), e.what(), {{"offset", e.offset()}});
    return 1;
  } catch (const SchemaError& e) {
    emit_error(err, e.category(), e.what(), {{"key", e.key_path()}});
    return 1;
  } catch (const Error& e) {
    emit_error(err, e.category(), e.what());
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    emit_error(err, ErrorCategory::io, e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(err, ErrorCategory::evaluation, e.what());
    return 1;
  }
}

}  // namespace omtk
