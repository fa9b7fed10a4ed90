// Experiment runner: each subcommand writes one or more CSV files plus a
// JSON sidecar per CSV into --out.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinlaw/spinlaw.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace spinlaw;

namespace {

const std::vector<std::string> kExperiments = {"decay", "entropy-growth", "lr",   "nsy",      "fannes", "ssa",
                                               "histories", "collapse",   "meanfield", "baker", "all"};

struct Config {
  std::string experiment;
  std::string out = "out";
  std::uint64_t seed = 12345;
  unsigned threads = 1;

  // coupling; unset fields fall back to the experiment's default
  std::optional<std::string> variant;
  std::optional<double> xi, alpha, J, a, c;
  std::optional<std::int64_t> L;
  std::optional<std::string> model;

  // grids
  std::optional<double> t_min, t_max;
  std::optional<std::size_t> t_points;
  std::vector<double> times;
  double tol = 1e-12;
  std::size_t N = 20;
  std::vector<std::size_t> block_sizes = {2, 4, 6, 8};
  std::size_t lr_sites = 12;
  std::vector<std::int64_t> offsets = {1, 2, 3, 4, 5};
  double lambda = 1.0;
  std::vector<std::int64_t> inner_radii = {3, 4};
  std::int64_t outer_radius = 6;
  int f_nu = 1;
  double f_eps = 1.0;

  // randomized suites
  std::size_t trials = 0;
  std::size_t max_sites = 6;

  // histories
  double mu = 0.5, p1 = 0.8, p2 = 0.3, eps = 0.05;
  std::vector<std::size_t> n_schedule = {5, 10, 20, 40, 80};

  // mean field
  double m1 = 2, m2 = 0, m3 = 0, t_end = 100, dt = 1e-3;
  std::size_t record_every = 100;

  // baker
  int grid_bits = 10, coarse_level = 4, steps = 6;

  json to_json() const {
    json j;
    auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
    j["experiment"] = experiment;
    j["out"] = out;
    j["seed"] = seed;
    j["threads"] = threads;
    j["variant"] = opt(variant);
    j["xi"] = opt(xi);
    j["alpha"] = opt(alpha);
    j["J"] = opt(J);
    j["L"] = opt(L);
    j["a"] = opt(a);
    j["c"] = opt(c);
    j["model"] = opt(model);
    j["t-min"] = opt(t_min);
    j["t-max"] = opt(t_max);
    j["t-points"] = opt(t_points);
    j["times"] = times;
    j["tol"] = tol;
    j["N"] = N;
    j["block-sizes"] = block_sizes;
    j["lr-sites"] = lr_sites;
    j["offsets"] = offsets;
    j["lambda"] = lambda;
    j["inner-radii"] = inner_radii;
    j["outer-radius"] = outer_radius;
    j["f-nu"] = f_nu;
    j["f-eps"] = f_eps;
    j["trials"] = trials;
    j["max-sites"] = max_sites;
    j["mu"] = mu;
    j["p1"] = p1;
    j["p2"] = p2;
    j["eps"] = eps;
    j["n-schedule"] = n_schedule;
    j["m1"] = m1;
    j["m2"] = m2;
    j["m3"] = m3;
    j["t-end"] = t_end;
    j["dt"] = dt;
    j["record-every"] = record_every;
    j["grid-bits"] = grid_bits;
    j["coarse-level"] = coarse_level;
    j["steps"] = steps;
    return j;
  }
};

CouplingSpec resolve_coupling(const Config& cfg, const CouplingSpec& fallback) {
  std::string v;
  if (cfg.variant) v = *cfg.variant;
  else if (cfg.xi) v = "exponential";
  else if (cfg.alpha) v = "dyson";
  else if (cfg.J || cfg.L) v = "finite";
  else if (cfg.a || cfg.c) v = "meanfield";
  else return fallback;

  auto pick = [](const std::optional<double>& o, double d) { return o ? *o : d; };
  CouplingSpec out;
  if (v == "exponential") {
    const auto* f = std::get_if<Exponential>(&fallback);
    out = Exponential{pick(cfg.xi, f ? f->xi : 2.0)};
  } else if (v == "dyson") {
    const auto* f = std::get_if<Dyson>(&fallback);
    out = Dyson{pick(cfg.alpha, f ? f->alpha : 2.0)};
  } else if (v == "finite") {
    const auto* f = std::get_if<FiniteRange>(&fallback);
    out = FiniteRange{pick(cfg.J, f ? f->J : 1.0), cfg.L ? *cfg.L : (f ? f->L : 1)};
  } else if (v == "meanfield") {
    const auto* f = std::get_if<MeanField>(&fallback);
    out = MeanField{pick(cfg.a, f ? f->a : 1.0), pick(cfg.c, f ? f->c : 0.0)};
  } else {
    throw PreconditionError("unknown coupling variant '" + v + "' (exponential, dyson, finite, meanfield)");
  }
  validate(out);
  return out;
}

ModelSpec resolve_model(const Config& cfg, const std::string& fallback_kind, const CouplingSpec& fallback) {
  const std::string kind = cfg.model.value_or(fallback_kind);
  const CouplingSpec j = resolve_coupling(cfg, fallback);
  if (kind == "gim") return ModelSpec::gim(j);
  if (kind == "xy") return ModelSpec::xy(j);
  if (kind == "heisenberg") return ModelSpec::heisenberg(j, j);
  throw PreconditionError("unknown model '" + kind + "' (gim, xy, heisenberg)");
}

std::vector<double> time_grid(const Config& cfg, double lo, double hi, std::size_t n) {
  if (!cfg.times.empty()) return cfg.times;
  const double a = cfg.t_min.value_or(lo);
  const double b = cfg.t_max.value_or(hi);
  const std::size_t k = cfg.t_points.value_or(n);
  detail::require(k >= 1 && b >= a, "time grid: need t-points >= 1 and t-max >= t-min");
  return linspace(a, b, k);
}

class Runner {
 public:
  explicit Runner(Config cfg) : cfg_(std::move(cfg)) { fs::create_directories(cfg_.out); }

  void run(const std::string& name) {
    if (name == "all") {
      for (const auto& e : kExperiments)
        if (e != "all") run(e);
      return;
    }
    using Fn = void (Runner::*)();
    static const std::map<std::string, Fn> table = {
        {"decay", &Runner::decay},         {"entropy-growth", &Runner::entropy_growth},
        {"lr", &Runner::lr},               {"nsy", &Runner::nsy},
        {"fannes", &Runner::fannes},       {"ssa", &Runner::ssa},
        {"histories", &Runner::histories}, {"collapse", &Runner::collapse},
        {"meanfield", &Runner::meanfield}, {"baker", &Runner::baker}};
    current_ = name;
    start_ = std::chrono::steady_clock::now();
    (this->*table.at(name))();
  }

 private:
  void emit(const std::string& file, const CsvTable& table, json extra = json::object()) {
    const fs::path path = fs::path(cfg_.out) / file;
    table.write(path.string());
    json side;
    side["experiment"] = current_;
    side["csv"] = file;
    side["version"] = SPINLAW_VERSION;
    side["seed"] = cfg_.seed;
    side["config"] = cfg_.to_json();
    side["details"] = std::move(extra);
    side["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ofstream(path.string() + ".json") << side.dump(2) << '\n';
    std::cout << path.string() << '\n';
  }

  void decay() {
    const CouplingSpec spec = resolve_coupling(cfg_, Exponential{2.0});
    const DecayCurve curve = decay_curve(spec, time_grid(cfg_, 0.0, 10.0, 200), cfg_.tol);
    json extra{{"coupling", curve.meta}};
    if (const auto* e = std::get_if<Exponential>(&spec); e && e->xi == 2.0) {
      double worst = 0;
      for (std::size_t i = 0; i < curve.times.size(); ++i)
        worst = std::max(worst, std::abs(curve.values[i] - vieta_reference(curve.times[i])));
      extra["max_vieta_deviation"] = worst;
      detail::ensure(worst <= 1e-8, "decay: product deviates from (sin 2t / 2t)^2");
    }
    emit("decay.csv", curve.to_csv(), extra);
  }

  void entropy_growth() {
    const CouplingSpec spec = resolve_coupling(cfg_, Exponential{std::numbers::e});
    const auto grid = time_grid(cfg_, 0.0, 100.0, 201);
    const SecondLawTable table = second_law_experiment(spec, cfg_.N, cfg_.block_sizes, grid, cfg_.threads);
    emit("entropy.csv", table.to_csv(), {{"coupling", table.coupling}});
  }

  void lr() {
    const ModelSpec m = resolve_model(cfg_, "xy", FiniteRange{1.0, 1});
    const Block region = Block::centered(cfg_.lr_sites);
    detail::require(region.size() <= kMaxDenseSites, "lr: lr-sites exceeds 12");
    const ChainDynamics dyn(m, region);
    const auto grid = time_grid(cfg_, 0.25, 2.0, 4);
    const std::vector<double> ts = cfg_.times.empty() && !cfg_.t_min && !cfg_.t_max && !cfg_.t_points
                                       ? std::vector<double>{0.25, 0.5, 1.0, 2.0}
                                       : grid;
    // A at site 0 translated by x, B at site 0; both sides must fit in the region
    std::vector<SiteIndex> xs;
    for (auto x : cfg_.offsets) {
      for (SiteIndex s : {x, -x})
        if (region.contains(s) && std::find(xs.begin(), xs.end(), s) == xs.end()) xs.push_back(s);
    }
    detail::require(!xs.empty(), "lr: no offsets inside the region");
    const PauliString a = PauliString::single(0, Axis::X);
    const PauliString b = PauliString::single(0, Axis::X);
    const LightCone cone = light_cone_scan(dyn, a, b, ts, xs, cfg_.threads);
    CsvTable table({"t", "x", "lambda", "lhs", "lhs_upper", "rhs", "satisfied"});
    std::size_t violations = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = 0; j < xs.size(); ++j) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        const double rhs = lr_rhs(m, xs[j], ts[i], cfg_.lambda);
        const bool ok = bound_holds(cone.upper(ii, jj), rhs);
        violations += !ok;
        table.add(ts[i], xs[j], cfg_.lambda, cone.norms(ii, jj), cone.upper(ii, jj), rhs, ok ? 1 : 0);
      }
    }
    const json extra{{"model", m.descriptor()}, {"region", region.to_string()}, {"violations", violations}};
    emit("lr.csv", table, extra);
    emit("lightcone.csv", cone.to_csv(), extra);
    detail::ensure(violations == 0, "lr: Lieb-Robinson bound violated");
  }

  void nsy() {
    const ModelSpec m = resolve_model(cfg_, "gim", Exponential{2.0});
    const FFunction f = FFunction::power_law(cfg_.f_nu, cfg_.f_eps);
    const Block outer = Block::interval(-cfg_.outer_radius, cfg_.outer_radius);
    detail::require(outer.size() <= 13, "nsy: outer region exceeds 13 sites");
    const ChainDynamics big(m, outer);
    const std::vector<double> ts = cfg_.times.empty() && !cfg_.t_min && !cfg_.t_max && !cfg_.t_points
                                       ? std::vector<double>{0.5, 1.0, 2.0}
                                       : time_grid(cfg_, 0.5, 2.0, 3);
    const PauliString a = PauliString::single(0, Axis::X);
    CsvTable table({"t", "inner_radius", "outer_radius", "lhs", "lhs_closed_form", "rhs", "rhs_corollary", "satisfied"});
    std::size_t violations = 0;
    for (auto r : cfg_.inner_radii) {
      detail::require(r >= 0 && r <= cfg_.outer_radius, "nsy: inner radius must lie in [0, outer-radius]");
      const Block inner = Block::interval(-r, r);
      const ChainDynamics small(m, inner);
      for (double t : ts) {
        const BoundReport rep = nsy_check(big, small, a, t, f);
        double closed = std::numeric_limits<double>::quiet_NaN();
        if (m.kind == ModelKind::GIm) {
          closed = nsy_lhs_gim_closed_form(m.j2, 0, t, inner, outer);
          detail::ensure(std::abs(closed - rep.lhs) <= 1e-9, "nsy: matrix and closed-form lhs disagree");
        }
        violations += !rep.satisfied;
        table.add(t, r, cfg_.outer_radius, rep.lhs, closed, rep.rhs, rep.rhs_corollary, rep.satisfied ? 1 : 0);
      }
    }
    emit("nsy.csv", table, {{"model", m.descriptor()}, {"F", f.label()}, {"violations", violations}});
    detail::ensure(violations == 0, "nsy: bound violated");
  }

  void fannes() {
    Rng rng(cfg_.seed);
    const std::size_t trials = cfg_.trials ? cfg_.trials : 10000;
    detail::require(cfg_.max_sites >= 1 && cfg_.max_sites <= 8, "fannes: max-sites must lie in [1, 8]");
    std::uniform_int_distribution<std::size_t> sites(1, cfg_.max_sites);
    CsvTable table({"trial", "sites", "lhs", "rhs", "a", "trace_distance"});
    for (std::size_t i = 0; i < trials; ++i) {
      const std::size_t k = sites(rng);
      const Block b = Block::interval(0, static_cast<SiteIndex>(k) - 1);
      std::uniform_int_distribution<Eigen::Index> rank(1, static_cast<Eigen::Index>(b.dim()));
      const DensityMatrix r1 = random_density(rng, b, rank(rng));
      const DensityMatrix r2 = random_density(rng, b, rank(rng));
      const FannesReport rep = fannes_check(r1, r2);
      table.add(static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k), rep.lhs, rep.rhs, rep.a,
                rep.trace_distance);
    }
    emit("fannes.csv", table);
  }

  void ssa() {
    Rng rng(cfg_.seed);
    const std::size_t trials = cfg_.trials ? cfg_.trials : 1000;
    const Block whole = Block::interval(0, 3);
    CsvTable table({"trial", "site1", "site2", "site3", "lhs", "rhs"});
    for (std::size_t i = 0; i < trials; ++i) {
      const DensityMatrix rho = dm_from_vector(random_pure_state(rng, whole));
      for (SiteIndex x = 0; x < 4; ++x)
        for (SiteIndex y = 0; y < 4; ++y)
          for (SiteIndex z = 0; z < 4; ++z) {
            if (x == y || y == z || x == z) continue;
            const SsaReport rep = strong_subadditivity_check(rho, Block{x}, Block{y}, Block{z});
            table.add(static_cast<std::uint64_t>(i), x, y, z, rep.lhs, rep.rhs);
          }
    }
    emit("ssa.csv", table);
  }

  void histories() {
    std::vector<PurificationRow> rows;
    for (auto n : cfg_.n_schedule) {
      const MeasurementModel m{cfg_.mu, cfg_.p1, cfg_.p2, n};
      weight_normalization(m);
      detail::ensure(std::abs(posterior_mean(m) - m.mu) <= 1e-12, "histories: posterior is not a martingale");
      mean_entropy_average(m, {std::numbers::ln2, 0.0});
      rows.push_back(purification_stats(m, cfg_.eps));
    }
    emit("purification.csv", purification_table(rows));
  }

  void collapse() {
    Rng rng(cfg_.seed);
    const std::size_t trials = cfg_.trials ? cfg_.trials : 100;
    const Block b = Block::interval(0, 2);
    const Operator p = embed(PauliString::single(0, Axis::Z), b);
    const Operator up = 0.5 * (Operator::identity(b) + p);
    const Operator down = Operator::identity(b) - up;
    CsvTable table({"trial", "branches", "s", "s_av", "margin"});
    for (std::size_t i = 0; i < trials; ++i) {
      const DensityMatrix r = random_density(rng, b);
      const bool control = i == 0;  // first trial keeps a single branch
      CMatrix m = up.matrix() * r.matrix() * up.matrix();
      if (!control) m += down.matrix() * r.matrix() * down.matrix();
      m /= m.trace().real();
      const CollapseReport rep = finite_collapse_average(DensityMatrix(kTrusted, b, m), {up, down});
      table.add(static_cast<std::uint64_t>(i), control ? 1 : 2, rep.s, rep.s_av, rep.s - rep.s_av);
    }
    emit("collapse.csv", table);
  }

  void meanfield() {
    const CouplingSpec spec = resolve_coupling(cfg_, MeanField{1.0, 0.0});
    const auto* mf = std::get_if<MeanField>(&spec);
    detail::require(mf != nullptr, "meanfield: coupling variant must be meanfield");
    const auto traj = meanfield_flow(mf->a, mf->c, {cfg_.m1, cfg_.m2, cfg_.m3, 0.0}, cfg_.t_end, cfg_.dt,
                                     cfg_.record_every);
    emit("meanfield.csv", trajectory_table(traj), {{"coupling", descriptor(spec)}});
  }

  void baker() {
    const BakerRun run = baker_coarse_grain(GridDensity::left_half(cfg_.grid_bits), cfg_.steps, cfg_.coarse_level);
    emit("baker.csv", baker_table(run));
  }

  Config cfg_;
  std::string current_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinlaw experiment runner"};
  app.set_config("--config", "", "INI/TOML file; keys are the long flag names");
  app.require_subcommand(0, 1);
  app.fallthrough();

  Config cfg;
  std::string experiment;
  app.add_option("--experiment", experiment, "Experiment to run (alternative to a subcommand)");
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads (0 = hardware)")->capture_default_str();

  app.add_option("--variant", cfg.variant, "exponential | dyson | finite | meanfield");
  app.add_option("--xi", cfg.xi, "Exponential base xi > 1");
  app.add_option("--alpha", cfg.alpha, "Dyson exponent alpha > 1");
  app.add_option("--J", cfg.J, "Finite-range strength");
  app.add_option("--L", cfg.L, "Finite-range range");
  app.add_option("--a", cfg.a, "Mean-field a");
  app.add_option("--c", cfg.c, "Mean-field c");
  app.add_option("--model", cfg.model, "gim | xy | heisenberg");

  app.add_option("--t-min", cfg.t_min);
  app.add_option("--t-max", cfg.t_max);
  app.add_option("--t-points", cfg.t_points);
  app.add_option("--times", cfg.times, "Explicit time list")->delimiter(',');
  app.add_option("--tol", cfg.tol)->capture_default_str();
  app.add_option("--N", cfg.N, "Chain length for entropy-growth")->capture_default_str();
  app.add_option("--block-sizes", cfg.block_sizes)->delimiter(',')->capture_default_str();
  app.add_option("--lr-sites", cfg.lr_sites)->capture_default_str();
  app.add_option("--offsets", cfg.offsets)->delimiter(',')->capture_default_str();
  app.add_option("--lambda", cfg.lambda)->capture_default_str();
  app.add_option("--inner-radii", cfg.inner_radii)->delimiter(',')->capture_default_str();
  app.add_option("--outer-radius", cfg.outer_radius)->capture_default_str();
  app.add_option("--f-nu", cfg.f_nu)->capture_default_str();
  app.add_option("--f-eps", cfg.f_eps)->capture_default_str();
  app.add_option("--trials", cfg.trials, "0 = experiment default");
  app.add_option("--max-sites", cfg.max_sites)->capture_default_str();
  app.add_option("--mu", cfg.mu)->capture_default_str();
  app.add_option("--p1", cfg.p1)->capture_default_str();
  app.add_option("--p2", cfg.p2)->capture_default_str();
  app.add_option("--eps", cfg.eps)->capture_default_str();
  app.add_option("--n-schedule", cfg.n_schedule)->delimiter(',')->capture_default_str();
  app.add_option("--m1", cfg.m1)->capture_default_str();
  app.add_option("--m2", cfg.m2)->capture_default_str();
  app.add_option("--m3", cfg.m3)->capture_default_str();
  app.add_option("--t-end", cfg.t_end)->capture_default_str();
  app.add_option("--dt", cfg.dt)->capture_default_str();
  app.add_option("--record-every", cfg.record_every)->capture_default_str();
  app.add_option("--grid-bits", cfg.grid_bits)->capture_default_str();
  app.add_option("--coarse-level", cfg.coarse_level)->capture_default_str();
  app.add_option("--steps", cfg.steps)->capture_default_str();

  for (const auto& e : kExperiments) app.add_subcommand(e, "Run the " + e + " experiment")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  for (const auto* sub : app.get_subcommands()) experiment = sub->get_name();
  if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end()) {
    std::cerr << (experiment.empty() ? "error: no experiment given" : "error: unknown experiment '" + experiment + "'")
              << "\n\n"
              << app.help();
    return 1;
  }
  cfg.experiment = experiment;

  try {
    Runner(cfg).run(experiment);
  } catch (const CheckFailure& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
