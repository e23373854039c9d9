#include "pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>
#include <set>

#include "sthm/recon/study.hpp"

namespace sthm::run {
namespace {

using clock_type = std::chrono::steady_clock;

double since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string samples_name(double K) { return "samples_K" + tag(K) + ".sthm"; }
std::string boundary_name(double K, double k) { return "boundary_K" + tag(K) + "_k" + tag(k) + ".sthm"; }
std::string farfield_name(double K, double k) { return "farfield_K" + tag(K) + "_k" + tag(k) + ".sthm"; }
std::string corr_name(DataMode m, double K) { return std::string(mode_name(m)) + "_corr_K" + tag(K) + ".csv"; }
std::string spectrum_name(DataMode m, double K) { return std::string("spectrum_") + mode_name(m) + "_K" + tag(K) + ".sthm"; }
std::string spectrum_se_name(DataMode m, double K) {
  return std::string("spectrum_se_") + mode_name(m) + "_K" + tag(K) + ".sthm";
}
std::string field_name(DataMode m, double K) { return std::string("field_") + mode_name(m) + "_K" + tag(K) + ".sthm"; }

constexpr const char* kAxes[] = {"x", "y", "z"};

const std::vector<std::string> kStudyColumns{"K", "N", "mode", "epsilon", "epsilon_at_K", "E", "l2_error", "rho_cut", "taper"};

std::vector<std::string> study_cells(const StudyRow& r) {
  using io::format_double;
  return {format_double(r.K), std::to_string(r.N), mode_name(r.mode), format_double(r.epsilon),
          format_double(r.epsilon_at_K), format_double(r.E), format_double(r.l2_error), format_double(r.rho_cut),
          r.taper ? "1" : "0"};
}

template <int D>
std::vector<std::size_t> grid_shape(const Grid<D>& g) {
  return std::vector<std::size_t>(D, static_cast<std::size_t>(g.n()));
}

template <int D>
struct Context {
  const Invocation& inv;
  const io::RunConfig& cfg;
  Grid<D> grid;
  std::shared_ptr<const SymbolSpec<D>> spec;
  PipelineOptions o;
  Emitter& out;
  std::ostream& log;
  std::set<Command> done;

  std::vector<DataMode> modes() const {
    std::vector<DataMode> m;
    if (cfg.near()) m.push_back(DataMode::near);
    if (cfg.far()) m.push_back(DataMode::far);
    return m;
  }
};

template <int D>
Context<D> make_context(const Invocation& inv, Emitter& out, std::ostream& log) {
  const auto& c = inv.config;
  const Grid<D> grid(c.grid_n, c.grid_L);
  auto h = make_strength<D>(grid, c.r0, c.amplitude, c.sobolev_s);
  auto spec = std::make_shared<const SymbolSpec<D>>(h, c.order_m, c.delta);
  PipelineOptions o;
  o.R = c.surface_radius;
  o.r_domain = c.domain_radius;
  o.n_xi = c.xi_grid;
  o.rho_cut = c.rho_cut;
  o.taper = c.taper;
  o.k_fractions = c.k_fractions;
  o.far_density = c.far_density;
  o.margin = c.margin;
  o.workers = inv.workers;
  return Context<D>{inv, c, grid, spec, o, out, log, {}};
}

template <int D>
void run_command(Context<D>& ctx, Command c);

// Runs the upstream stage when any listed file is absent and dependencies may be regenerated.
template <int D>
void require(Context<D>& ctx, Command current, Command upstream, const std::vector<std::string>& files) {
  for (const auto& f : files) {
    if (ctx.out.has(f)) continue;
    if (!ctx.inv.with_deps) throw MissingDependency(command_name(current), f);
    run_command<D>(ctx, upstream);
    return;
  }
}

template <int D>
void sample_stage(Context<D>& ctx) {
  const auto t0 = clock_type::now();
  const auto& h = ctx.spec->strength();
  ctx.out.array("strength.sthm", h.values, grid_shape<D>(ctx.grid));
  const auto support = support_of<D>(h);
  std::vector<double> pts;
  for (const auto& p : support.points) pts.insert(pts.end(), p.begin(), p.end());
  ctx.out.array("support_points.sthm", pts, {support.size(), std::size_t(D)});
  for (double K : ctx.cfg.K) {
    const auto t1 = clock_type::now();
    const auto e = sample_support_ensemble<D>(ctx.spec, ctx.grid, ctx.cfg.seed, study_stage(K), ctx.cfg.N, ctx.o.workers);
    const std::vector<double> v(e.values.data(), e.values.data() + e.values.size());
    ctx.out.array(samples_name(K), v, {e.size(), e.support.size()});
    ctx.out.time("sample.K" + tag(K), since(t1));
    ctx.log << "sample K=" << K << " N=" << e.size() << " cells=" << e.support.size() << "\n";
  }
  ctx.out.time("sample", since(t0));
}

template <int D>
SupportEnsemble<D> load_ensemble(Context<D>& ctx, double K) {
  const auto a = ctx.out.input_array(samples_name(K));
  SupportEnsemble<D> e{ctx.spec, ctx.grid, support_of<D>(ctx.spec->strength()), Eigen::MatrixXd(), {}};
  const std::vector<std::size_t> want{ctx.cfg.N, e.support.size()};
  if (a.dtype != io::DType::f8 || a.shape != want)
    throw ConsistencyError(samples_name(K) + " does not match the configured ensemble and support");
  e.values = Eigen::Map<const Eigen::MatrixXd>(a.real.data(), static_cast<Eigen::Index>(want[1]),
                                               static_cast<Eigen::Index>(want[0]));
  for (std::size_t r = 0; r < ctx.cfg.N; ++r) e.seeds.push_back(derive_seed(ctx.cfg.seed, study_stage(K), r));
  return e;
}

template <int D>
std::vector<std::string> forward_files(const Context<D>& ctx) {
  std::vector<std::string> files;
  for (double K : ctx.cfg.K)
    for (DataMode m : ctx.modes())
      for (double f : ctx.cfg.k_fractions)
        files.push_back(m == DataMode::near ? boundary_name(K, f * K) : farfield_name(K, f * K));
  return files;
}

template <int D>
std::vector<double> far_wavenumbers(const Context<D>& ctx, const PolarDesign<D>& design, double k) {
  std::vector<double> ks{k};
  for (double eta : far_slice_etas<D>(design, k, ctx.o)) ks.push_back((1.0 + eta) * k);
  return ks;
}

template <int D>
void forward_stage(Context<D>& ctx) {
  std::vector<std::string> deps;
  for (double K : ctx.cfg.K) deps.push_back(samples_name(K));
  require<D>(ctx, Command::forward, Command::sample, deps);
  ctx.out.set_stage("forward");
  const auto t0 = clock_type::now();
  for (double K : ctx.cfg.K) {
    const auto e = load_ensemble<D>(ctx, K);
    const std::size_t n = e.size();
    for (DataMode m : ctx.modes()) {
      const auto xi = xi_grid_for<D>(ctx.grid, m, K, ctx.o);
      for (double f : ctx.cfg.k_fractions) {
        const double k = f * K;
        if (m == DataMode::near) {
          auto surface = std::make_shared<const SurfaceGrid<D>>(make_surface_grid<D>(ctx.o.R, k));
          const auto ds = make_boundary_dataset<D>(e, surface, {k}, ctx.o.workers);
          const std::size_t nodes = ds.nodes();
          std::vector<cplx> buf;
          buf.reserve(2 * n * nodes);
          for (std::size_t r = 0; r < n; ++r) {
            buf.insert(buf.end(), ds.u.begin() + ds.offset(r, 0), ds.u.begin() + ds.offset(r, 0) + nodes);
            buf.insert(buf.end(), ds.dnu.begin() + ds.offset(r, 0), ds.dnu.begin() + ds.offset(r, 0) + nodes);
          }
          ctx.out.array(boundary_name(K, k), buf, {n, 2, nodes});
        } else {
          const auto design = far_design_for<D>(xi, K, ctx.o);
          const auto ks = far_wavenumbers<D>(ctx, design, k);
          const auto ds = make_farfield_dataset<D>(e, design.directions, ks, ctx.o.workers);
          ctx.out.array(farfield_name(K, k), ds.values, {n, ks.size(), design.directions.size()});
        }
      }
      ctx.log << "forward K=" << K << " mode=" << mode_name(m) << "\n";
    }
  }
  ctx.out.time("forward", since(t0));
}

template <int D>
io::CsvTable near_table() {
  std::vector<std::string> cols{"k"};
  for (const char* t : {"theta1", "theta2"})
    for (int a = 0; a < D; ++a) cols.push_back(std::string(t) + "_" + kAxes[a]);
  for (int j = 1; j <= 4; ++j) {
    cols.push_back("I" + std::to_string(j) + "_re");
    cols.push_back("I" + std::to_string(j) + "_im");
  }
  for (int j = 1; j <= 4; ++j) cols.push_back("se_I" + std::to_string(j));
  cols.push_back("se_sum");
  cols.push_back("N");
  return io::CsvTable(cols);
}

template <int D>
io::CsvTable far_table() {
  std::vector<std::string> cols{"k", "eta"};
  for (int a = 0; a < D; ++a) cols.push_back(std::string("xhat_") + kAxes[a]);
  for (const char* c : {"corr_re", "corr_im", "se", "N"}) cols.push_back(c);
  return io::CsvTable(cols);
}

template <int D>
void add_row(io::CsvTable& t, const NearCorrRecord<D>& r) {
  using io::format_double;
  std::vector<std::string> c{format_double(r.k)};
  for (int a = 0; a < D; ++a) c.push_back(format_double(r.theta1[a]));
  for (int a = 0; a < D; ++a) c.push_back(format_double(r.theta2[a]));
  for (const auto& v : r.I) {
    c.push_back(format_double(v.real()));
    c.push_back(format_double(v.imag()));
  }
  for (double s : r.std_error) c.push_back(format_double(s));
  c.push_back(format_double(r.sum_std_error));
  c.push_back(std::to_string(r.N));
  t.add(std::move(c));
}

template <int D>
void add_row(io::CsvTable& t, const FarCorrRecord<D>& r) {
  using io::format_double;
  std::vector<std::string> c{format_double(r.k), format_double(r.eta)};
  for (int a = 0; a < D; ++a) c.push_back(format_double(r.xhat[a]));
  c.push_back(format_double(r.corr.real()));
  c.push_back(format_double(r.corr.imag()));
  c.push_back(format_double(r.std_error));
  c.push_back(std::to_string(r.N));
  t.add(std::move(c));
}

template <int D>
std::vector<std::string> correlate_files(const Context<D>& ctx) {
  std::vector<std::string> files;
  for (double K : ctx.cfg.K)
    for (DataMode m : ctx.modes()) files.push_back(corr_name(m, K));
  return files;
}

template <int D>
void correlate_stage(Context<D>& ctx) {
  require<D>(ctx, Command::correlate, Command::forward, forward_files<D>(ctx));
  ctx.out.set_stage("correlate");
  const auto t0 = clock_type::now();
  const std::size_t n = ctx.cfg.N;
  for (double K : ctx.cfg.K) {
    for (DataMode m : ctx.modes()) {
      const auto xi = xi_grid_for<D>(ctx.grid, m, K, ctx.o);
      auto table = m == DataMode::near ? near_table<D>() : far_table<D>();
      for (double f : ctx.cfg.k_fractions) {
        const double k = f * K;
        std::vector<std::uint64_t> seeds(n);
        for (std::size_t r = 0; r < n; ++r) seeds[r] = derive_seed(ctx.cfg.seed, study_stage(K), r);
        if (m == DataMode::near) {
          auto surface = std::make_shared<const SurfaceGrid<D>>(make_surface_grid<D>(ctx.o.R, k));
          const auto a = ctx.out.input_array(boundary_name(K, k));
          const std::size_t nodes = surface->size();
          if (a.dtype != io::DType::c16 || a.shape != std::vector<std::size_t>{n, 2, nodes})
            throw ConsistencyError(boundary_name(K, k) + " does not match the configured surface and ensemble");
          BoundaryDataset<D> ds{surface, {k}, seeds, std::vector<cplx>(n * nodes), std::vector<cplx>(n * nodes)};
          for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < nodes; ++i) {
              ds.u[r * nodes + i] = a.complex[(2 * r) * nodes + i];
              ds.dnu[r * nodes + i] = a.complex[(2 * r + 1) * nodes + i];
            }
          const auto design = near_slice_design<D>(xi, k, ctx.o);
          for (const auto& rec : estimate_near_design<D>(ds, k, design.directions, design.pairs, ctx.o.workers))
            add_row<D>(table, rec);
        } else {
          const auto design = far_design_for<D>(xi, K, ctx.o);
          const auto ks = far_wavenumbers<D>(ctx, design, k);
          const auto a = ctx.out.input_array(farfield_name(K, k));
          if (a.dtype != io::DType::c16 || a.shape != std::vector<std::size_t>{n, ks.size(), design.directions.size()})
            throw ConsistencyError(farfield_name(K, k) + " does not match the configured far-field design");
          const FarFieldDataset<D> ds{design.directions, ks, seeds, far_constant<D>(), ctx.cfg.order_m, a.complex};
          const auto etas = far_slice_etas<D>(design, k, ctx.o);
          for (const auto& rec : estimate_far_design<D>(ds, k, etas, design.directions, ctx.o.workers))
            add_row<D>(table, rec);
        }
      }
      ctx.out.table(corr_name(m, K), table);
      ctx.log << "correlate K=" << K << " mode=" << mode_name(m) << " rows=" << table.rows() << "\n";
    }
  }
  ctx.out.time("correlate", since(t0));
}

template <int D>
Point<D> read_point(const io::CsvTable& t, std::size_t r, const std::string& prefix) {
  Point<D> p{};
  for (int a = 0; a < D; ++a) p[a] = t.number(r, prefix + "_" + kAxes[a]);
  return p;
}

std::size_t read_count(const io::CsvTable& t, std::size_t r) {
  const double v = t.number(r, "N");
  if (!(v >= 0.0) || v != std::floor(v)) throw FormatError("N must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

std::size_t slice_of(const std::vector<double>& fractions, double K, double k) {
  for (std::size_t j = 0; j < fractions.size(); ++j)
    if (std::abs(fractions[j] * K - k) <= 1e-9 * K) return j;
  throw FormatError("correlation row at k=" + tag(k) + " is not a configured design wavenumber");
}

template <int D>
std::vector<std::vector<NearCorrRecord<D>>> read_near(Context<D>& ctx, double K) {
  const auto t = ctx.out.input_table(corr_name(DataMode::near, K));
  std::vector<std::vector<NearCorrRecord<D>>> slices(ctx.cfg.k_fractions.size());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    NearCorrRecord<D> rec;
    rec.k = t.number(r, "k");
    rec.theta1 = read_point<D>(t, r, "theta1");
    rec.theta2 = read_point<D>(t, r, "theta2");
    for (int j = 0; j < 4; ++j) {
      const std::string s = "I" + std::to_string(j + 1);
      rec.I[j] = cplx(t.number(r, s + "_re"), t.number(r, s + "_im"));
      rec.std_error[j] = t.number(r, "se_" + s);
    }
    rec.sum_std_error = t.number(r, "se_sum");
    rec.N = read_count(t, r);
    slices[slice_of(ctx.cfg.k_fractions, K, rec.k)].push_back(rec);
  }
  return slices;
}

template <int D>
std::vector<std::vector<FarCorrRecord<D>>> read_far(Context<D>& ctx, double K) {
  const auto t = ctx.out.input_table(corr_name(DataMode::far, K));
  const double cd2 = std::norm(far_constant<D>());
  std::vector<std::vector<FarCorrRecord<D>>> slices(ctx.cfg.k_fractions.size());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    FarCorrRecord<D> rec{t.number(r, "k"),
                         t.number(r, "eta"),
                         read_point<D>(t, r, "xhat"),
                         cplx(t.number(r, "corr_re"), t.number(r, "corr_im")),
                         t.number(r, "se"),
                         read_count(t, r),
                         ctx.cfg.order_m,
                         cd2};
    slices[slice_of(ctx.cfg.k_fractions, K, rec.k)].push_back(rec);
  }
  return slices;
}

template <int D>
void emit_outcome(Context<D>& ctx, const ModeOutcome<D>& out, double K) {
  const auto& s = out.spectrum;
  ctx.out.array(spectrum_name(out.mode, K), s.values, grid_shape<D>(s.grid()));
  ctx.out.array(spectrum_se_name(out.mode, K), s.std_error, grid_shape<D>(s.grid()));
  ctx.out.array(field_name(out.mode, K), out.recon.field.values, grid_shape<D>(out.recon.field.grid));
}

template <int D>
StudyRow row_of(const ModeOutcome<D>& out, double K, std::size_t N, bool taper) {
  return {K, N, out.mode, out.epsilon, out.epsilon_at_K, out.budget.E, out.recon.l2_error, out.recon.rho_cut, taper, 0.0};
}

template <int D>
void reconstruct_stage(Context<D>& ctx) {
  require<D>(ctx, Command::reconstruct, Command::correlate, correlate_files<D>(ctx));
  ctx.out.set_stage("reconstruct");
  const auto t0 = clock_type::now();
  io::CsvTable table(kStudyColumns);
  for (double K : ctx.cfg.K) {
    for (DataMode m : ctx.modes()) {
      const auto out = m == DataMode::near ? conclude_near<D>(*ctx.spec, ctx.grid, read_near<D>(ctx, K), K, ctx.o)
                                           : conclude_far<D>(*ctx.spec, ctx.grid, read_far<D>(ctx, K), K, ctx.o);
      emit_outcome<D>(ctx, out, K);
      table.add(study_cells(row_of<D>(out, K, ctx.cfg.N, ctx.o.taper)));
      ctx.log << "reconstruct K=" << K << " mode=" << mode_name(m) << " l2_error=" << out.recon.l2_error << "\n";
    }
  }
  ctx.out.table("recon.csv", table);
  ctx.out.time("reconstruct", since(t0));
}

template <int D>
void study_run(Context<D>& ctx) {
  const auto t0 = clock_type::now();
  StudyPlan plan{ctx.cfg.K, ctx.cfg.N, ctx.cfg.near(), ctx.cfg.far(), ctx.cfg.seed};
  const auto res = stability_study<D>(ctx.spec, ctx.grid, plan, ctx.o, true);
  io::CsvTable table(kStudyColumns);
  io::CsvTable timing({"K", "mode", "seconds"});
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& row = res.rows[i];
    table.add(study_cells(row));
    timing.add({io::format_double(row.K), mode_name(row.mode), io::format_double(row.seconds)});
    emit_outcome<D>(ctx, res.outcomes[i], row.K);
    ctx.out.time(std::string("study.") + mode_name(row.mode) + ".K" + tag(row.K), row.seconds);
    ctx.log << "study K=" << row.K << " mode=" << mode_name(row.mode) << " epsilon=" << row.epsilon
            << " l2_error=" << row.l2_error << " rho_cut=" << row.rho_cut << "\n";
  }
  ctx.out.table("study.csv", table);
  ctx.out.table("study_timing.csv", timing);
  nlohmann::json slopes = nlohmann::json::object();
  if (res.slope_near) slopes["near"] = *res.slope_near;
  if (res.slope_far) slopes["far"] = *res.slope_far;
  ctx.out.extra()["loglog_slope"] = slopes;
  ctx.out.time("study", since(t0));
}

template <int D>
void run_command(Context<D>& ctx, Command c) {
  if (ctx.done.count(c)) return;
  ctx.out.set_stage(command_name(c));
  switch (c) {
    case Command::sample: sample_stage<D>(ctx); break;
    case Command::forward: forward_stage<D>(ctx); break;
    case Command::correlate: correlate_stage<D>(ctx); break;
    case Command::reconstruct: reconstruct_stage<D>(ctx); break;
    case Command::study: study_run<D>(ctx); break;
  }
  ctx.done.insert(c);
}

}  // namespace

template <int D>
void run_stages(const Invocation& inv, Emitter& out, std::ostream& log) {
  auto ctx = make_context<D>(inv, out, log);
  run_command<D>(ctx, inv.command);
  nlohmann::json stages = nlohmann::json::object();
  for (double K : inv.config.K) stages["K" + tag(K)] = study_stage(K);
  out.extra()["seeds"] = {{"master", inv.config.seed},
                          {"rule", "splitmix64(splitmix64(splitmix64(master) ^ stage) ^ index)"},
                          {"realizations", inv.config.N},
                          {"stages", stages}};
}

template void run_stages<2>(const Invocation&, Emitter&, std::ostream&);
template void run_stages<3>(const Invocation&, Emitter&, std::ostream&);

nlohmann::json tolerances(const io::RunConfig& c) {
  return {{"design_margin", c.margin},
          {"wavenumber_match_rel", 1e-9},
          {"direction_match_abs", 1e-12},
          {"direction_key_quantum", 1e-9},
          {"taper_band", {0.8, 1.0}},
          {"far_max_spacing_over_dxi", 4.0},
          {"identity_floor", 1e-14}};
}

}  // namespace sthm::run
