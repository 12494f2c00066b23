// lerayflux: pseudo-spectral Leray-alpha gaseous-star simulator and energy
// diagnostics (spectral flux, Duchon-Robert defects, Besov regularity).
//
// Exit codes: 0 ok, 2 config, 3 CFL, 4 I/O, 5 shape/dimension, 6 resolution.

#include <atomic>
#include <mutex>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lerayflux/lerayflux.hpp"

namespace fs = std::filesystem;
using namespace lerayflux;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = "out";
    int jobs = 1;
    std::vector<std::string> sets;
};

/// Deterministic parallel map: results are indexed, worker order irrelevant.
template <typename Fn>
void parallel_for(int jobs, std::size_t count, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int nthreads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < nthreads; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

class Manifest {
public:
    Manifest(const std::string& command, const GlobalOptions& g, const std::string& config_hash) {
        doc_["artifact"] = "lerayflux";
        doc_["version"] = kVersion;
        doc_["command"] = command;
        doc_["config_hash"] = config_hash;
        doc_["overrides"] = g.sets;
        std::string idsrc = command + ":" + config_hash;
        for (const auto& s : g.sets) idsrc += ":" + s;
        doc_["run_id"] = hex64(fnv1a(idsrc.data(), idsrc.size()));
        doc_["files"] = ordered_json::array();
    }
    void add(const fs::path& p) {
        ordered_json entry;
        entry["name"] = p.filename().string();
        entry["fnv1a"] = hex64(fnv1a_file(p));
        doc_["files"].push_back(entry);
    }
    void write(const fs::path& dir) {
        std::ofstream os(dir / "manifest.json");
        if (!os) throw IoError("cannot write manifest in '" + dir.string() + "'");
        os << doc_.dump(2) << '\n';
    }

private:
    ordered_json doc_;
};

fs::path ensure_out_dir(const GlobalOptions& g) {
    fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
    return dir;
}

RunConfig load_run_config(const GlobalOptions& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required for this command");
    ParsedConfig parsed = parse_config_file(g.config_path);
    apply_overrides(parsed, g.sets);
    return make_run_config(parsed);
}

struct LoadedField {
    SpectralField f;
    SnapshotHeader header;
};

LoadedField load_spectral(const std::string& path) {
    Snapshot snap = read_snapshot(path);
    return {transform(snap.field), std::move(snap.header)};
}

std::vector<std::pair<std::string, std::string>> param_header(const ModelParams& p) {
    return {{"alpha", format_double(p.alpha)},       {"nu", format_double(p.nu)},
            {"diff_d", format_double(p.diff_d)},     {"K", format_double(p.K)},
            {"A", format_double(p.A)},               {"theta_i", format_double(p.theta_i)},
            {"theta_bar", format_double(p.theta_bar)}};
}

std::string step_tag(long long step) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06lld", step);
    return buf;
}

// -----------------------------------------------------------------------
// simulate
// -----------------------------------------------------------------------

int cmd_simulate(const GlobalOptions& g) {
    RunConfig rc = load_run_config(g);
    fs::path dir = ensure_out_dir(g);
    SimulationOutput out = run_simulation(rc);

    Manifest manifest("simulate", g, rc.config_hash);
    {
        CsvWriter csv(dir / "energy.csv", "t,E_u,E_Z,E_total,max_div");
        for (const auto& s : out.series) csv.row({s.t, s.E_u, s.E_Z, s.E_total, s.max_div});
    }
    manifest.add(dir / "energy.csv");

    for (const auto& stored : out.snapshots) {
        const auto params = param_header(rc.params);
        const fs::path up = dir / ("state_" + step_tag(stored.step) + "_u.snap");
        const fs::path zp = dir / ("state_" + step_tag(stored.step) + "_z.snap");
        write_snapshot(up, inverse_transform(stored.state.u), stored.state.t, params);
        write_snapshot(zp, inverse_transform(stored.state.Z), stored.state.t, params);
        manifest.add(up);
        manifest.add(zp);
    }
    manifest.write(dir);

    std::cout << "simulate: steps=" << out.steps << " dt=" << format_double(out.dt)
              << " E0=" << format_double(out.series.front().E_total)
              << " E_end=" << format_double(out.series.back().E_total)
              << " max_rel_drift=" << format_double(out.drift)
              << " max_div=" << format_double(out.series.back().max_div) << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// flux
// -----------------------------------------------------------------------

int cmd_flux(const GlobalOptions& g, const std::string& snapshot, std::vector<double> kappas,
             int pad, double fit_lo, double fit_hi) {
    LoadedField u = load_spectral(snapshot);
    if (u.f.components() != u.f.grid().dim())
        throw ShapeError("flux: snapshot must hold a vector field");
    if (kappas.empty()) kappas = RunConfig{}.kappas;

    std::vector<SpectralField> tensor = velocity_tensor(u.f, pad);
    std::vector<double> pi(kappas.size());
    parallel_for(g.jobs, kappas.size(), [&](std::size_t i) {
        pi[i] = flux_pi_with_tensor(u.f, tensor, kappas[i], pad);
    });

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("flux", g, "");
    {
        CsvWriter csv(dir / "flux.csv", "kappa,Pi");
        for (std::size_t i = 0; i < kappas.size(); ++i) csv.row({kappas[i], pi[i]});
    }
    manifest.add(dir / "flux.csv");
    manifest.write(dir);

    std::cout << "flux: n=" << u.f.grid().n() << " kappas=" << kappas.size();
    if (fit_lo > 0.0 || fit_hi > 0.0) {
        try {
            LineFit f = fit_loglog(kappas, pi, fit_lo, fit_hi);
            std::cout << " decay_slope=" << format_double(f.slope);
        } catch (const std::invalid_argument&) {
            std::cout << " decay_slope=nan";
        }
    }
    std::cout << " Pi_max=" << format_double(*std::max_element(pi.begin(), pi.end(),
                                                               [](double a, double b) {
                                                                   return std::abs(a) < std::abs(b);
                                                               }))
              << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// defect
// -----------------------------------------------------------------------

int cmd_defect(const GlobalOptions& g, const std::string& snapshot, const std::string& z_path,
               std::vector<double> eps_list, const std::string& form, int quad, double alpha_flag) {
    LoadedField u = load_spectral(snapshot);
    if (u.f.components() != u.f.grid().dim())
        throw ShapeError("defect: snapshot must hold a vector field");
    const double alpha = alpha_flag >= 0.0 ? alpha_flag : u.header.find_double("alpha", 0.0);
    SpectralField v = helmholtz(u.f, alpha, HelmholtzDirection::Invert);

    std::optional<SpectralField> z;
    if (!z_path.empty()) {
        LoadedField zf = load_spectral(z_path);
        if (zf.f.grid() != u.f.grid()) throw ShapeError("defect: u and Z grids differ");
        if (zf.f.components() != 1) throw ShapeError("defect: Z must be scalar");
        z = std::move(zf.f);
    }

    DefectOptions opt;
    opt.quad_points = quad;
    if (form == "both") opt.form = DefectForm::Both;
    else if (form == "increment") opt.form = DefectForm::Increment;
    else if (form == "algebraic") opt.form = DefectForm::Algebraic;
    else throw ConfigError("defect: form must be both|increment|algebraic");
    if (eps_list.empty()) eps_list = RunConfig{}.eps_list;

    std::vector<DefectEntry> entries(eps_list.size(),
                                     DefectEntry{});
    parallel_for(g.jobs, eps_list.size(), [&](std::size_t i) {
        entries[i] = defect(v, u.f, z ? &*z : nullptr, eps_list[i], opt);
    });

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("defect", g, "");
    {
        CsvWriter csv(dir / "defect.csv", "eps,form,D1_abs,D1_signed,D2_abs,D2_signed,discrepancy");
        for (const auto& e : entries) {
            if (opt.form != DefectForm::Algebraic) {
                std::string line = format_double(e.eps) + ",increment," +
                                   format_double(e.d1_increment.abs) + "," +
                                   format_double(e.d1_increment.net) + "," +
                                   format_double(e.d2_increment.abs) + "," +
                                   format_double(e.d2_increment.net) + "," +
                                   format_double(e.d1_discrepancy);
                csv.raw_row(line);
            }
            if (opt.form != DefectForm::Increment) {
                std::string line = format_double(e.eps) + ",algebraic," +
                                   format_double(e.d1_algebraic.abs) + "," +
                                   format_double(e.d1_algebraic.net) + "," +
                                   format_double(e.d2_algebraic.abs) + "," +
                                   format_double(e.d2_algebraic.net) + "," +
                                   format_double(e.d1_discrepancy);
                csv.raw_row(line);
            }
        }
    }
    manifest.add(dir / "defect.csv");
    manifest.write(dir);

    std::cout << "defect: alpha=" << format_double(alpha) << " entries=" << entries.size();
    if (entries.size() >= 2 && opt.form != DefectForm::Increment) {
        std::vector<double> xs, ys;
        for (const auto& e : entries) {
            xs.push_back(e.eps);
            ys.push_back(e.d1_algebraic.abs);
        }
        try {
            std::cout << " D1_abs_slope=" << format_double(fit_loglog(xs, ys).slope);
        } catch (const std::invalid_argument&) {
        }
    }
    std::cout << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// besov
// -----------------------------------------------------------------------

int cmd_besov(const GlobalOptions& g, const std::string& snapshot, double s, double p,
              const std::string& q_text, std::vector<double> xis, int directions) {
    LoadedField u = load_spectral(snapshot);
    const double q = (q_text == "inf" || q_text == "infinity")
                         ? std::numeric_limits<double>::infinity()
                         : std::stod(q_text);
    DyadicPartition part(u.f.grid());
    BesovReport rep = besov_report(u.f, s, p, q, part);
    if (xis.empty()) xis = RunConfig{}.xi_list;
    StructureCurve curve = structure_function(u.f, p, xis, directions);
    RegularityEstimate reg{0.0, 0.0};
    bool have_reg = true;
    try {
        reg = regularity_fit(curve);
    } catch (const std::invalid_argument&) {
        have_reg = false;
    }

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("besov", g, "");
    {
        CsvWriter csv(dir / "besov.csv", "j,block_norm");
        for (std::size_t i = 0; i < rep.block_norms.size(); ++i)
            csv.row({static_cast<double>(rep.j[i]), rep.block_norms[i]});
    }
    manifest.add(dir / "besov.csv");
    {
        CsvWriter csv(dir / "besov_summary.csv",
                      "s,p,q,norm,block_exponent,block_stderr,structure_exponent,structure_stderr");
        csv.row({s, p, q, rep.norm, rep.block_exponent ? rep.block_exponent->slope : 0.0,
                 rep.block_exponent ? rep.block_exponent->slope_stderr : 0.0,
                 have_reg ? reg.exponent : 0.0, have_reg ? reg.stderr_ : 0.0});
    }
    manifest.add(dir / "besov_summary.csv");
    {
        CsvWriter csv(dir / "structure.csv", "xi,S_p");
        for (std::size_t i = 0; i < curve.xi.size(); ++i) csv.row({curve.xi[i], curve.value[i]});
    }
    manifest.add(dir / "structure.csv");
    manifest.write(dir);

    std::cout << "besov: s=" << format_double(s) << " p=" << format_double(p) << " q=" << q_text
              << " norm=" << format_double(rep.norm) << " fitted_exponent="
              << format_double(have_reg ? reg.exponent : 0.0) << " stderr="
              << format_double(have_reg ? reg.stderr_ : 0.0) << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// increments
// -----------------------------------------------------------------------

int cmd_increments(const GlobalOptions& g, const std::string& snapshot, const std::string& z_path,
                   std::vector<double> xis, int directions, double alpha_flag) {
    LoadedField u = load_spectral(snapshot);
    if (u.f.components() != u.f.grid().dim())
        throw ShapeError("increments: snapshot must hold a vector field");
    const double alpha = alpha_flag >= 0.0 ? alpha_flag : u.header.find_double("alpha", 0.0);
    SpectralField v = helmholtz(u.f, alpha, HelmholtzDirection::Invert);
    std::optional<SpectralField> z;
    if (!z_path.empty()) {
        LoadedField zf = load_spectral(z_path);
        if (zf.f.grid() != u.f.grid()) throw ShapeError("increments: u and Z grids differ");
        z = std::move(zf.f);
    }
    if (xis.empty()) xis = RunConfig{}.xi_list;
    IncrementCurve curve = increment_curve(v, u.f, z ? &*z : nullptr, xis, directions);

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("increments", g, "");
    {
        CsvWriter csv(dir / "increments.csv", "xi,I1,I2,sigma1,sigma2");
        for (std::size_t i = 0; i < curve.xi.size(); ++i)
            csv.row({curve.xi[i], curve.I1[i], curve.I2[i], curve.sigma1[i], curve.sigma2[i]});
    }
    manifest.add(dir / "increments.csv");
    manifest.write(dir);

    LineFit f1 = fit_loglog(curve.xi, curve.I1);
    std::cout << "increments: entries=" << curve.xi.size()
              << " I1_slope=" << format_double(f1.slope) << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// burgers
// -----------------------------------------------------------------------

int cmd_burgers(const GlobalOptions& g, double sigma, int n, std::vector<double> eps_list,
                int quad) {
    if (n < 1024) throw ResolutionError("burgers: n must be >= 1024 for reliable quadrature");
    if (!(sigma > 0.0)) throw ConfigError("burgers: sigma must be > 0");
    if (eps_list.empty()) eps_list = {0.2, 0.1, 0.05};

    auto sawtooth = [&](int nn) {
        Grid g1(1, nn);
        InitialConditionSpec spec;
        spec.kind = InitialConditionKind::BurgersShock;
        spec.amplitude = sigma;
        ModelParams params;
        return initial_condition(InitialConditionKind::BurgersShock, g1, params, spec).u;
    };
    SpectralField u = sawtooth(n);
    const double h = u.grid().spacing();

    std::vector<double> totals(eps_list.size());
    parallel_for(g.jobs, eps_list.size(), [&](std::size_t i) {
        totals[i] = burgers_defect_total(u, eps_list[i], quad, h);
    });
    RichardsonResult rich = richardson_extrapolate(eps_list, totals);

    // Besov stability: B^{1/3}_{3,inf} across a grid doubling, and the
    // growth of the s = 1/2 norm.
    SpectralField u_half = sawtooth(n / 2);
    DyadicPartition part_full(u.grid()), part_half(u_half.grid());
    const double b13_full = besov_norm(u, 1.0 / 3.0, 3.0, INFINITY, part_full);
    const double b13_half = besov_norm(u_half, 1.0 / 3.0, 3.0, INFINITY, part_half);
    const double b12_full = besov_norm(u, 0.5, 3.0, INFINITY, part_full);
    const double b12_half = besov_norm(u_half, 0.5, 3.0, INFINITY, part_half);

    // Third-order structure exponent on grid-aligned separations.
    std::vector<double> xis;
    for (int m = 8; m * h < 0.25; m *= 2) xis.push_back(m * h);
    StructureCurve curve = structure_function(u, 3.0, xis);
    RegularityEstimate reg = regularity_fit(curve);

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("burgers", g, "");
    {
        CsvWriter csv(dir / "burgers.csv", "eps,D_total");
        for (std::size_t i = 0; i < eps_list.size(); ++i) csv.row({eps_list[i], totals[i]});
    }
    manifest.add(dir / "burgers.csv");
    {
        CsvWriter csv(dir / "burgers_summary.csv",
                      "sigma,n,dissipation,observed_order,besov13,besov13_coarse,besov13_rel_change,"
                      "besov12_growth,structure_exponent,structure_stderr");
        csv.row({sigma, static_cast<double>(n), std::abs(rich.extrapolated), rich.observed_order,
                 b13_full, b13_half, std::abs(b13_full - b13_half) / b13_half,
                 b12_full / b12_half, reg.exponent, reg.stderr_});
    }
    manifest.add(dir / "burgers_summary.csv");
    manifest.write(dir);

    std::cout << "burgers: sigma=" << format_double(sigma) << " n=" << n
              << " dissipation=" << format_double(std::abs(rich.extrapolated))
              << " (signed " << format_double(rich.extrapolated) << ", sigma^3/12="
              << format_double(sigma * sigma * sigma / 12.0) << ")"
              << " order=" << format_double(rich.observed_order)
              << " B13_change=" << format_double(std::abs(b13_full - b13_half) / b13_half)
              << " exponent=" << format_double(reg.exponent) << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// sweep-alpha
// -----------------------------------------------------------------------

int cmd_sweep_alpha(const GlobalOptions& g, std::vector<double> alphas) {
    RunConfig base = load_run_config(g);
    if (!alphas.empty()) base.alpha_list = alphas;
    if (base.alpha_list.size() < 2) throw ConfigError("sweep-alpha: need >= 2 alpha values");

    struct Row {
        double alpha = 0.0, drift = 0.0, enstrophy_v = 0.0;
        std::vector<double> pi;
        std::vector<DefectEntry> defects;
    };
    std::vector<Row> rows(base.alpha_list.size());
    parallel_for(g.jobs, base.alpha_list.size(), [&](std::size_t i) {
        RunConfig rc = base;
        rc.params.alpha = base.alpha_list[i];
        SimulationOutput out = run_simulation(rc);
        Row row;
        row.alpha = rc.params.alpha;
        row.drift = out.drift;
        row.enstrophy_v = enstrophy(out.final_state.v);
        std::vector<SpectralField> tensor = velocity_tensor(out.final_state.u, 2);
        for (double k : rc.kappas)
            row.pi.push_back(flux_pi_with_tensor(out.final_state.u, tensor, k, 2));
        DefectOptions opt;
        opt.form = DefectForm::Algebraic;
        opt.quad_points = rc.quadrature_points;
        for (double eps : rc.eps_list)
            row.defects.push_back(
                defect(out.final_state.v, out.final_state.u, &out.final_state.Z, eps, opt));
        rows[i] = std::move(row);
    });

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("sweep-alpha", g, base.config_hash);
    {
        CsvWriter csv(dir / "sweep_summary.csv", "alpha,drift,enstrophy_v");
        for (const auto& r : rows) csv.row({r.alpha, r.drift, r.enstrophy_v});
    }
    manifest.add(dir / "sweep_summary.csv");
    {
        CsvWriter csv(dir / "sweep_flux.csv", "alpha,kappa,Pi");
        for (const auto& r : rows)
            for (std::size_t k = 0; k < base.kappas.size(); ++k)
                csv.row({r.alpha, base.kappas[k], r.pi[k]});
    }
    manifest.add(dir / "sweep_flux.csv");
    {
        CsvWriter csv(dir / "sweep_defect.csv", "alpha,eps,D1_abs,D1_signed,D2_abs,D2_signed");
        for (const auto& r : rows)
            for (const auto& e : r.defects)
                csv.row({r.alpha, e.eps, e.d1_algebraic.abs, e.d1_algebraic.net,
                         e.d2_algebraic.abs, e.d2_algebraic.net});
    }
    manifest.add(dir / "sweep_defect.csv");
    manifest.write(dir);

    std::cout << "sweep-alpha:";
    for (const auto& r : rows)
        std::cout << " alpha=" << format_double(r.alpha) << " drift=" << format_double(r.drift)
                  << " enstrophy_v=" << format_double(r.enstrophy_v) << ";";
    std::cout << '\n';
    return 0;
}

// -----------------------------------------------------------------------
// balance
// -----------------------------------------------------------------------

int cmd_balance(const GlobalOptions& g, double eps0, double spacing0, int quad) {
    RunConfig rc = load_run_config(g);
    Grid grid(rc.dim, rc.n);
    ModelState state = initial_condition(rc.ic.kind, grid, rc.params, rc.ic);
    const double dt = rc.dt > 0.0 ? rc.dt : cfl_dt(state, rc.cfl_safety);

    // Snapshot spacings snapped to step multiples; Delta and Delta/2 both
    // need to be realizable.
    long long half_steps = std::max<long long>(1, llround(0.5 * spacing0 / dt));
    const double half_spacing = half_steps * dt;
    const double spacing = 2.0 * half_spacing;
    const long long mid_step = std::max<long long>(2 * half_steps, llround(0.5 * rc.t_end / dt));
    const long long last_step = mid_step + 2 * half_steps;

    std::map<long long, ModelState> keep;
    const std::vector<long long> targets = {mid_step - 2 * half_steps, mid_step - half_steps,
                                            mid_step, mid_step + half_steps,
                                            mid_step + 2 * half_steps};
    if (targets.front() < 0) throw ConfigError("balance: spacing too large for t_end");
    for (long long step = 0; step <= last_step; ++step) {
        if (std::find(targets.begin(), targets.end(), step) != targets.end())
            keep.emplace(step, state);
        if (step == last_step) break;
        state = step_rk4(state, rc.params, dt, rc.variant);
    }
    keep.emplace(last_step, state);

    SpectralField chi = default_test_weight(grid);
    struct Cell {
        double eps, spacing, residual;
    };
    std::vector<Cell> cells;
    for (double e : {eps0, 0.5 * eps0})
        for (int refine = 0; refine < 2; ++refine) {
            const long long hs = refine ? half_steps : 2 * half_steps;
            const ModelState& prev = keep.at(mid_step - hs);
            const ModelState& mid = keep.at(mid_step);
            const ModelState& next = keep.at(mid_step + hs);
            cells.push_back({e, hs * dt, balance_residual(prev, mid, next, rc.params, e, quad, chi)});
        }

    fs::path dir = ensure_out_dir(g);
    Manifest manifest("balance", g, rc.config_hash);
    {
        CsvWriter csv(dir / "balance.csv", "eps,dt,residual");
        for (const auto& c : cells) csv.row({c.eps, c.spacing, c.residual});
    }
    manifest.add(dir / "balance.csv");
    manifest.write(dir);

    std::cout << "balance: spacing=" << format_double(spacing) << " eps=" << format_double(eps0);
    for (const auto& c : cells)
        std::cout << " R(eps=" << format_double(c.eps) << ",dt=" << format_double(c.spacing)
                  << ")=" << format_double(c.residual);
    const double coarse = std::abs(cells.front().residual);
    const double fine = std::abs(cells.back().residual);
    std::cout << " refined_smaller=" << (fine < coarse ? "yes" : "no") << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Leray-alpha pseudo-spectral simulator and energy diagnostics"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--config", g.config_path, "Run configuration file (TOML-compatible)");
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Parallel workers for independent diagnostics")
        ->capture_default_str();
    app.add_option("--set", g.sets, "Override config entries: section.key=value");

    auto* sim = app.add_subcommand("simulate", "Evolve the system and emit the energy series");

    std::string snapshot, z_path;
    std::vector<double> kappas, eps_list, xis, alphas;
    int pad = 2, quad = 17, directions = 0;
    double fit_lo = 0.0, fit_hi = 0.0, alpha_flag = -1.0;
    std::string form = "both", q_text = "inf";
    double besov_s = 1.0 / 3.0, besov_p = 3.0;
    double sigma = 1.0, eps0 = 0.2, spacing0 = 0.1;
    int burgers_n = 4096;

    auto* flux = app.add_subcommand("flux", "Spectral energy flux through sharp cutoffs");
    flux->add_option("snapshot", snapshot, "velocity snapshot")->required();
    flux->add_option("--kappas", kappas, "cutoff list");
    flux->add_option("--pad", pad, "padding factor for cubic products");
    flux->add_option("--fit-lo", fit_lo, "lower kappa of the decay fit window");
    flux->add_option("--fit-hi", fit_hi, "upper kappa of the decay fit window");

    auto* def = app.add_subcommand("defect", "Duchon-Robert defect terms D1/D2");
    def->add_option("snapshot", snapshot, "velocity snapshot")->required();
    def->add_option("--z", z_path, "reactant snapshot (enables D2)");
    def->add_option("--eps", eps_list, "mollifier epsilon ladder");
    def->add_option("--form", form, "increment|algebraic|both");
    def->add_option("--quad", quad, "quadrature points per axis");
    def->add_option("--alpha", alpha_flag, "filter length (default: snapshot header)");

    auto* bes = app.add_subcommand("besov", "Littlewood-Paley block norms and regularity");
    bes->add_option("snapshot", snapshot, "field snapshot")->required();
    bes->add_option("--s", besov_s, "regularity index");
    bes->add_option("--p", besov_p, "Lebesgue exponent");
    bes->add_option("--q", q_text, "summation exponent or 'inf'");
    bes->add_option("--xi", xis, "structure-function separations");
    bes->add_option("--directions", directions, "directions per shell (0=axes, 12=icosahedral)");

    auto* inc = app.add_subcommand("increments", "Increment integrals and sigma profiles");
    inc->add_option("snapshot", snapshot, "velocity snapshot")->required();
    inc->add_option("--z", z_path, "reactant snapshot");
    inc->add_option("--xi", xis, "separation magnitudes");
    inc->add_option("--directions", directions, "directions per shell");
    inc->add_option("--alpha", alpha_flag, "filter length (default: snapshot header)");

    auto* bur = app.add_subcommand("burgers", "1D sawtooth sharpness study");
    bur->add_option("--sigma", sigma, "jump size")->capture_default_str();
    bur->add_option("--n", burgers_n, "grid points (>= 1024)")->capture_default_str();
    bur->add_option("--eps", eps_list, "epsilon ladder (geometric)");
    bur->add_option("--quad", quad, "quadrature points per axis");

    auto* swp = app.add_subcommand("sweep-alpha", "Repeat the run over a filter-length ladder");
    swp->add_option("--alphas", alphas, "alpha ladder (overrides [sweep] alpha_list)");

    auto* bal = app.add_subcommand("balance", "Local energy balance residual (2x2 refinement)");
    bal->add_option("--eps", eps0, "base mollifier epsilon")->capture_default_str();
    bal->add_option("--spacing", spacing0, "base snapshot spacing")->capture_default_str();
    bal->add_option("--quad", quad, "quadrature points per axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(g);
        if (flux->parsed()) return cmd_flux(g, snapshot, kappas, pad, fit_lo, fit_hi);
        if (def->parsed()) return cmd_defect(g, snapshot, z_path, eps_list, form, quad, alpha_flag);
        if (bes->parsed()) return cmd_besov(g, snapshot, besov_s, besov_p, q_text, xis, directions);
        if (inc->parsed()) return cmd_increments(g, snapshot, z_path, xis, directions, alpha_flag);
        if (bur->parsed()) return cmd_burgers(g, sigma, burgers_n, eps_list, quad);
        if (swp->parsed()) return cmd_sweep_alpha(g, alphas);
        if (bal->parsed()) return cmd_balance(g, eps0, spacing0, quad);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CflError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const ResolutionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 6;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
