#include "qlb/app.hpp"

#include "qlb/error.hpp"
#include "qlb/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace qlb {

namespace {

std::vector<EmPotentialSample> read_potential_file(const std::string &path, std::size_t sites) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read potential file '" + path + "'");
    std::string line;
    std::getline(in, line);  // header: site,ax,ay,az,v
    std::vector<EmPotentialSample> samples(sites);
    std::vector<bool> seen(sites, false);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> values;
        while (std::getline(row, cell, ',')) {
            try {
                values.push_back(std::stod(cell));
            } catch (const std::exception &) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (values.size() != 5)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 5 columns site,ax,ay,az,v");
        const auto site = static_cast<std::size_t>(values[0]);
        if (values[0] < 0 || site >= sites || static_cast<double>(site) != values[0])
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad site index");
        samples[site] = EmPotentialSample{{values[1], values[2], values[3]}, values[4]};
        seen[site] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ConfigError(path + ": potential file does not cover every site");
    return samples;
}

std::ofstream open_output(const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

void write_profile(const std::filesystem::path &path, const SpinorField &field, const DiracSet &set,
                   Axis axis, double center) {
    const Grid &grid = field.grid();
    const std::size_t n = grid.extent(axis);
    const auto a = static_cast<std::size_t>(axis);
    std::vector<double> rho(n, 0.0), rs(n, 0.0), ra(n, 0.0);
    const auto d = density(field);
    const auto s = rho_s(field, set);
    const auto x = rho_a(field, set);
    for (std::size_t site = 0; site < grid.sites(); ++site) {
        const std::size_t i = grid.coords(site)[a];
        rho[i] += d[site];
        rs[i] += s[site];
        ra[i] += x[site];
    }
    std::ofstream out = open_output(path);
    out << "x,rho,rho_s,rho_a\n";
    for (std::size_t i = 0; i < n; ++i)
        out << format_double((static_cast<double>(i) - center) * field.dx()) << ','
            << format_double(rho[i]) << ',' << format_double(rs[i]) << ',' << format_double(ra[i])
            << '\n';
}

std::string opt(const std::optional<double> &v) { return v ? format_double(*v) : "nan"; }

SpinorField random_field(const Grid &grid, double dt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    SpinorField f(grid, dt);
    for (Spinor &psi : f.data())
        for (cplx &c : psi) c = {normal(rng), normal(rng)};
    const double scale = 1.0 / std::sqrt(f.norm2());
    for (Spinor &psi : f.data())
        for (cplx &c : psi) c *= scale;
    return f;
}

} // namespace

CollisionModel make_model(const RunConfig &cfg) {
    switch (cfg.model) {
    case ModelKind::free: return FreeModel{cfg.m};
    case ModelKind::njl: return NjlModel{cfg.m, cfg.g};
    case ModelKind::em: {
        PotentialFn fn;
        switch (cfg.potential) {
        case PotentialKind::none: throw ConfigError("model = em needs a potential");
        case PotentialKind::uniform_v: fn = uniform_scalar_potential(cfg.potential_v); break;
        case PotentialKind::constant_a:
            fn = constant_vector_potential({cfg.potential_ax, cfg.potential_ay, cfg.potential_az});
            break;
        case PotentialKind::plane_wave_a:
            fn = plane_wave_vector_potential(cfg.potential_amplitude, cfg.potential_polarization,
                                             cfg.potential_direction, cfg.potential_k,
                                             cfg.potential_omega);
            break;
        case PotentialKind::file:
            fn = sampled_potential(read_potential_file(cfg.potential_file, cfg.grid().sites()));
            break;
        }
        return EmModel{cfg.m, cfg.e, fn};
    }
    }
    throw ConfigError("unknown model");
}

StepPlan make_plan(const RunConfig &cfg) {
    StepPlan plan = StepPlan::for_grid(cfg.grid(), cfg.workers);
    if (!cfg.axis_order.empty()) plan.axis_order = cfg.axis_order;
    return plan;
}

SpinorField make_initial_field(const RunConfig &cfg, const DiracSet &set) {
    if (cfg.packet == PacketKind::plane_wave)
        return plane_wave(cfg.grid(), set, cfg.k, cfg.m, cfg.branch, cfg.axis, cfg.dt);
    return init_gaussian(cfg.grid(), set, cfg.packet_spec(), cfg.normalize_ic, cfg.dt);
}

std::vector<ObservableRecord> cmd_run(const RunConfig &cfg, std::ostream &log) {
    cfg.validate();
    const std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());

    const DiracSet set = build_dirac_set();
    const CollisionModel model = make_model(cfg);
    const StepPlan plan = make_plan(cfg);
    SpinorField field = make_initial_field(cfg, set);
    const double center = packet_center(cfg.grid(), cfg.packet_spec());
    const double norm0 = field.norm2();

    {
        std::ofstream meta = open_output(dir / "run_meta");
        meta << render_config(cfg);
    }
    std::ofstream summary = open_output(dir / "summary.csv");
    summary << "step,norm2,centroid_left,centroid_right,v_mean_running,mover_left,mover_right\n";

    std::vector<ObservableRecord> series;
    std::vector<double> times, right;
    std::size_t profiles = 0;
    auto want_profile = [&](std::size_t step) {
        return cfg.profile_steps.empty() ||
               std::find(cfg.profile_steps.begin(), cfg.profile_steps.end(), step) !=
                   cfg.profile_steps.end();
    };

    evolve(std::move(field), set, model, plan, cfg.steps,
           [&](std::size_t step, const SpinorField &f) {
               ObservableRecord rec = observe(f, set, step, cfg.axis, center);
               if (cfg.boundary == Boundary::periodic &&
                   std::abs(rec.norm2 - norm0) > 1e-10 * std::max(1.0, norm0)) {
                   std::ostringstream msg;
                   msg << "norm drifted from " << format_double(norm0) << " to "
                       << format_double(rec.norm2) << " at step " << step;
                   throw NumericalError(msg.str());
               }
               if (rec.movers.right) {
                   times.push_back(rec.time);
                   right.push_back(*rec.movers.right);
               }
               if (times.size() >= 3) rec.v_mean = least_squares_slope(times, right);
               summary << step << ',' << format_double(rec.norm2) << ',' << opt(rec.half_line.left)
                       << ',' << opt(rec.half_line.right) << ',' << opt(rec.v_mean) << ','
                       << opt(rec.movers.left) << ',' << opt(rec.movers.right) << '\n';
               if (want_profile(step)) {
                   write_profile(dir / ("profile_" + std::to_string(step) + ".csv"), f, set, cfg.axis,
                                 center);
                   ++profiles;
               }
               rec.density.clear();
               rec.rho_s.clear();
               rec.rho_a.clear();
               series.push_back(std::move(rec));
           },
           cfg.snapshot_cadence);

    if (!summary) throw ConfigError("failed writing summary.csv");
    log << "run: " << cfg.steps << " steps, " << series.size() << " snapshots, " << profiles
        << " profiles written to " << dir.string() << '\n';
    return series;
}

BenchResult cmd_bench(const RunConfig &cfg, std::ostream &out) {
    cfg.validate();
    const DiracSet set = build_dirac_set();
    const CollisionModel model = make_model(cfg);
    const Grid grid = cfg.grid();

    auto time_run = [&](int workers) {
        StepPlan plan = make_plan(cfg);
        plan.workers = workers;
        SpinorField field = random_field(grid, cfg.dt, cfg.seed);
        Propagator prop(set, model, plan, grid, cfg.dt);
        const auto start = std::chrono::steady_clock::now();
        for (std::size_t n = 0; n < cfg.steps; ++n)
            prop.step(field, static_cast<double>(n) * cfg.dt);
        const auto stop = std::chrono::steady_clock::now();
        if (!std::isfinite(field.norm2())) throw NumericalError("benchmark field blew up");
        return std::chrono::duration<double>(stop - start).count();
    };

    BenchResult r;
    r.sites = grid.sites();
    r.steps = cfg.steps;
    r.site_updates = r.sites * r.steps;
    const double updates = static_cast<double>(r.site_updates);
    r.seconds_single = time_run(1);
    r.mlups_single = r.seconds_single > 0.0 ? updates / r.seconds_single / 1e6 : 0.0;
    r.workers = cfg.workers > 1 ? cfg.workers
                                : std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    r.seconds_multi = time_run(r.workers);
    r.mlups_multi = r.seconds_multi > 0.0 ? updates / r.seconds_multi / 1e6 : 0.0;

    out << "sites = " << r.sites << '\n'
        << "steps = " << r.steps << '\n'
        << "site_updates = " << r.site_updates << '\n'
        << "seconds_1 = " << format_double(r.seconds_single) << '\n'
        << "mlups_1 = " << format_double(r.mlups_single) << '\n'
        << "workers = " << r.workers << '\n'
        << "seconds_n = " << format_double(r.seconds_multi) << '\n'
        << "mlups_n = " << format_double(r.mlups_multi) << '\n';
    return r;
}

ConvergenceResult cmd_converge(const RunConfig &cfg, std::ostream &out) {
    cfg.validate();
    if (cfg.levels < 3) throw ConfigError("converge needs levels >= 3");
    if (cfg.dims != 1) throw ConfigError("converge runs on a one-dimensional line");
    const DiracSet set = build_dirac_set();
    const std::size_t n0 = cfg.grid().extent(cfg.axis);
    const double total_time =
        cfg.converge_time > 0.0 ? cfg.converge_time : static_cast<double>(n0) * cfg.dt;

    ConvergenceResult result;
    for (std::size_t level = 0; level < cfg.levels; ++level) {
        const double scale = std::ldexp(1.0, static_cast<int>(level));
        const double dt = cfg.dt / scale;
        const std::size_t n = n0 << level;
        const double steps_real = total_time / dt;
        const auto steps = static_cast<std::size_t>(std::llround(steps_real));
        if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
            throw ConfigError("converge_time is not a whole number of steps at level " +
                              std::to_string(level));

        const Grid grid = Grid::line(n, cfg.axis, Boundary::periodic);
        const SpinorField psi0 = plane_wave(grid, set, cfg.k, cfg.m, cfg.branch, cfg.axis, dt);
        const SpinorField psi = evolve(psi0, set, FreeModel{cfg.m}, StepPlan::for_grid(grid, cfg.workers), steps);

        cplx overlap = 0.0;
        for (std::size_t s = 0; s < grid.sites(); ++s)
            for (std::size_t c = 0; c < 4; ++c) overlap += std::conj(psi0.at(s)[c]) * psi.at(s)[c];
        overlap *= psi0.cell_volume();
        const cplx reference = oracle::analytic_free_evolution(cfg.k, cfg.m, cfg.branch,
                                                               static_cast<double>(steps) * dt);
        const double err = std::abs(std::arg(overlap * std::conj(reference)));
        result.levels.push_back({static_cast<int>(level), dt, n, steps, err, err / total_time});
    }

    double worst = 0.0;
    for (const auto &l : result.levels) worst = std::max(worst, l.phase_error);
    result.exact = worst < 1e-10;
    if (result.exact) {
        result.fitted_order = std::nan("");
    } else {
        std::vector<double> lx, ly;
        for (const auto &l : result.levels) {
            lx.push_back(std::log(l.dt));
            ly.push_back(std::log(l.error_per_time));
        }
        result.fitted_order = least_squares_slope(lx, ly);
    }

    out << "level,dt,sites,steps,phase_error,error_per_time\n";
    for (const auto &l : result.levels)
        out << l.level << ',' << format_double(l.dt) << ',' << l.sites << ',' << l.steps << ','
            << format_double(l.phase_error) << ',' << format_double(l.error_per_time) << '\n';
    if (result.exact)
        out << "order = exact\n";
    else
        out << "order = " << format_double(result.fitted_order) << '\n';
    return result;
}

} // namespace qlb
