// turbkit command line: simulate, diagnose, budget, shear-test, burgers, fit
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration or
// input files, 3 the simulation diverged, 4 pressure snapshots missing.

#include "turbkit/checkpoint.hpp"
#include "turbkit/config.hpp"
#include "turbkit/diagnostics.hpp"
#include "turbkit/errors.hpp"
#include "turbkit/monitors.hpp"
#include "turbkit/shear.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef TURBKIT_VERSION
#define TURBKIT_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace turbkit;
using json = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, failure = 1, bad_config = 2, diverged = 3, no_pressure = 4 };

struct Common {
    std::string config;
    std::string out;
    int threads = 1;
    bool deterministic = false;
};

RunConfig resolve(const Common& o) {
    RunConfig c = o.config.empty() ? parse_config("") : load_config(o.config);
    apply_environment(c);
    if (!o.out.empty()) c.out_dir = o.out;
    if (o.threads < 1) throw ConfigError("--threads must be >= 1");
    return c;
}

json run_info(const RunConfig& c, const Common& o) {
    json j;
    j["code_version"] = TURBKIT_VERSION;
    j["seed"] = c.sim.seed;
    j["threads"] = o.threads;
    j["deterministic"] = o.deterministic;
    j["config"] = to_json(c);
    return j;
}

std::string csv_header(const RunConfig& c) {
    std::string h = std::string("# turbkit ") + TURBKIT_VERSION + "\n";
    std::istringstream ss(to_text(c));
    for (std::string line; std::getline(ss, line);) h += "# " + line + "\n";
    return h;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string cell(double x, bool available = true) { return available ? format_double(x) : "NA"; }

std::string snapshot_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06zu", i);
    return buf;
}

std::string timeseries_csv(const RunConfig& c, const TimeSeries& ts) {
    std::string s = csv_header(c) + "t,energy,dissipation,input\n";
    for (std::size_t i = 0; i < ts.t.size(); ++i)
        s += format_double(ts.t[i]) + "," + format_double(ts.energy[i]) + "," + format_double(ts.dissipation[i]) +
             "," + format_double(ts.input[i]) + "\n";
    return s;
}

json stationarity_json(const TimeSeries& ts, double t_from) {
    json j;
    if (ts.t.size() < 2) return j;
    const StationarityReport r = stationarity_report(ts, t_from);
    j["energy"] = r.energy;
    j["energy_stderr"] = r.energy_stderr;
    j["dissipation"] = r.dissipation;
    j["dissipation_stderr"] = r.dissipation_stderr;
    j["input"] = r.input;
    j["input_stderr"] = r.input_stderr;
    j["mean_dEdt"] = r.mean_dEdt;
    j["mean_dEdt_stderr"] = r.stderr_dEdt;
    return j;
}

struct LoadedSet {
    std::vector<Snapshot> snapshots;
    double nu = 0;
    bool all_pressure = true;
};

LoadedSet load_snapshot_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("snapshot directory " + dir + " does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".tks") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ConfigError("no snapshots (*.tks) in " + dir);
    LoadedSet set;
    for (const auto& f : files) {
        double nu = 0;
        Snapshot s = load_snapshot(f.string(), &nu);
        if (!set.snapshots.empty()) {
            const WaveGrid& g0 = set.snapshots.front().u.grid;
            if (s.u.grid.dim() != g0.dim() || s.u.grid.n() != g0.n())
                throw ConfigError("snapshots do not share a grid: " + f.filename().string());
            if (nu != set.nu) throw ConfigError("snapshots were written with different viscosities");
        }
        set.nu = nu;
        fs::path pf = f;
        pf.replace_extension(".tkp");
        if (fs::exists(pf)) s.p = load_pressure(pf.string());
        else set.all_pressure = false;
        set.snapshots.push_back(std::move(s));
    }
    return set;
}

// the cutoff lives on the snapshots' grid, not the one named in the config
CutoffField cutoff_for(const RunConfig& c, const WaveGrid& g) {
    return make_cutoff(g, c.psi_kind, c.psi_center, c.psi_radius);
}

std::string sf_csv(const RunConfig& c, const SFProfile& p) {
    std::string s = csv_header(c) + "ell,s0,s0_stderr,spar,spar_stderr\n";
    for (std::size_t j = 0; j < p.grid.size(); ++j) {
        const auto i = Eigen::Index(j);
        s += format_double(p.grid.ell[j]) + "," + format_double(p.s0(i)) + "," +
             cell(p.s0_stderr(i), p.stderr_available) + "," + format_double(p.spar(i)) + "," +
             cell(p.spar_stderr(i), p.stderr_available) + "\n";
    }
    return s;
}

json wad_json(const WADRecord& w) {
    json j;
    j["nu"] = w.nu;
    j["nu_energy"] = w.nu_energy;
    j["nu_energy_stderr"] = w.nu_energy_stderr;
    j["dissipation"] = w.dissipation;
    j["dissipation_stderr"] = w.dissipation_stderr;
    j["input"] = w.input;
    j["input_stderr"] = w.input_stderr;
    j["taylor_microscale"] = w.taylor_microscale;
    j["taylor_microscale_stderr"] = w.taylor_microscale_stderr;
    j["ell_nu"] = w.ell_nu;
    j["ell_nu_stderr"] = w.ell_nu_stderr;
    j["count"] = w.count;
    return j;
}

DirectionSet directions_for(const RunConfig& c, int dim) {
    return dim == 1 ? line_direction_set() : build_direction_set(c.n_dirs);
}

int cmd_simulate(const Common& o) {
    RunConfig c = resolve(o);
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path out = c.out_dir;
    fs::create_directories(out / "snapshots");
    std::size_t count = 0;
    json meta = run_info(c, o);
    RunResult r;
    try {
        r = run(c.sim, [&](const Snapshot& s) {
            const fs::path base = out / "snapshots" / snapshot_name(count++);
            save_snapshot(base.string() + ".tks", s, c.sim.nu);
            if (s.p) save_pressure(base.string() + ".tkp", *s.p, s.t, s.step);
        });
    } catch (const StepSizeError& e) {
        meta["status"] = std::string("diverged: ") + e.what();
        write_json(out / "metadata.json", meta);
        throw;
    } catch (const DivergenceError& e) {
        meta["status"] = std::string("diverged: ") + e.what();
        write_json(out / "metadata.json", meta);
        throw;
    }
    save_checkpoint((out / "checkpoint.tkc").string(), r.final_state, c.sim.nu);
    write_text(out / "timeseries.csv", timeseries_csv(c, r.series));
    write_text(out / "config.txt", to_text(c));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    meta["status"] = "ok";
    meta["wall_time_s"] = wall;
    meta["final_time"] = r.final_state.t;
    meta["steps"] = r.final_state.step;
    meta["burnin_steps"] = r.burnin_steps;
    meta["sample_steps"] = r.sample_steps;
    meta["snapshots"] = r.snapshots;
    meta["stationarity"] = stationarity_json(r.series, c.sim.t_burnin);
    write_json(out / "metadata.json", meta);
    std::cout << "wrote " << r.snapshots << " snapshots, " << r.final_state.step << " steps in " << wall << " s to "
              << out.string() << "\n";
    return ok;
}

int cmd_diagnose(const Common& o, const std::string& dir) {
    RunConfig c = resolve(o);
    const LoadedSet set = load_snapshot_dir(dir);
    const WaveGrid& g = set.snapshots.front().u.grid;
    const CutoffField psi = cutoff_for(c, g);
    const LengthGrid lg = c.length_grid();
    const SFProfile sf = structure_functions(set.snapshots, psi, lg, directions_for(c, g.dim()));
    const WADRecord w = wad_monitor(set.snapshots, set.nu);

    // assumption monitors at the grid lengths along the first axis
    std::vector<Vec3> probes;
    for (double l : lg.ell) probes.push_back(Vec3(l, 0, 0));
    RunningStats mon(4, "monitors", true);
    for (const auto& s : set.snapshots) {
        const ScalarField p = s.p ? *s.p : ScalarField(g);
        const MonitorRecord m = assumption_monitors(s.u, p, probes);
        Eigen::VectorXd x(4);
        x << m.u_l3, m.du_l3_max, m.p_l32, m.dp_l32_max;
        mon.accumulate(x);
    }
    const Estimate me = finalize(mon);

    const fs::path out = c.out_dir;
    fs::create_directories(out);
    write_text(out / "sf.csv", sf_csv(c, sf));
    json j = run_info(c, o);
    j["snapshot_dir"] = dir;
    j["snapshots"] = set.snapshots.size();
    j["nu"] = set.nu;
    j["stderr_available"] = sf.stderr_available;
    j["wad"] = wad_json(w);
    json m;
    const char* names[] = {"u_l3", "du_l3_max", "p_l32", "dp_l32_max"};
    for (int i = 0; i < 4; ++i) {
        const bool pressure_term = i >= 2;
        if (pressure_term && !set.all_pressure) {
            m[names[i]] = nullptr;
            continue;
        }
        m[names[i]] = me.mean(i);
        m[std::string(names[i]) + "_stderr"] = me.stderr_available ? json(me.stderr_(i)) : json(nullptr);
    }
    j["monitors"] = m;
    write_json(out / "monitors.json", j);
    std::cout << "diagnosed " << set.snapshots.size() << " snapshots into " << out.string() << "\n";
    return ok;
}

int cmd_budget(const Common& o, const std::string& dir, const std::string& law_s) {
    RunConfig c = resolve(o);
    const Law law = parse_law(law_s);
    const LoadedSet set = load_snapshot_dir(dir);
    const WaveGrid& g = set.snapshots.front().u.grid;
    if (g.dim() != 3) throw ConfigError("budgets need 3D snapshots");
    if (!set.all_pressure)
        throw MissingPressureError("some snapshots in " + dir +
                                   " have no pressure file (*.tkp); rerun simulate with pressure = true");
    const CutoffField psi = cutoff_for(c, g);
    DiagnosticsOptions opts;
    opts.gauss_points = c.gauss_points;
    BudgetAccumulator acc(g, psi, c.length_grid(), set.nu, opts);
    for (const auto& s : set.snapshots) acc.add(s);
    const KHMBudget b = acc.budget(law);

    std::string s = csv_header(c) + "ell,s0,spar";
    for (const auto& t : b.terms) s += "," + t.name;
    s += ",residual,stderr,max_term";
    for (const auto& t : b.terms) s += "," + t.name + "_stderr";
    s += "\n";
    for (std::size_t j = 0; j < b.grid.size(); ++j) {
        const auto i = Eigen::Index(j);
        s += format_double(b.grid.ell[j]) + "," + format_double(b.s0(i)) + "," + format_double(b.spar(i));
        for (const auto& t : b.terms) s += "," + format_double(t.value(i));
        s += "," + format_double(b.residual(i)) + "," + cell(b.residual_stderr(i), b.stderr_available) + "," +
             format_double(b.max_term(i));
        for (const auto& t : b.terms) s += "," + cell(t.stderr_(i), b.stderr_available);
        s += "\n";
    }
    const fs::path out = c.out_dir;
    fs::create_directories(out);
    write_text(out / "budget.csv", s);

    json j = run_info(c, o);
    j["law"] = to_string(law);
    j["snapshot_dir"] = dir;
    j["snapshots"] = b.count;
    j["nu"] = set.nu;
    json sides;
    for (const auto& t : b.terms) sides[t.name] = t.side;
    j["term_sides"] = sides;
    json lim = json::array();
    for (const auto& l : b.limits)
        lim.push_back({{"name", l.name}, {"value", l.value}, {"expected", l.expected}, {"stderr", l.stderr_}});
    j["limits"] = lim;
    const LEEReport lee = acc.lee();
    j["lee"] = {{"lhs", lee.lhs},
                {"viscous", lee.viscous},
                {"transport", lee.transport},
                {"noise", lee.noise},
                {"residual", lee.residual},
                {"residual_stderr", lee.residual_stderr}};
    const Estimate d = acc.local_dissipation();
    j["local_dissipation"] = d.mean(0);
    write_json(out / "budget.json", j);
    std::cout << "law " << to_string(law) << " budget over " << b.count << " snapshots into " << out.string() << "\n";
    return ok;
}

int cmd_shear(const std::vector<double>& nus, double dt, double t_final, std::uint64_t seed) {
    const char* env = std::getenv("TURBKIT_SEED");
    if (env != nullptr) {
        RunConfig tmp = parse_config("");
        apply_environment(tmp);
        seed = tmp.sim.seed;
    }
    std::printf("%-12s %-20s %-20s %s\n", "nu", "target", "measured", "rel_error");
    for (double nu : nus) {
        if (!(nu > 0)) throw ConfigError("shear-test needs nu > 0");
        Rng rng(seed);
        const double T = t_final > 0 ? t_final : shear_default_t_final(nu);
        const double m = degenerate_shear_run(nu, T, dt, rng);
        const double target = 1.0 / (1.0 + nu);
        std::printf("%-12s %-20s %-20s %.3e\n", format_double(nu).c_str(), format_double(target).c_str(),
                    format_double(m).c_str(), std::abs(m - target) / target);
    }
    return ok;
}

int cmd_burgers(const Common& o) {
    RunConfig c = resolve(o);
    if (c.sim.dim != 1) throw ConfigError("burgers needs dim = 1");
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Snapshot> snaps;
    RunResult r = burgers_run(c.sim, [&](const Snapshot& s) { snaps.push_back(s); });
    const fs::path out = c.out_dir;
    fs::create_directories(out);
    write_text(out / "timeseries.csv", timeseries_csv(c, r.series));
    json j = run_info(c, o);
    j["stationarity"] = stationarity_json(r.series, c.sim.t_burnin);
    j["snapshots"] = snaps.size();
    if (!snaps.empty()) {
        const CutoffField psi = make_cutoff(c.sim.grid(), CutoffKind::uniform);
        const SFProfile sf = structure_functions(snaps, psi, c.length_grid(), line_direction_set());
        write_text(out / "sf.csv", sf_csv(c, sf));
        j["wad"] = wad_json(wad_monitor(snaps, c.sim.nu));
    }
    j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(out / "summary.json", j);
    std::cout << "burgers run: " << r.final_state.step << " steps, " << snaps.size() << " snapshots into "
              << out.string() << "\n";
    return ok;
}

SFProfile read_sf_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::vector<double> ell, s0, spar;
    bool header = false;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("ell,s0,s0_stderr,spar", 0) != 0) throw ConfigError(path + " is not a structure-function table");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        if (f.size() < 4) throw ConfigError("short row in " + path);
        try {
            ell.push_back(std::stod(f[0]));
            s0.push_back(std::stod(f[1]));
            spar.push_back(std::stod(f[3]));
        } catch (const std::exception&) {
            throw ConfigError("bad number in " + path);
        }
    }
    SFProfile p;
    p.grid.ell = ell;
    p.s0 = Eigen::Map<Eigen::VectorXd>(s0.data(), Eigen::Index(s0.size()));
    p.spar = Eigen::Map<Eigen::VectorXd>(spar.data(), Eigen::Index(spar.size()));
    return p;
}

int cmd_fit(const std::string& in, double lo, double hi, double dissipation, const std::string& out) {
    const ScalingFit f = scaling_fit(read_sf_csv(in), lo, hi, dissipation);
    json j;
    j["code_version"] = TURBKIT_VERSION;
    j["input"] = in;
    j["lo"] = f.lo;
    j["hi"] = f.hi;
    j["points"] = f.points;
    j["slope_s0"] = f.slope_s0;
    j["slope_spar"] = f.slope_spar;
    j["eps0"] = f.eps0;
    j["eps_par"] = f.eps_par;
    j["r2_s0"] = f.r2_s0;
    j["r2_spar"] = f.r2_spar;
    j["dissipation"] = f.dissipation;
    j["ratio0"] = f.ratio0;
    j["ratio_par"] = f.ratio_par;
    const std::string text = j.dump(2) + "\n";
    if (out.empty()) std::cout << text;
    else write_text(out, text);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"turbkit: stochastically forced Navier-Stokes and local structure-function budgets"};
    app.require_subcommand(1);
    app.set_version_flag("--version", TURBKIT_VERSION);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "key = value configuration file");
        sub->add_option("--out", common.out, "output directory (overrides out_dir)");
        sub->add_option("--threads", common.threads, "cap on worker threads");
        sub->add_flag("--deterministic", common.deterministic, "fixed reduction order");
    };

    auto* sim = app.add_subcommand("simulate", "run the 3D solver, writing snapshots and a checkpoint");
    add_common(sim);

    std::string dir;
    auto* diag = app.add_subcommand("diagnose", "structure functions and assumption monitors of a snapshot set");
    add_common(diag);
    diag->add_option("snapshots", dir, "snapshot directory")->required();

    std::string law = "43";
    auto* bud = app.add_subcommand("budget", "integrated 4/3 or 4/5 budget of a snapshot set");
    add_common(bud);
    bud->add_option("snapshots", dir, "snapshot directory")->required();
    bud->add_option("--law", law, "43 or 45")->check(CLI::IsMember({"43", "45"}));

    std::vector<double> nus{1.0, 0.5, 0.1};
    double shear_dt = 0.05, shear_t = 0;
    std::uint64_t shear_seed = 1;
    auto* shear = app.add_subcommand("shear-test", "degenerate shear check against 1/(nu + 1)");
    shear->add_option("--nu", nus, "viscosities")->delimiter(',');
    shear->add_option("--dt", shear_dt, "step");
    shear->add_option("--t-final", shear_t, "averaging window (default: long enough for ~0.5% error)");
    shear->add_option("--seed", shear_seed, "seed");

    auto* burg = app.add_subcommand("burgers", "1D stochastic Burgers run with structure functions");
    add_common(burg);

    std::string fit_in, fit_out;
    double fit_lo = 0, fit_hi = 0, fit_diss = 0;
    auto* fit = app.add_subcommand("fit", "linear fit of a structure-function table");
    fit->add_option("--in", fit_in, "sf.csv")->required();
    fit->add_option("--lo", fit_lo, "window start")->required();
    fit->add_option("--hi", fit_hi, "window end")->required();
    fit->add_option("--dissipation", fit_diss, "reference dissipation for the ratios");
    fit->add_option("--out", fit_out, "output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return bad_config;
    }

    try {
        if (*sim) return cmd_simulate(common);
        if (*diag) return cmd_diagnose(common, dir);
        if (*bud) return cmd_budget(common, dir, law);
        if (*shear) return cmd_shear(nus, shear_dt, shear_t, shear_seed);
        if (*burg) return cmd_burgers(common);
        if (*fit) return cmd_fit(fit_in, fit_lo, fit_hi, fit_diss, fit_out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return bad_config;
    } catch (const FormatError& e) {
        std::cerr << "unreadable input: " << e.what() << "\n";
        return bad_config;
    } catch (const StepSizeError& e) {
        std::cerr << "diverged: " << e.what() << " (u_max = " << e.u_max << ")\n";
        return diverged;
    } catch (const DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return diverged;
    } catch (const MissingPressureError& e) {
        std::cerr << "missing pressure: " << e.what() << "\n";
        return no_pressure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return failure;
}
