// nstori: simulate orbits, certify invariant tori, export meshes and reports.
//
// Exit codes: 0 success, 1 internal error, 2 configuration error,
// 3 degenerate crossing, 4 certification failure.

#include "nstori/certify.hpp"
#include "nstori/errors.hpp"
#include "nstori/experiment.hpp"
#include "nstori/export.hpp"
#include "nstori/flow.hpp"
#include "nstori/forcing_config.hpp"
#include "nstori/torus.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nstori;

namespace {

enum Exit { ok = 0, internal = 1, config = 2, degenerate = 3, not_certified = 4 };

struct CertificationFailure : Error {
    using Error::Error;
};

struct RunConfig {
    std::string config_file;
    std::string forcing;
    std::string out = ".";
    std::string format = "csv";
    int n = 1;
    double duration = 10.0;
    std::string resolution; // empty: command default
    std::uint64_t seed = 1;
    double phi0 = 0.0;
    double x0 = 0.0;
    double y0 = 1.0;
    double step = 0.0; // 0: T / 100
    int n_max = 64;
    int samples = 64;
    int starts = 10;
    double periods = 1e4;
    double box = 1.0;
    double linf_bound = 0.0; // 0: unused
};

// Registers the shared flags on a subcommand.
void add_common(CLI::App* sub, RunConfig& c)
{
    sub->add_option("--config", c.config_file, "JSON file with default values for any flag");
    sub->add_option("--forcing", c.forcing, "forcing document (JSON)");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--format", c.format, "csv | json (mesh also accepts facets)");
    sub->add_option("--n", c.n, "torus index");
    sub->add_option("--duration", c.duration, "simulated time");
    sub->add_option("--resolution", c.resolution, "grid as <int>x<int> (certify: cells per period, mesh: vertices)");
    sub->add_option("--seed", c.seed, "seed for random initial conditions");
}

// Values from --config fill every option that was not given on the command line.
void apply_config_file(CLI::App* sub, RunConfig& c)
{
    if (c.config_file.empty()) {
        return;
    }
    std::ifstream in(c.config_file);
    if (!in) {
        throw ConfigError("cannot open config file " + c.config_file);
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config file must hold a JSON object");
    }
    for (const auto& [key, value] : doc.items()) {
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw ConfigError("unknown config key '" + key + "' for " + sub->get_name());
        }
        if (opt->count() > 0) {
            continue;
        }
        const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
        try {
            opt->add_result(text);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

std::pair<int, int> parse_resolution(std::string text, const char* fallback)
{
    if (text.empty()) {
        text = fallback;
    }
    static const std::regex re(R"((\d+)x(\d+))");
    std::smatch m;
    if (!std::regex_match(text, m, re)) {
        throw ConfigError("resolution must look like 64x32, got '" + text + "'");
    }
    return {std::stoi(m[1]), std::stoi(m[2])};
}

PeriodicForcing forcing_of(const RunConfig& c)
{
    if (c.forcing.empty()) {
        throw ConfigError("--forcing is required");
    }
    return load_forcing(c.forcing);
}

fs::path out_path(const RunConfig& c, const std::string& name)
{
    std::error_code ec;
    fs::create_directories(c.out, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + c.out + ": " + ec.message());
    }
    return fs::path(c.out) / name;
}

void require_format(const RunConfig& c, std::initializer_list<const char*> allowed)
{
    for (const char* a : allowed) {
        if (c.format == a) {
            return;
        }
    }
    throw ConfigError("unsupported --format '" + c.format + "'");
}

json state_json(const State& s) { return {{"phi", s.phi}, {"x", s.x}, {"y", s.y}}; }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_simulate(const RunConfig& c)
{
    require_format(c, {"csv", "json"});
    const auto f = forcing_of(c);
    const double step = c.step > 0.0 ? c.step : f.period() / 100.0;
    const State s0{c.phi0, c.x0, c.y0};
    const auto traj = evolve(f, s0, c.duration);

    std::string orbit;
    if (c.format == "csv") {
        std::ostringstream os;
        write_orbit_csv(os, traj, step);
        orbit = os.str();
    } else {
        orbit = orbit_to_json(traj, step) + "\n";
    }
    const auto summary = summarize_orbit(f, traj, step, c.n_max);
    json doc{{"forcing", f.name()},
             {"start", state_json(s0)},
             {"duration", summary.duration},
             {"step", step},
             {"events", summary.events},
             {"sup_abs_x_plus_abs_y", summary.sup_abs_sum},
             {"final", state_json(summary.final_state)},
             {"enclosing_certified_n", summary.enclosing_n ? json(*summary.enclosing_n) : json(nullptr)}};
    atomic_write(out_path(c, c.format == "csv" ? "orbit.csv" : "orbit.json"), orbit);
    atomic_write(out_path(c, "summary.json"), dump(doc));
    std::cout << "events " << summary.events << ", sup(|x|+|y|) " << summary.sup_abs_sum << "\n";
    return ok;
}

int cmd_certify(const RunConfig& c)
{
    const auto f = forcing_of(c);
    const auto [rphi, rt] = parse_resolution(c.resolution, "256x256");
    (void)rt;
    CertificationReport rep;
    if (c.linf_bound > 0.0) {
        rep = certify_linf(f, c.n, c.linf_bound);
    } else {
        GridOptions opt;
        opt.base_resolution = rphi;
        opt.max_resolution = std::max(rphi, opt.max_resolution);
        rep = certify(f, c.n, opt);
    }
    atomic_write(out_path(c, "certificate.json"), report_to_json(rep) + "\n");
    std::cout << "n " << rep.n << ": " << (rep.certified ? "certified" : "not certified") << " ("
              << to_string(rep.method) << ")\n";
    if (!rep.certified) {
        throw CertificationFailure("torus index " + std::to_string(c.n) + " not certified");
    }
    return ok;
}

int cmd_find_nstar(const RunConfig& c)
{
    const auto f = forcing_of(c);
    const auto r = find_min_certified_n(f, c.n_max);
    json doc{{"forcing", f.name()},
             {"timestamp", utc_timestamp()},
             {"n_max", c.n_max},
             {"n_min", r.n_min ? json(*r.n_min) : json(nullptr)},
             {"extends_upward", r.extends_upward},
             {"probed", r.probed}};
    atomic_write(out_path(c, "nstar.json"), dump(doc));
    if (!r.n_min) {
        throw CertificationFailure("no certified index up to " + std::to_string(c.n_max));
    }
    std::cout << "n* " << *r.n_min << "\n";
    return ok;
}

int cmd_mesh(const RunConfig& c)
{
    require_format(c, {"csv", "json", "facets"});
    const auto f = forcing_of(c);
    const auto [n_phi, n_y] = parse_resolution(c.resolution, "64x32");
    const TorusSpec spec(f, c.n);
    const auto mesh = build_mesh(spec, n_phi, n_y);
    std::ostringstream os;
    os.precision(17);
    std::string name;
    if (c.format == "csv") {
        write_mesh_csv(os, mesh);
        name = "mesh.csv";
    } else if (c.format == "facets") {
        write_mesh_facets(os, mesh);
        name = "mesh.facets";
    } else {
        os << mesh_to_json(mesh) << "\n";
        name = "mesh.json";
    }
    atomic_write(out_path(c, name), os.str());
    std::cout << "mesh " << n_phi << "x" << n_y << " written\n";
    return ok;
}

int cmd_verify(const RunConfig& c)
{
    const auto f = forcing_of(c);
    if (!certify(f, c.n).certified) {
        throw CertificationFailure("torus index " + std::to_string(c.n) + " not certified; nothing to verify");
    }
    const auto rep = verify_invariance(f, c.n, c.samples);
    atomic_write(out_path(c, "invariance.json"), invariance_to_json(rep, f.name()) + "\n");
    std::cout << "invariance " << (rep.passed ? "holds" : "violated") << "\n";
    if (!rep.passed) {
        throw CertificationFailure("invariance check failed");
    }
    return ok;
}

int cmd_bounded(const RunConfig& c)
{
    const auto f = forcing_of(c);
    BoundedOptions opt;
    opt.starts = c.starts;
    opt.periods = c.periods;
    opt.seed = c.seed;
    opt.box = c.box;
    opt.n_max = c.n_max;
    const auto rep = run_boundedness(f, opt);
    json runs = json::array();
    for (const auto& r : rep.runs) {
        json sup = json::array();
        for (const auto& [t, v] : r.running_sup) {
            sup.push_back({t, v});
        }
        runs.push_back({{"start", state_json(r.start)},
                        {"n", r.n},
                        {"samples", r.samples},
                        {"outside_samples", r.outside_samples},
                        {"torus_bound", r.torus_bound},
                        {"late_growth", r.late_growth},
                        {"running_sup", sup}});
    }
    json doc{{"forcing", f.name()},
             {"seed", c.seed},
             {"periods", c.periods},
             {"never_exited", rep.never_exited},
             {"runs", runs}};
    atomic_write(out_path(c, "bounded.json"), dump(doc));
    std::cout << (rep.never_exited ? "all orbits stayed inside their tori" : "an orbit left its torus") << "\n";
    if (!rep.never_exited) {
        throw CertificationFailure("orbit left the enclosing certified torus");
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Invariant tori of the forced switched oscillator x'' + sign(x) = p(t)"};
    app.require_subcommand(1);
    RunConfig c;

    auto* simulate = app.add_subcommand("simulate", "evolve one orbit; writes orbit and summary");
    add_common(simulate, c);
    simulate->add_option("--phi0", c.phi0, "initial forcing phase");
    simulate->add_option("--x0", c.x0, "initial position");
    simulate->add_option("--y0", c.y0, "initial velocity");
    simulate->add_option("--step", c.step, "sampling step (default T/100)");
    simulate->add_option("--n-max", c.n_max, "largest index tried for the enclosing torus");

    auto* cert = app.add_subcommand("certify", "certify one torus index");
    add_common(cert, c);
    cert->add_option("--linf-bound", c.linf_bound, "use the L-infinity threshold with sup|p| < bound");

    auto* nstar = app.add_subcommand("find-nstar", "smallest certified index");
    add_common(nstar, c);
    nstar->add_option("--n-max", c.n_max, "search limit");

    auto* mesh = app.add_subcommand("mesh", "export the torus surface");
    add_common(mesh, c);

    auto* verify = app.add_subcommand("verify", "flow-based invariance check of a certified torus");
    add_common(verify, c);
    verify->add_option("--samples", c.samples, "phi0 samples");

    auto* bounded = app.add_subcommand("bounded", "long-horizon boundedness experiment");
    add_common(bounded, c);
    bounded->add_option("--starts", c.starts, "number of random starts");
    bounded->add_option("--periods", c.periods, "run length in forcing periods");
    bounded->add_option("--box", c.box, "starts drawn with |x|, |y| <= box");
    bounded->add_option("--n-max", c.n_max, "largest index tried");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config;
    }

    try {
        for (auto* sub : app.get_subcommands()) {
            apply_config_file(sub, c);
        }
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "simulate") {
            return cmd_simulate(c);
        }
        if (name == "certify") {
            return cmd_certify(c);
        }
        if (name == "find-nstar") {
            return cmd_find_nstar(c);
        }
        if (name == "mesh") {
            return cmd_mesh(c);
        }
        if (name == "verify") {
            return cmd_verify(c);
        }
        return cmd_bounded(c);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const NonZeroAverage& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const DegenerateStart& e) {
        std::cerr << "degenerate start: " << e.what() << "\n";
        return degenerate;
    } catch (const DegenerateCrossing& e) {
        std::cerr << "degenerate crossing: " << e.what() << "\n";
        return degenerate;
    } catch (const CertificationFailure& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return not_certified;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return internal;
    }
}
