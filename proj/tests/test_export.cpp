#include "corpus.hpp"

#include "nstori/experiment.hpp"
#include "nstori/export.hpp"
#include "nstori/forcing_config.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace nstori;
using namespace nstori::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("nstori_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

#ifdef NSTORI_CLI_PATH
int run_cli(const std::string& args)
{
    const std::string cmd = std::string(NSTORI_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

void write_forcing(const fs::path& p, const PeriodicForcing& f)
{
    std::ofstream(p) << forcing_to_json(f);
}

} // namespace

TEST_CASE("orbit csv")
{
    const auto z = zero_forcing();
    const auto traj = evolve(z, {0.0, 0.0, 1.0}, 4.0);
    std::ostringstream os;
    write_orbit_csv(os, traj, 0.5);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,phi,x,y,branch,is_event");
    int rows = 0;
    int events = 0;
    double last_t = -1.0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string t;
        std::getline(cells, t, ',');
        CHECK(std::stod(t) >= last_t);
        last_t = std::stod(t);
        if (line.back() == '1') {
            ++events;
            CHECK(line.find("minus") != std::string::npos);
        }
    }
    CHECK(rows == 9 + static_cast<int>(traj.events().size()));
    CHECK(events == static_cast<int>(traj.events().size()));
    CHECK(os.str().find("0.5,0.5,0.375,0.5,plus,0") != std::string::npos);
}

TEST_CASE("mesh exports")
{
    const auto z = zero_forcing();
    const auto mesh = build_mesh(TorusSpec(z, 1), 3, 3);
    std::ostringstream csv;
    write_mesh_csv(csv, mesh);
    CHECK(csv.str().rfind("sign,i,j,phi,x,y\n", 0) == 0);
    CHECK(csv.str().find("+,1,1,0.5,0.125,0\n") != std::string::npos);

    std::ostringstream facets;
    write_mesh_facets(facets, mesh);
    std::istringstream in(facets.str());
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        std::istringstream w(line);
        std::string sign;
        w >> sign;
        CHECK((sign == "+" || sign == "-"));
        int numbers = 0;
        double v;
        while (w >> v) {
            ++numbers;
        }
        CHECK(numbers == 9);
    }
    CHECK(n == 2 * 2 * 2 * 2); // two charts, 2x2 quads, two triangles each

    const auto doc = json::parse(mesh_to_json(mesh));
    CHECK(doc["plus"].size() == 9);
    CHECK(doc["plus"][4][3].get<double>() == doctest::Approx(0.125));
}

TEST_CASE("report documents")
{
    const auto rep = certify(square_wave(), 2);
    const auto doc = json::parse(report_to_json(rep));
    for (const char* key : {"forcing", "timestamp", "n", "cond1", "cond2", "method", "certified", "grid_statistics"}) {
        CHECK(doc.contains(key));
    }
    CHECK(doc["certified"].get<bool>());
    CHECK(doc["cond2"]["grid"][0].get<int>() == 256);
    CHECK(doc["cond2"].contains("lipschitz_bound_used"));

    const auto inv = json::parse(invariance_to_json(verify_invariance(square_wave(), 2, 8), "square"));
    CHECK(inv["passed"].get<bool>());
}

TEST_CASE("atomic write replaces the target in one step")
{
    const auto dir = scratch("atomic");
    const auto target = dir / "out.txt";
    atomic_write(target, "first");
    atomic_write(target, "second");
    CHECK(slurp(target) == "second");
    CHECK_FALSE(fs::exists(dir / "out.txt.tmp"));
    CHECK_THROWS(atomic_write(dir / "missing" / "x.txt", "data"));
}

TEST_CASE("orbit summary")
{
    const auto z = zero_forcing();
    const auto traj = evolve(z, {0.0, 0.0, 1.0}, 100.0);
    const auto s = summarize_orbit(z, traj, 0.01);
    // max of |t - t^2/2| + |1 - t| on [0, 2] is 1
    CHECK(s.sup_abs_sum == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(s.enclosing_n);
    CHECK(*s.enclosing_n == 2);
}

#ifdef NSTORI_CLI_PATH
TEST_CASE("cli commands")
{
    const auto dir = scratch("cli");
    const auto zero = dir / "zero.json";
    const auto sq = dir / "square.json";
    const auto big = dir / "big.json";
    const auto tilt = dir / "tilt.json";
    write_forcing(zero, zero_forcing());
    write_forcing(sq, square_wave());
    write_forcing(big, sinusoid(10.0));
    write_forcing(tilt, PeriodicForcing::trig("tilt", 1.0, {{0, 0.0, 0.2}, {1, 1.0, 0.0}}));
    const std::string out = " --out " + (dir / "o").string();

    CHECK(run_cli("simulate --forcing " + zero.string() + out + " --duration 100 --y0 1") == 0);
    const auto summary = json::parse(slurp(dir / "o" / "summary.json"));
    CHECK(summary["sup_abs_x_plus_abs_y"].get<double>() == doctest::Approx(1.0));
    CHECK(summary["enclosing_certified_n"].get<int>() == 2);
    const std::string orbit1 = slurp(dir / "o" / "orbit.csv");

    // reproducible byte for byte
    CHECK(run_cli("simulate --forcing " + zero.string() + out + " --duration 100 --y0 1") == 0);
    CHECK(slurp(dir / "o" / "orbit.csv") == orbit1);

    CHECK(run_cli("simulate --format json --forcing " + sq.string() + out + " --duration 5 --x0 0.3 --y0 0") == 0);
    CHECK(json::parse(slurp(dir / "o" / "orbit.json"))["samples"].size() == 501);

    CHECK(run_cli("certify --forcing " + zero.string() + out + " --n 1") == 0);
    const auto cert = json::parse(slurp(dir / "o" / "certificate.json"));
    CHECK(cert["certified"].get<bool>());
    CHECK(cert["cond1"]["margin"].get<double>() == doctest::Approx(0.5));
    CHECK(cert["method"] == "analytic-M-bound");

    CHECK(run_cli("certify --forcing " + sq.string() + out + " --n 2 --linf-bound 1.01") == 0);
    CHECK(json::parse(slurp(dir / "o" / "certificate.json"))["method"] == "linf-proposition");

    CHECK(run_cli("find-nstar --forcing " + sq.string() + out) == 0);
    const auto nstar = json::parse(slurp(dir / "o" / "nstar.json"));
    CHECK(nstar["n_min"].get<int>() == *find_min_certified_n(square_wave()).n_min);

    CHECK(run_cli("mesh --forcing " + zero.string() + out + " --n 1 --resolution 5x3") == 0);
    CHECK(slurp(dir / "o" / "mesh.csv").find(",0.125,0\n") != std::string::npos);
    CHECK(run_cli("mesh --format facets --forcing " + zero.string() + out + " --n 1") == 0);
    CHECK(fs::exists(dir / "o" / "mesh.facets"));

    CHECK(run_cli("verify --forcing " + sq.string() + out + " --n 2 --samples 16") == 0);
    CHECK(json::parse(slurp(dir / "o" / "invariance.json"))["passed"].get<bool>());

    CHECK(run_cli("bounded --forcing " + sq.string() + out + " --starts 2 --periods 50 --seed 3") == 0);
    const auto b1 = slurp(dir / "o" / "bounded.json");
    CHECK(json::parse(b1)["never_exited"].get<bool>());
    CHECK(run_cli("bounded --forcing " + sq.string() + out + " --starts 2 --periods 50 --seed 3") == 0);
    CHECK(slurp(dir / "o" / "bounded.json") == b1);

    // config file plus overriding flag
    const auto cfg = dir / "cfg.json";
    std::ofstream(cfg) << json{{"forcing", sq.string()}, {"n", 1}, {"out", (dir / "c").string()}}.dump();
    CHECK(run_cli("certify --config " + cfg.string() + " --n 3") == 0);
    CHECK(json::parse(slurp(dir / "c" / "certificate.json"))["n"].get<int>() == 3);

    // exit code contract
    CHECK(run_cli("certify --forcing " + (dir / "absent.json").string() + out + " --n 1") == 2);
    CHECK(run_cli("mesh --forcing " + zero.string() + out + " --resolution 5by3") == 2);
    CHECK(run_cli("certify --forcing " + tilt.string() + out + " --n 2") == 2);
    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("simulate --forcing " + zero.string() + out + " --x0 0 --y0 0") == 3);
    CHECK(run_cli("certify --forcing " + big.string() + out + " --n 1") == 4);
    CHECK(run_cli("verify --forcing " + big.string() + out + " --n 1") == 4);
    CHECK_FALSE(fs::exists(dir / "o" / "certificate.json.tmp"));
}
#endif
