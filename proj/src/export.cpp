#include "nstori/export.hpp"

#include "nstori/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nstori {

using nlohmann::json;

namespace {

const char* branch_name(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

void put_row(std::ostream& out, double t, const State& s, Branch b, bool event)
{
    out << t << ',' << s.phi << ',' << s.x << ',' << s.y << ',' << branch_name(b) << ',' << (event ? 1 : 0) << '\n';
}

} // namespace

void write_orbit_csv(std::ostream& out, const Trajectory& traj, double step)
{
    if (!(step > 0.0)) {
        throw std::invalid_argument("sampling step must be positive");
    }
    const auto old_precision = out.precision(17);
    out << "t,phi,x,y,branch,is_event\n";
    const auto& events = traj.events();
    const auto& segments = traj.segments();
    std::size_t e = 0;
    std::size_t seg = 0;
    // Branch in force just after elapsed time t; t never decreases.
    auto branch_after = [&](double t) {
        while (seg + 1 < segments.size() && segments[seg + 1].t_start <= t) {
            ++seg;
        }
        return segments[seg].branch;
    };
    const auto samples = static_cast<long long>(std::floor(traj.duration() / step + 1e-9));
    for (long long k = 0; k <= samples; ++k) {
        const double t = std::min(static_cast<double>(k) * step, traj.duration());
        for (; e < events.size() && events[e].time < t; ++e) {
            put_row(out, events[e].time, events[e].state, branch_after(events[e].time), true);
        }
        put_row(out, t, traj.at(t), branch_after(t), false);
    }
    for (; e < events.size(); ++e) {
        put_row(out, events[e].time, events[e].state, branch_after(events[e].time), true);
    }
    out.precision(old_precision);
}

std::string orbit_to_json(const Trajectory& traj, double step)
{
    if (!(step > 0.0)) {
        throw std::invalid_argument("sampling step must be positive");
    }
    json samples = json::array();
    const auto count = static_cast<long long>(std::floor(traj.duration() / step + 1e-9));
    for (long long k = 0; k <= count; ++k) {
        const double t = std::min(static_cast<double>(k) * step, traj.duration());
        const State s = traj.at(t);
        samples.push_back({t, s.phi, s.x, s.y});
    }
    json events = json::array();
    for (const auto& e : traj.events()) {
        events.push_back({e.time, e.state.phi, e.state.x, e.state.y});
    }
    json segments = json::array();
    for (const auto& seg : traj.segments()) {
        segments.push_back({{"branch", branch_name(seg.branch)}, {"t_start", seg.t_start}, {"duration", seg.duration}});
    }
    return json{{"columns", {"t", "phi", "x", "y"}}, {"samples", samples}, {"events", events}, {"segments", segments}}
        .dump();
}

void write_mesh_csv(std::ostream& out, const TorusMesh& mesh)
{
    const auto old_precision = out.precision(17);
    out << "sign,i,j,phi,x,y\n";
    for (Branch side : {Branch::plus, Branch::minus}) {
        const char sign = side == Branch::plus ? '+' : '-';
        for (const auto& v : side == Branch::plus ? mesh.plus : mesh.minus) {
            out << sign << ',' << v.i << ',' << v.j << ',' << v.phi << ',' << v.x << ',' << v.y << '\n';
        }
    }
    out.precision(old_precision);
}

void write_mesh_facets(std::ostream& out, const TorusMesh& mesh)
{
    const auto old_precision = out.precision(17);
    for (Branch side : {Branch::plus, Branch::minus}) {
        const char sign = side == Branch::plus ? '+' : '-';
        auto put = [&](const MeshVertex& a, const MeshVertex& b, const MeshVertex& c) {
            out << sign;
            for (const auto* v : {&a, &b, &c}) {
                out << ' ' << v->phi << ' ' << v->x << ' ' << v->y;
            }
            out << '\n';
        };
        for (int i = 0; i + 1 < mesh.n_phi; ++i) {
            for (int j = 0; j + 1 < mesh.n_y; ++j) {
                const auto& v00 = mesh.vertex(side, i, j);
                const auto& v10 = mesh.vertex(side, i + 1, j);
                const auto& v01 = mesh.vertex(side, i, j + 1);
                const auto& v11 = mesh.vertex(side, i + 1, j + 1);
                put(v00, v10, v11);
                put(v00, v11, v01);
            }
        }
    }
    out.precision(old_precision);
}

std::string utc_timestamp()
{
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

std::string mesh_to_json(const TorusMesh& mesh)
{
    auto chart = [](const std::vector<MeshVertex>& vs) {
        json rows = json::array();
        for (const auto& v : vs) {
            rows.push_back({v.i, v.j, v.phi, v.x, v.y});
        }
        return rows;
    };
    return json{{"n_phi", mesh.n_phi},
                {"n_y", mesh.n_y},
                {"columns", {"i", "j", "phi", "x", "y"}},
                {"plus", chart(mesh.plus)},
                {"minus", chart(mesh.minus)}}
        .dump();
}

std::string report_to_json(const CertificationReport& r)
{
    json doc;
    doc["forcing"] = r.forcing_name;
    doc["timestamp"] = utc_timestamp();
    doc["n"] = r.n;
    doc["cond1"] = {{"pass", r.cond1.pass}, {"margin", r.cond1.margin}, {"sup_value", r.cond1.sup_value}};
    json cond2 = {{"pass", r.cond2.pass()},
                  {"status", to_string(r.cond2.status)},
                  {"margin", r.cond2.margin},
                  {"grid", {r.cond2.grid_phi, r.cond2.grid_t}},
                  {"lipschitz_bound_used", r.cond2.lipschitz_bound_used}};
    if (r.cond2.witness) {
        cond2["witness"] = {{"phi0", r.cond2.witness->first}, {"t", r.cond2.witness->second}};
    }
    doc["cond2"] = cond2;
    doc["method"] = to_string(r.method);
    doc["certified"] = r.certified;
    doc["grid_statistics"] = {{"analytic_cells", r.cond2.analytic_cells},
                              {"grid_cells", r.cond2.grid_cells},
                              {"finest_resolution", r.cond2.finest_resolution}};
    return doc.dump(2);
}

std::string invariance_to_json(const InvarianceReport& r, const std::string& forcing_name)
{
    json doc{{"forcing", forcing_name},
             {"timestamp", utc_timestamp()},
             {"n", r.n},
             {"phi_samples", r.phi_samples},
             {"rel1_max_early", r.rel1_max_early},
             {"rel2_max_defect", r.rel2_max_defect},
             {"return_max_defect", r.return_max_defect},
             {"tolerance", kInvarianceTolerance},
             {"passed", r.passed}};
    return doc.dump(2);
}

void atomic_write(const std::filesystem::path& path, const std::string& contents)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw Error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace nstori
