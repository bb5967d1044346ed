#include "nstori/certify.hpp"
#include "nstori/errors.hpp"
#include "nstori/export.hpp"
#include "nstori/flow.hpp"
#include "nstori/forcing.hpp"
#include "nstori/forcing_config.hpp"
#include "nstori/oracle.hpp"
#include "nstori/torus.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

namespace py = pybind11;
using namespace nstori;

PYBIND11_MODULE(_nstori, m)
{
    m.doc() = "Closed-form flows, torus charts and certification for x'' + sign(x) = p(t)";

    auto base = py::register_exception<Error>(m, "NstoriError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DegenerateStart>(m, "DegenerateStart", base.ptr());
    py::register_exception<DegenerateCrossing>(m, "DegenerateCrossing", base.ptr());
    py::register_exception<NonZeroAverage>(m, "NonZeroAverage", base.ptr());
    py::register_exception<UnboundedRepresentation>(m, "UnboundedRepresentation", base.ptr());

    py::enum_<Branch>(m, "Branch").value("plus", Branch::plus).value("minus", Branch::minus);
    py::enum_<Containment>(m, "Containment")
        .value("inside", Containment::inside)
        .value("on", Containment::on)
        .value("outside", Containment::outside);

    py::class_<State>(m, "State")
        .def(py::init<double, double, double>(), py::arg("phi") = 0.0, py::arg("x") = 0.0, py::arg("y") = 0.0)
        .def_readwrite("phi", &State::phi)
        .def_readwrite("x", &State::x)
        .def_readwrite("y", &State::y)
        .def("astuple", [](const State& s) { return std::make_tuple(s.phi, s.x, s.y); })
        .def("__repr__", [](const State& s) {
            return "State(phi=" + std::to_string(s.phi) + ", x=" + std::to_string(s.x) + ", y=" + std::to_string(s.y) +
                   ")";
        });

    py::class_<PeriodicForcing>(m, "PeriodicForcing")
        .def_static(
            "piecewise",
            [](std::string name, double period, const std::vector<std::pair<double, std::vector<double>>>& pieces) {
                std::vector<PolySegment> segs;
                for (const auto& [start, coeffs] : pieces) {
                    segs.push_back({start, coeffs});
                }
                return PeriodicForcing::piecewise(std::move(name), period, std::move(segs));
            },
            py::arg("name"), py::arg("period"), py::arg("pieces"),
            "pieces: [(breakpoint, [c0, c1, ...])], coefficients in t - breakpoint")
        .def_static(
            "trig",
            [](std::string name, double period, const std::vector<std::tuple<int, double, double>>& terms) {
                std::vector<Harmonic> hs;
                for (const auto& [k, s, c] : terms) {
                    hs.push_back({k, s, c});
                }
                return PeriodicForcing::trig(std::move(name), period, std::move(hs));
            },
            py::arg("name"), py::arg("period"), py::arg("terms"), "terms: [(k, sin_coeff, cos_coeff)]")
        .def_static("table", &PeriodicForcing::table, py::arg("name"), py::arg("period"), py::arg("samples"),
                    py::arg("order"))
        .def_static("from_json", &parse_forcing, py::arg("text"))
        .def_static("load", [](const std::string& path) { return load_forcing(path); }, py::arg("path"))
        .def("to_json", [](const PeriodicForcing& f) { return forcing_to_json(f); })
        .def("p", &PeriodicForcing::p)
        .def("P1", &PeriodicForcing::P1)
        .def("P2", &PeriodicForcing::P2)
        .def("stats",
             [](const PeriodicForcing& f) {
                 const auto s = f.stats();
                 return py::dict(py::arg("mean") = s.mean, py::arg("P2_of_T") = s.P2_of_T, py::arg("M") = s.M);
             })
        .def("has_zero_average", &PeriodicForcing::has_zero_average)
        .def("sup_abs_p", &PeriodicForcing::sup_abs_p)
        .def_property_readonly("period", &PeriodicForcing::period)
        .def_property_readonly("name", &PeriodicForcing::name);

    m.def("flow_plus", &flow_plus, py::arg("forcing"), py::arg("t"), py::arg("state"));
    m.def("flow_minus", &flow_minus, py::arg("forcing"), py::arg("t"), py::arg("state"));
    m.def("next_crossing", &next_crossing, py::arg("forcing"), py::arg("branch"), py::arg("state"),
          py::arg("horizon"));

    py::class_<Trajectory>(m, "Trajectory")
        .def("at", &Trajectory::at, py::arg("t"))
        .def_property_readonly("duration", &Trajectory::duration)
        .def_property_readonly("final_state", &Trajectory::final_state)
        .def_property_readonly("event_times",
                               [](const Trajectory& t) {
                                   std::vector<double> out;
                                   for (const auto& e : t.events()) {
                                       out.push_back(e.time);
                                   }
                                   return out;
                               })
        .def_property_readonly("event_states",
                               [](const Trajectory& t) {
                                   std::vector<State> out;
                                   for (const auto& e : t.events()) {
                                       out.push_back(e.state);
                                   }
                                   return out;
                               })
        .def_property_readonly("branches", [](const Trajectory& t) {
            std::vector<Branch> out;
            for (const auto& s : t.segments()) {
                out.push_back(s.branch);
            }
            return out;
        });

    m.def("evolve", &evolve, py::arg("forcing"), py::arg("state"), py::arg("duration"), py::keep_alive<0, 1>());
    m.def("time_T_map", &time_T_map, py::arg("forcing"), py::arg("state"));

    py::class_<TorusSpec>(m, "TorusSpec")
        .def(py::init<const PeriodicForcing&, int>(), py::arg("forcing"), py::arg("n"), py::keep_alive<1, 2>())
        .def_property_readonly("n", &TorusSpec::n)
        .def_property_readonly("period", &TorusSpec::period);

    m.def("boundary_y", &boundary_y, py::arg("spec"), py::arg("side"), py::arg("phi0"));
    m.def("chart_x", &chart_x, py::arg("spec"), py::arg("side"), py::arg("phi0"), py::arg("y0"));
    m.def("closure_check", &closure_check, py::arg("spec"), py::arg("y_points") = 256);
    m.def("contains", &contains, py::arg("spec"), py::arg("state"));
    m.def(
        "build_mesh",
        [](const TorusSpec& spec, int n_phi, int n_y) {
            const auto mesh = build_mesh(spec, n_phi, n_y);
            auto rows = [](const std::vector<MeshVertex>& vs) {
                std::vector<std::tuple<double, double, double>> out;
                for (const auto& v : vs) {
                    out.emplace_back(v.phi, v.x, v.y);
                }
                return out;
            };
            return py::dict(py::arg("n_phi") = n_phi, py::arg("n_y") = n_y, py::arg("plus") = rows(mesh.plus),
                            py::arg("minus") = rows(mesh.minus));
        },
        py::arg("spec"), py::arg("n_phi"), py::arg("n_y"), "vertices as (phi, x, y), row-major in phi");

    py::class_<CertificationReport>(m, "CertificationReport")
        .def_readonly("n", &CertificationReport::n)
        .def_readonly("certified", &CertificationReport::certified)
        .def_property_readonly("cond1_margin", [](const CertificationReport& r) { return r.cond1.margin; })
        .def_property_readonly("cond2_margin", [](const CertificationReport& r) { return r.cond2.margin; })
        .def_property_readonly("cond2_status", [](const CertificationReport& r) { return to_string(r.cond2.status); })
        .def_property_readonly("method", [](const CertificationReport& r) { return to_string(r.method); })
        .def("to_json", &report_to_json);

    m.def("certify", [](const PeriodicForcing& f, int n) { return certify(f, n); }, py::arg("forcing"), py::arg("n"));
    m.def(
        "find_min_certified_n",
        [](const PeriodicForcing& f, int n_max) {
            const auto r = find_min_certified_n(f, n_max);
            return py::dict(py::arg("n_min") = r.n_min, py::arg("extends_upward") = r.extends_upward,
                            py::arg("probed") = r.probed);
        },
        py::arg("forcing"), py::arg("n_max") = 64);
    m.def("linf_certificate", &linf_certificate, py::arg("forcing"), py::arg("M_bound"));
    m.def(
        "verify_invariance",
        [](const PeriodicForcing& f, int n, int phi_samples) {
            const auto r = verify_invariance(f, n, phi_samples);
            return py::dict(py::arg("passed") = r.passed, py::arg("rel1_max_early") = r.rel1_max_early,
                            py::arg("rel2_max_defect") = r.rel2_max_defect,
                            py::arg("return_max_defect") = r.return_max_defect);
        },
        py::arg("forcing"), py::arg("n"), py::arg("phi_samples") = 64);

    m.def(
        "rk_evolve",
        [](const PeriodicForcing& f, const State& s0, double duration, double rk_step) {
            oracle::OracleConfig cfg;
            cfg.rk_step = rk_step;
            std::vector<std::tuple<double, double, double, double>> out;
            for (const auto& s : oracle::rk_evolve(f, s0, duration, cfg)) {
                out.emplace_back(s.t, s.state.phi, s.state.x, s.state.y);
            }
            return out;
        },
        py::arg("forcing"), py::arg("state"), py::arg("duration"), py::arg("rk_step") = 1.0 / 2000.0,
        "reference RK4 samples as (t, phi, x, y)");
    m.def(
        "scan_conditions",
        [](const PeriodicForcing& f, int n, int n_phi, int n_t) {
            const auto s = oracle::scan_conditions(f, n, n_phi, n_t);
            return py::dict(py::arg("cond1_margin") = s.cond1_margin, py::arg("cond2_margin") = s.cond2_margin,
                            py::arg("cond2_witness") = s.cond2_witness, py::arg("violation") = s.violation());
        },
        py::arg("forcing"), py::arg("n"), py::arg("n_phi") = 2000, py::arg("n_t") = 2000);
    m.def("quad_primitives", [](const PeriodicForcing& f, double t) { return oracle::quad_primitives(f, t); },
          py::arg("forcing"), py::arg("t"));
}
