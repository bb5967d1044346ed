#include "nstori/forcing_config.hpp"

#include "nstori/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace nstori {

using nlohmann::json;

namespace {

PeriodicForcing from_json(const json& doc)
{
    const auto name = doc.value("name", std::string("forcing"));
    const double period = doc.at("period").get<double>();
    const auto kind = doc.at("kind").get<std::string>();
    const auto& payload = doc.at("payload");

    if (kind == "piecewise") {
        std::vector<PolySegment> segments;
        for (const auto& seg : payload) {
            segments.push_back({seg.at("breakpoint").get<double>(), seg.at("coeffs").get<std::vector<double>>()});
        }
        return PeriodicForcing::piecewise(name, period, std::move(segments));
    }
    if (kind == "trig") {
        std::vector<Harmonic> harmonics;
        for (const auto& h : payload) {
            harmonics.push_back({h.at("k").get<int>(), h.value("sin", 0.0), h.value("cos", 0.0)});
        }
        return PeriodicForcing::trig(name, period, std::move(harmonics));
    }
    if (kind == "table") {
        return PeriodicForcing::table(name, period, payload.at("samples").get<std::vector<double>>(),
                                      payload.value("order", 0));
    }
    throw ConfigError("unknown forcing kind '" + kind + "'");
}

} // namespace

PeriodicForcing parse_forcing(const std::string& text)
{
    try {
        return from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed forcing document: ") + e.what());
    }
}

PeriodicForcing load_forcing(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open forcing file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_forcing(buf.str());
}

std::string forcing_to_json(const PeriodicForcing& forcing)
{
    json doc;
    doc["name"] = forcing.name();
    doc["period"] = forcing.period();
    switch (forcing.kind()) {
    case ForcingKind::piecewise: {
        doc["kind"] = "piecewise";
        json payload = json::array();
        for (const auto& s : forcing.segments()) {
            payload.push_back({{"breakpoint", s.start}, {"coeffs", s.coeffs}});
        }
        doc["payload"] = payload;
        break;
    }
    case ForcingKind::trig: {
        doc["kind"] = "trig";
        json payload = json::array();
        for (const auto& h : forcing.harmonics()) {
            payload.push_back({{"k", h.k}, {"sin", h.sin_coeff}, {"cos", h.cos_coeff}});
        }
        doc["payload"] = payload;
        break;
    }
    case ForcingKind::table:
        doc["kind"] = "table";
        doc["payload"] = {{"samples", forcing.table_samples()}, {"order", forcing.table_order()}};
        break;
    }
    return doc.dump(2);
}

} // namespace nstori
