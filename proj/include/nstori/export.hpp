#pragma once

#include "nstori/certify.hpp"
#include "nstori/flow.hpp"
#include "nstori/torus.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace nstori {

/// Columns t,phi,x,y,branch,is_event. Rows at t = k * step plus one row per
/// crossing, in time order. Numbers carry 17 significant digits.
void write_orbit_csv(std::ostream& out, const Trajectory& trajectory, double step);

/// Samples at t = k * step, crossing events and segment branches as a JSON document.
std::string orbit_to_json(const Trajectory& trajectory, double step);

/// Long format: sign,i,j,phi,x,y.
void write_mesh_csv(std::ostream& out, const TorusMesh& mesh);

/// One triangle per line: "<sign> phi1 x1 y1 phi2 x2 y2 phi3 x3 y3".
void write_mesh_facets(std::ostream& out, const TorusMesh& mesh);

std::string mesh_to_json(const TorusMesh& mesh);

/// JSON document with the report fields plus forcing name, timestamp and grid statistics.
std::string report_to_json(const CertificationReport& report);
std::string invariance_to_json(const InvarianceReport& report, const std::string& forcing_name);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

/// UTC timestamp, ISO 8601. SOURCE_DATE_EPOCH, when set, replaces the clock.
std::string utc_timestamp();

} // namespace nstori
