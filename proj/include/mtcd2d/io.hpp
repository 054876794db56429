#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "mtcd2d/channel.hpp"
#include "mtcd2d/clustering.hpp"
#include "mtcd2d/energy.hpp"
#include "mtcd2d/geometry.hpp"
#include "mtcd2d/metrics.hpp"
#include "mtcd2d/tms.hpp"
#include "mtcd2d/trace.hpp"

namespace mtcd2d {

// Environment/deployment document, schema in docs/file_formats.md.
nlohmann::json environment_to_json(const Environment& env, const std::vector<Device>& devices);
Environment environment_from_json(const nlohmann::json& j);
std::vector<Device> devices_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const RunSummary& s);

std::string cdf_csv(const std::vector<CdfPoint>& points);
std::string clusters_csv(const Clustering& c, std::string_view method);
std::string assignments_csv(const AssignmentMap& a);
std::string energy_csv(const std::vector<EnergyReport>& reports);
std::string links_csv(const std::vector<RadioLink>& links);
/// One line per episode: timestamp_s,node,episode,duration_s,msg_kind
std::string trace_lines(const EventTrace& trace);

void write_file(const std::string& path, const std::string& content);

}  // namespace mtcd2d
