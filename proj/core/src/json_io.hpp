// radius-lab: internal JSON plumbing (nlohmann kept out of public headers)
#pragma once

#include <json.hpp>

#include "radiuslab/io.hpp"

namespace radiuslab::detail {

using ordered_json = nlohmann::ordered_json;

/// Deterministic writer: 12 significant digits for doubles, 2-space indent.
std::string write_json(const ordered_json& j);

ordered_json horizon_json(const HorizonLength& h);
ordered_json report_json(const RadiusReport& rep);
ordered_json certification_json(const CertificationReport& rep);
ordered_json ratio_json(const RatioBound& rb);
ordered_json scan_json(const DirectionScan& scan);
ordered_json convexity_json(const ConvexityCheck& check, const ChartPoint& center,
                            double radius);
ordered_json manifold_to_json(const ManifoldDescriptor& m);
ordered_json gulliver_config_json(const GulliverConfig& cfg);
ManifoldDescriptor manifold_from_json(const ordered_json& j);
GulliverConfig gulliver_from_json(const ordered_json& j);

}  // namespace radiuslab::detail
