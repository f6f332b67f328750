#pragma once

#include <string>

#include "qprime/quadrature.hpp"

namespace qprime {

// Machine-readable reports: JSON for the structured results, CSV for
// per-point samples. Emission is atomic (string built fully, then written);
// no partial files on failure.

std::string invariant_report_json(const InvariantReport& rep,
                                  const RunConfig& cfg);
std::string invariant_report_csv(const InvariantReport& rep);
std::string variation_report_json(const VariationReport& rep,
                                  const RunConfig& cfg);
std::string hessian_report_json(const HessianProbeReport& rep,
                                const RunConfig& cfg);
std::string renorm_report_json(const RenormFit& fit, const RunConfig& cfg);

void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace qprime
