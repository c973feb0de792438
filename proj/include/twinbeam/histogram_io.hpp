#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "twinbeam/calibrator.hpp"
#include "twinbeam/histogram.hpp"
#include "twinbeam/simulator.hpp"

namespace twinbeam {

// Sparse CSV: header `cs,ci,count` (histograms) or `ds,di,count` (dark
// records), one row per nonzero cell, LF or CRLF line endings.

/// Throws FileNotFound, ParseError, DuplicateEntry or EmptyHistogram.
PhotocountHistogram load_histogram(const std::filesystem::path& path);
DarkCountRecord load_dark_record(const std::filesystem::path& path);

/// Parsers on in-memory text; `source` names the input in error messages.
PhotocountHistogram parse_histogram(const std::string& text, const std::string& source = "<text>");
DarkCountRecord parse_dark_record(const std::string& text, const std::string& source = "<text>");

/// Single-arm dark counts, header `d,count`; combine two with product_record().
std::map<std::uint32_t, std::uint64_t> load_arm_counts(const std::filesystem::path& path);

/// Throws IoError.
void write_histogram(const PhotocountHistogram& hist, const std::filesystem::path& path);
void write_dark_record(const DarkCountRecord& dark, const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes. Throws FileNotFound.
std::string file_sha256(const std::filesystem::path& path);

/// Everything persisted in a calibration report.
struct Report {
  CalibrationResult result;
  std::string histogram_sha256;
  std::string dark_sha256;
  nlohmann::json config = nlohmann::json::object();
  /// Optional divisor for the idler arm (e.g. a mirror's reflectivity).
  std::optional<double> idler_path_transmission;
};

nlohmann::json model_to_json(const TwinBeamModel& model);
TwinBeamModel model_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const Report& report);
Report report_from_json(const nlohmann::json& j);

/// Throws IoError.
void write_report(const Report& report, const std::filesystem::path& path);
Report load_report(const std::filesystem::path& path);

/// Ground-truth sidecar of a simulation: the field in the report's `field`
/// schema plus detectors, shots and seed.
nlohmann::json truth_to_json(const SimulationConfig& config);
/// Reads `field` and `detectors`; `shots` and `seed` are optional.
SimulationConfig truth_from_json(const nlohmann::json& j);

/// Dense `ns,ni,p` export of a joint distribution (header configurable for
/// photocount tables, e.g. `cs,ci,p`).
void write_joint_distribution_csv(const JointDistribution& p, const std::filesystem::path& path,
                                  const std::string& header = "ns,ni,p");
/// `c,n,T` export of a response matrix.
void write_response_csv(const ResponseMatrix& t, const std::filesystem::path& path);
/// `eta_s,eta_i,D` export of a scan; infeasible cells leave D empty.
void write_surface_csv(const Surface& surface, const std::filesystem::path& path);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace twinbeam
