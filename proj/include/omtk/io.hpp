#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "omtk/mpp.hpp"
#include "omtk/om.hpp"
#include "omtk/path.hpp"
#include "omtk/tube.hpp"

namespace omtk::io {

/// Shortest decimal text that round-trips, so reruns print identical bytes.
std::string number(double v);

/// Path CSV: header t,phi1_1..phi1_d,phi2_1..phi2_m, optionally followed by
/// dphi1_1..dphi2_m. Times must form a uniform grid from 0. Without
/// derivative columns the path is finite-differenced.
ReferencePath read_path_csv(const std::filesystem::path& file, int d, int m);
void write_path_csv(const std::filesystem::path& file, const ReferencePath& path,
                    bool derivatives = true);

void write_text(const std::filesystem::path& file, const std::string& text);
void write_json(const std::filesystem::path& file, const nlohmann::json& value);

nlohmann::json to_json(const ActionValue& a);
nlohmann::json to_json(const TubeEstimate& e);
nlohmann::json to_json(const RatioReport& r);

/// eps,p_hat,ci_lo,ci_hi,hits,trials,low_information
std::string tube_csv(const std::vector<TubeEstimate>& rows);

}  // namespace omtk::io
