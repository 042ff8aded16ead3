#pragma once

#include <iosfwd>
#include <string>

#include "monostream/joint_boost.hpp"

namespace monostream {

inline constexpr int kModelFormatVersion = 1;

/// Single JSON document bundling the filter bank, feature pairs, boosting
/// rounds, location table, magnitude bounds and training configuration.
void write_model(std::ostream& out, const BoostModel& model);
/// Throws MalformedInputError on unknown versions or missing fields.
BoostModel read_model(std::istream& in);

void save_model(const std::string& path, const BoostModel& model);
BoostModel load_model(const std::string& path);

}  // namespace monostream
