#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "excut/elimination_game.hpp"
#include "excut/geometry.hpp"
#include "excut/set_system.hpp"

namespace excut {

/// Comma-separated numeric rows, one point per row. Blank lines are skipped.
/// Throws ParseError on empty input, non-numeric fields or ragged rows.
PointCloud read_points_csv(std::istream& in, bool skip_header = false);
PointCloud read_points_csv(const std::filesystem::path& path, bool skip_header = false);

/// Writes rows with shortest round-trip formatting.
void write_points_csv(std::ostream& out, const PointCloud& points);

/// {"weights": [w...], "sets": [[i...]...]} with 0-based element indices.
/// Throws ParseError on malformed JSON or out-of-range indices, InvalidMeasure on bad weights.
SetSystem set_system_from_json(const nlohmann::json& j);
nlohmann::json set_system_to_json(const SetSystem& system);

/// One JSON object per draw: {"n":.., "t":.., "omega":.., "remaining":[...]}.
/// The trace must carry its remaining-set history.
void write_trace_jsonl(std::ostream& out, const GameTrace& trace);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace excut
