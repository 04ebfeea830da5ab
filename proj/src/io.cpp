#include "excut/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "excut/errors.hpp"

namespace excut {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError("line " + std::to_string(line) + ": '" + std::string(field) +
                     "' is not a number");
  return value;
}

}  // namespace

PointCloud read_points_csv(std::istream& in, bool skip_header) {
  std::vector<double> values;
  std::size_t dim = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = skip_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::size_t fields = 0;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      values.push_back(parse_field(rest.substr(0, comma), line_no));
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) dim = fields;
    else if (fields != dim)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " columns, got " + std::to_string(fields));
    ++rows;
  }
  if (rows == 0) throw ParseError("CSV input has no data rows");
  try {
    return PointCloud(rows, dim, std::move(values));
  } catch (const NonFiniteInput& e) {
    throw ParseError(e.what());
  }
}

PointCloud read_points_csv(const std::filesystem::path& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return read_points_csv(in, skip_header);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

void write_points_csv(std::ostream& out, const PointCloud& points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = points[i];
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
    out << '\n';
  }
}

SetSystem set_system_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("weights") || !j.contains("sets"))
    throw ParseError("set system JSON needs \"weights\" and \"sets\"");
  const auto& w = j["weights"];
  const auto& s = j["sets"];
  if (!w.is_array() || !s.is_array()) throw ParseError("\"weights\" and \"sets\" must be arrays");
  if (w.empty()) throw ParseError("\"weights\" is empty");
  if (s.empty()) throw ParseError("\"sets\" is empty");
  std::vector<double> weights;
  for (const auto& v : w) {
    if (!v.is_number()) throw ParseError("weights must be numbers");
    weights.push_back(v.get<double>());
  }
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& set : s) {
    if (!set.is_array()) throw ParseError("each set must be an array of indices");
    auto& out = sets.emplace_back();
    for (const auto& idx : set) {
      if (!idx.is_number_unsigned()) throw ParseError("set members must be non-negative integers");
      const auto e = idx.get<std::size_t>();
      if (e >= weights.size())
        throw ParseError("element index " + std::to_string(e) + " out of range");
      out.push_back(e);
    }
  }
  return SetSystem(MeasureSpace(std::move(weights)), std::move(sets));
}

nlohmann::json set_system_to_json(const SetSystem& system) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(system.space().weights().begin(),
                                     system.space().weights().end());
  j["sets"] = system.sets();
  return j;
}

void write_trace_jsonl(std::ostream& out, const GameTrace& trace) {
  if (trace.remaining.size() != trace.draws.size() + 1)
    throw std::invalid_argument("trace has no remaining-set history");
  for (std::size_t n = 0; n < trace.draws.size(); ++n) {
    const Draw& d = trace.draws[n];
    nlohmann::json line = {{"n", d.round}, {"t", d.time}, {"omega", d.element},
                           {"remaining", trace.remaining[n + 1]}};
    out << line.dump() << '\n';
  }
}

}  // namespace excut
