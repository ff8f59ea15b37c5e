#include "eosim/world.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace eosim::mission {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Minimal CSV table: header-indexed columns, blank lines skipped.
struct Table {
  std::map<std::string, std::size_t> columns;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
};

Table parse_table(const std::string& text, const std::vector<std::string>& required, const char* what) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(trim(line));
    if (!have_header) {
      for (std::size_t i = 0; i < cells.size(); ++i) t.columns[cells[i]] = i;
      for (const auto& r : required)
        if (!t.columns.contains(r)) throw ParseError(std::string(what) + ": missing column '" + r + "'");
      have_header = true;
      continue;
    }
    if (cells.size() < t.columns.size())
      throw ParseError(std::string(what) + ": row " + std::to_string(line_no) + " has too few fields");
    t.rows.emplace_back(line_no, std::move(cells));
  }
  if (!have_header) throw ParseError(std::string(what) + ": empty file");
  if (t.rows.empty()) throw ParseError(std::string(what) + ": no data rows");
  return t;
}

double number(const Table& t, const std::vector<std::string>& cells, const std::string& col, std::size_t line_no,
              const char* what) {
  const auto& s = cells.at(t.columns.at(col));
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string(what) + ": row " + std::to_string(line_no) + ": bad number in '" + col + "'");
  }
}

void check_geo(double lat, double lon, std::size_t line_no, const char* what) {
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0))
    throw ParseError(std::string(what) + ": row " + std::to_string(line_no) + ": coordinates out of range");
}

}  // namespace

std::vector<AreaOfInterest> parse_aoi_csv(const std::string& text) {
  constexpr const char* what = "AoI file";
  const Table t = parse_table(text, {"region_id", "lat_deg", "lon_deg", "priority", "cloud_cover"}, what);
  std::vector<AreaOfInterest> out;
  out.reserve(t.rows.size());
  for (const auto& [line_no, cells] : t.rows) {
    AreaOfInterest a;
    a.id = out.size();
    a.region_id = static_cast<int>(number(t, cells, "region_id", line_no, what));
    a.location.latitude_deg = number(t, cells, "lat_deg", line_no, what);
    a.location.longitude_deg = number(t, cells, "lon_deg", line_no, what);
    a.priority = number(t, cells, "priority", line_no, what);
    a.cloud_cover = number(t, cells, "cloud_cover", line_no, what);
    check_geo(a.location.latitude_deg, a.location.longitude_deg, line_no, what);
    if (!(a.priority > 0.0 && a.priority < 1.0))
      throw ParseError(std::string(what) + ": row " + std::to_string(line_no) + ": priority must lie in (0, 1)");
    if (!(a.cloud_cover > 0.0 && a.cloud_cover < 1.0))
      throw ParseError(std::string(what) + ": row " + std::to_string(line_no) +
                       ": cloud_cover must lie in (0, 1)");
    a.location.longitude_deg = orbit::wrap_longitude_deg(a.location.longitude_deg);
    out.push_back(a);
  }
  return out;
}

std::vector<AreaOfInterest> load_aoi_csv(const std::string& path) { return parse_aoi_csv(read_file(path)); }

std::vector<GroundStation> parse_ground_stations(const std::string& text) {
  constexpr const char* what = "ground-station file";
  const Table t = parse_table(text, {"station_id", "lat_deg", "lon_deg", "min_elevation_deg"}, what);
  std::vector<GroundStation> out;
  for (const auto& [line_no, cells] : t.rows) {
    GroundStation g;
    g.id = out.size();
    g.name = cells.at(t.columns.at("station_id"));
    g.location.latitude_deg = number(t, cells, "lat_deg", line_no, what);
    g.location.longitude_deg = number(t, cells, "lon_deg", line_no, what);
    g.min_elevation_deg = number(t, cells, "min_elevation_deg", line_no, what);
    check_geo(g.location.latitude_deg, g.location.longitude_deg, line_no, what);
    if (!(g.min_elevation_deg >= 0.0 && g.min_elevation_deg < 90.0))
      throw ParseError(std::string(what) + ": row " + std::to_string(line_no) +
                       ": min_elevation_deg must lie in [0, 90)");
    g.location.longitude_deg = orbit::wrap_longitude_deg(g.location.longitude_deg);
    out.push_back(g);
  }
  return out;
}

std::vector<GroundStation> load_ground_stations(const std::string& path) {
  return parse_ground_stations(read_file(path));
}

std::string default_data_dir() {
  if (const char* env = std::getenv("EOSIM_DATA_DIR"); env && *env) return env;
#ifdef EOSIM_DEFAULT_DATA_DIR
  return EOSIM_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

}  // namespace eosim::mission
