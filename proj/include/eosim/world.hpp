#pragma once

// Ground targets and ground stations, and the CSV files that define them.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eosim/orbit.hpp"

namespace eosim::mission {

struct AreaOfInterest {
  std::size_t id = 0;
  orbit::GeoPoint location;
  double priority = 0.5;     // q_i in (0, 1)
  double cloud_cover = 0.5;  // sigma in (0, 1)
  int region_id = 0;
  std::optional<std::size_t> captured_by;
};

struct GroundStation {
  std::size_t id = 0;
  std::string name;
  orbit::GeoPoint location;
  double min_elevation_deg = 10.0;
};

// Thrown for malformed data files; the message names the offending row.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Header: region_id,lat_deg,lon_deg,priority,cloud_cover
std::vector<AreaOfInterest> load_aoi_csv(const std::string& path);
std::vector<AreaOfInterest> parse_aoi_csv(const std::string& text);

// Header: station_id,lat_deg,lon_deg,min_elevation_deg
std::vector<GroundStation> load_ground_stations(const std::string& path);
std::vector<GroundStation> parse_ground_stations(const std::string& text);

// Directory holding the bundled aoi_regions.csv, ground_stations.csv and
// scenarios/. Honours EOSIM_DATA_DIR, falling back to the compiled-in path.
std::string default_data_dir();

}  // namespace eosim::mission
