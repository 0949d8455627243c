#include "locokernel/frame_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace locokernel {

namespace {

using nlohmann::json;

json grid_to_json(const HeightmapMatrix& m) {
  json arr = json::array();
  for (int r = 0; r < kHeightmapRows; ++r)
    for (int c = 0; c < kHeightmapCols; ++c) arr.push_back(m(r, c));
  return arr;
}

HeightmapMatrix grid_from_json(const json& arr, const char* what) {
  if (!arr.is_array() || arr.size() != kHeightmapCells)
    throw std::runtime_error(std::string("frame field ") + what + " must have 187 values");
  HeightmapMatrix m;
  for (int r = 0; r < kHeightmapRows; ++r)
    for (int c = 0; c < kHeightmapCols; ++c)
      m(r, c) = arr.at(token_index(r, c)).get<double>();
  return m;
}

}  // namespace

std::string frame_to_json(const ObservationFrame& frame) {
  json j;
  j["heightmap"]["values"] = grid_to_json(frame.heightmap.values);
  json cells = json::array();
  for (int r = 0; r < kHeightmapRows; ++r)
    for (int c = 0; c < kHeightmapCols; ++c)
      cells.push_back({frame.heightmap.cell_x(r, c), frame.heightmap.cell_y(r, c)});
  j["heightmap"]["cell_xy"] = cells;
  json footmap = json::array();
  for (int k = 0; k < kFootCount; ++k) footmap.push_back(grid_to_json(frame.footmap.channels[k]));
  j["footmap"] = footmap;
  j["proprio"] = std::vector<double>(frame.proprio.data(), frame.proprio.data() + kProprioDim);
  return j.dump(2);
}

ObservationFrame frame_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("bad frame json: ") + e.what());
  }
  ObservationFrame frame;
  frame.heightmap.values = grid_from_json(j.at("heightmap").at("values"), "heightmap.values");
  const json& cells = j.at("heightmap").at("cell_xy");
  if (!cells.is_array() || cells.size() != kHeightmapCells)
    throw std::runtime_error("frame field heightmap.cell_xy must have 187 pairs");
  for (int r = 0; r < kHeightmapRows; ++r) {
    for (int c = 0; c < kHeightmapCols; ++c) {
      const json& pair = cells.at(token_index(r, c));
      frame.heightmap.cell_x(r, c) = pair.at(0).get<double>();
      frame.heightmap.cell_y(r, c) = pair.at(1).get<double>();
    }
  }
  const json& footmap = j.at("footmap");
  if (!footmap.is_array() || footmap.size() != kFootCount)
    throw std::runtime_error("frame field footmap must have 4 channels");
  for (int k = 0; k < kFootCount; ++k)
    frame.footmap.channels[k] = grid_from_json(footmap.at(k), "footmap channel");
  const json& proprio = j.at("proprio");
  if (!proprio.is_array() || proprio.size() != kProprioDim)
    throw std::runtime_error("frame field proprio must have 48 values");
  for (int i = 0; i < kProprioDim; ++i) frame.proprio(i) = proprio.at(i).get<double>();
  return frame;
}

void save_frame(const ObservationFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open frame file for writing: " + path);
  out << frame_to_json(frame) << '\n';
  if (!out) throw std::runtime_error("error writing frame file: " + path);
}

ObservationFrame load_frame(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open frame file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return frame_from_json(text);
}

}  // namespace locokernel
