#pragma once

#include <string>

#include "locokernel/observation.hpp"

namespace locokernel {

/// JSON frame record. Arrays are row-major over the 17x11 grid:
///   { "heightmap": { "values": [187], "cell_xy": [[x, y] x 187] },
///     "footmap": [[187] x 4],
///     "proprio": [48] }
std::string frame_to_json(const ObservationFrame& frame);
ObservationFrame frame_from_json(const std::string& text);

void save_frame(const ObservationFrame& frame, const std::string& path);
ObservationFrame load_frame(const std::string& path);

}  // namespace locokernel
