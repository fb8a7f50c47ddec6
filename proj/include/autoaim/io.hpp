#pragma once

#include "autoaim/geometry.hpp"

#include <string>
#include <vector>

namespace autoaim {

/// Line-delimited JSON detection stream; every record carries exactly
/// t, class_id, x1, y1, x2, y2, conf. Throws std::invalid_argument with the
/// offending line number on malformed input.
std::vector<Detection> read_detections_jsonl(const std::string& path);
void write_detections_jsonl(const std::string& path, const std::vector<Detection>& dets);

/// Groups a time-ordered stream into frames of equal timestamp. Throws if
/// timestamps decrease.
std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& dets);

}  // namespace autoaim
