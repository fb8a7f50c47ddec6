#include "autoaim/io.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace autoaim {

using nlohmann::json;

std::vector<Detection> read_detections_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open detection stream: " + path);
  std::vector<Detection> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument("detection stream line " + std::to_string(line_no) + ": " +
                                  e.what());
    }
    static const char* kFields[] = {"t", "class_id", "x1", "y1", "x2", "y2", "conf"};
    for (const char* f : kFields)
      if (!j.contains(f))
        throw std::invalid_argument("detection stream line " + std::to_string(line_no) +
                                    ": missing field '" + f + "'");
    if (j.size() != 7)
      throw std::invalid_argument("detection stream line " + std::to_string(line_no) +
                                  ": unexpected extra fields");
    Detection d;
    d.t = j.at("t").get<double>();
    d.class_id = j.at("class_id").get<int>();
    d.bbox = {j.at("x1").get<double>(), j.at("y1").get<double>(), j.at("x2").get<double>(),
              j.at("y2").get<double>()};
    d.confidence = j.at("conf").get<double>();
    if (!d.valid())
      throw std::invalid_argument("detection stream line " + std::to_string(line_no) +
                                  ": invalid detection (box, class or confidence)");
    out.push_back(d);
  }
  return out;
}

void write_detections_jsonl(const std::string& path, const std::vector<Detection>& dets) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write detection stream: " + path);
  for (const auto& d : dets) {
    json j;
    j["t"] = d.t;
    j["class_id"] = d.class_id;
    j["x1"] = d.bbox.x1;
    j["y1"] = d.bbox.y1;
    j["x2"] = d.bbox.x2;
    j["y2"] = d.bbox.y2;
    j["conf"] = d.confidence;
    out << j.dump() << "\n";
  }
}

std::vector<std::vector<Detection>> group_by_frame(const std::vector<Detection>& dets) {
  std::vector<std::vector<Detection>> frames;
  for (const auto& d : dets) {
    if (!frames.empty() && d.t < frames.back().back().t)
      throw std::invalid_argument("detection stream timestamps must be non-decreasing");
    if (frames.empty() || d.t != frames.back().back().t) frames.emplace_back();
    frames.back().push_back(d);
  }
  return frames;
}

}  // namespace autoaim
