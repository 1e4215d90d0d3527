#include "hmai/common.hpp"

#include <algorithm>
#include <cctype>

namespace hmai {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& values,
                std::string_view what) {
  for (Enum v : values) {
    if (iequals(s, to_string(v))) return v;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) +
                    "'");
}

}  // namespace

std::string_view to_string(Area a) {
  switch (a) {
    case Area::UB: return "UB";
    case Area::UHW: return "UHW";
    case Area::HW: return "HW";
  }
  return "?";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::GoStraight: return "GoStraight";
    case Scenario::Turn: return "Turn";
    case Scenario::Reverse: return "Reverse";
  }
  return "?";
}

std::string_view to_string(CameraKind c) {
  switch (c) {
    case CameraKind::FC: return "FC";
    case CameraKind::FLSC: return "FLSC";
    case CameraKind::RLSC: return "RLSC";
    case CameraKind::FRSC: return "FRSC";
    case CameraKind::RRSC: return "RRSC";
    case CameraKind::RC: return "RC";
  }
  return "?";
}

std::string_view to_string(Facing f) {
  switch (f) {
    case Facing::Forward: return "forward";
    case Facing::Side: return "side";
    case Facing::Rear: return "rear";
  }
  return "?";
}

std::string_view to_string(TaskKind k) {
  return k == TaskKind::DET ? "DET" : "TRA";
}

std::string_view to_string(Model m) {
  switch (m) {
    case Model::YOLO: return "YOLO";
    case Model::SSD: return "SSD";
    case Model::GOTURN: return "GOTURN";
  }
  return "?";
}

Area parse_area(std::string_view s) { return parse_enum(s, kAreas, "area"); }

Scenario parse_scenario(std::string_view s) {
  if (iequals(s, "gs")) return Scenario::GoStraight;
  return parse_enum(s, kScenarios, "scenario");
}

CameraKind parse_camera_kind(std::string_view s) {
  return parse_enum(s, kCameraKinds, "camera group");
}

TaskKind parse_task_kind(std::string_view s) {
  return parse_enum(s, std::array{TaskKind::DET, TaskKind::TRA}, "task kind");
}

Model parse_model(std::string_view s) {
  return parse_enum(s, kModels, "model");
}

Facing facing_of(CameraKind c) {
  switch (c) {
    case CameraKind::FC: return Facing::Forward;
    case CameraKind::RC: return Facing::Rear;
    default: return Facing::Side;
  }
}

double model_amount_gmac(Model m) {
  switch (m) {
    case Model::YOLO: return 16.0;
    case Model::SSD: return 26.0;
    case Model::GOTURN: return 11.0;
  }
  return 0.0;
}

int model_layer_num(Model m) {
  switch (m) {
    case Model::YOLO: return 101;
    case Model::SSD: return 53;
    case Model::GOTURN: return 11;
  }
  return 0;
}

}  // namespace hmai
