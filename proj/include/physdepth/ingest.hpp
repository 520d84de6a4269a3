#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "physdepth/camera.hpp"
#include "physdepth/errors.hpp"
#include "physdepth/losses.hpp"
#include "physdepth/scene.hpp"

namespace physdepth {

namespace detail {

inline bool parse_double_token(const std::string& token, double* out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size() || token.empty()) return false;
  *out = v;
  return true;
}

// Expected value counts for the standard calibration keys; 0 means no
// expectation (free-form key).
inline std::size_t kitti_expected_count(const std::string& key) {
  if (key.rfind("P", 0) == 0) return 12;
  if (key == "Tr" || key.rfind("Tr_", 0) == 0) return 12;
  if (key == "R" || key.rfind("R_", 0) == 0) return 9;
  if (key == "T" || key.rfind("T_", 0) == 0) return 3;
  if (key.rfind("S_", 0) == 0) return 2;
  if (key.rfind("K_", 0) == 0) return 9;
  if (key.rfind("D_", 0) == 0) return 5;
  if (key == "corner_dist") return 1;
  return 0;
}

}  // namespace detail

/// Key/value store over a KITTI-style calibration text file. Numeric entries
/// keep full double precision; non-numeric entries (timestamps) are kept as
/// raw strings.
class KittiCalibration {
 public:
  bool has(const std::string& key) const { return numeric_.count(key) != 0; }

  const std::vector<double>& values(const std::string& key) const {
    const auto it = numeric_.find(key);
    if (it == numeric_.end())
      throw ParseError("kitti calibration: missing key '" + key + "'");
    return it->second;
  }

  /// 3x4 rectified projection matrix P_rect_0N.
  Eigen::Matrix<double, 3, 4> projection(int cam) const {
    const auto& v = values(key_for(cam, "P_rect_0"));
    Eigen::Matrix<double, 3, 4> p;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) p(r, c) = v[static_cast<std::size_t>(r) * 4 + c];
    return p;
  }

  /// 3x3 rectifying rotation R_rect_0N.
  Eigen::Matrix3d rectification(int cam) const {
    const auto& v = values(key_for(cam, "R_rect_0"));
    Eigen::Matrix3d r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = v[static_cast<std::size_t>(i) * 3 + j];
    return r;
  }

  /// Intrinsics of the rectified camera; image dimensions from S_rect_0N.
  Intrinsics intrinsics(int cam) const {
    const auto& size = values(key_for(cam, "S_rect_0"));
    return intrinsics(cam, static_cast<int>(std::lround(size[0])),
                      static_cast<int>(std::lround(size[1])));
  }

  Intrinsics intrinsics(int cam, int width, int height) const {
    const Eigen::Matrix<double, 3, 4> p = projection(cam);
    Intrinsics intr{p(0, 0), p(1, 1), p(0, 2), p(1, 2), width, height};
    intr.validate();
    return intr;
  }

  /// Translation hidden in the fourth projection column, expressed as a
  /// camera-frame offset: K^-1 * P[:,3]. Fold this into the sensor-to-camera
  /// transform rather than the intrinsics.
  Eigen::Vector3d rect_cam_offset(int cam) const {
    const Eigen::Matrix<double, 3, 4> p = projection(cam);
    const double fx = p(0, 0), fy = p(1, 1), ox = p(0, 2), oy = p(1, 2);
    const double b3 = p(2, 3);
    return {(p(0, 3) - ox * b3) / fx, (p(1, 3) - oy * b3) / fy, b3};
  }

  const std::map<std::string, std::vector<double>>& numeric_entries() const { return numeric_; }
  const std::map<std::string, std::string>& text_entries() const { return text_; }

  friend KittiCalibration parse_kitti_calib(const std::string& text);

 private:
  static std::string key_for(int cam, const char* prefix) {
    if (cam < 0 || cam > 9) throw InvalidInput("kitti calibration: camera index out of range");
    return std::string(prefix) + std::to_string(cam);
  }

  std::map<std::string, std::vector<double>> numeric_;
  std::map<std::string, std::string> text_;
};

/// Parse "key: v0 v1 ..." lines. Known matrix keys must carry the exact
/// element count; violations raise ParseError with the line number and key.
inline KittiCalibration parse_kitti_calib(const std::string& text) {
  KittiCalibration calib;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError("kitti calibration: line " + std::to_string(line_number) +
                       ": expected 'key: values'");
    const std::string key = line.substr(0, colon);
    if (key.empty() || key.find(' ') != std::string::npos)
      throw ParseError("kitti calibration: line " + std::to_string(line_number) +
                       ": malformed key");

    std::istringstream rest(line.substr(colon + 1));
    std::vector<std::string> tokens;
    std::string token;
    while (rest >> token) tokens.push_back(token);

    std::vector<double> numbers;
    numbers.reserve(tokens.size());
    bool all_numeric = !tokens.empty();
    for (const std::string& t : tokens) {
      double v = 0.0;
      if (!detail::parse_double_token(t, &v)) {
        all_numeric = false;
        break;
      }
      numbers.push_back(v);
    }

    const std::size_t expected = detail::kitti_expected_count(key);
    if (expected > 0) {
      if (!all_numeric)
        throw ParseError("kitti calibration: line " + std::to_string(line_number) + ": key '" +
                         key + "' has a non-numeric value");
      if (numbers.size() != expected)
        throw ParseError("kitti calibration: line " + std::to_string(line_number) + ": key '" +
                         key + "' expects " + std::to_string(expected) + " values, got " +
                         std::to_string(numbers.size()));
    }
    if (all_numeric)
      calib.numeric_[key] = std::move(numbers);
    else
      calib.text_[key] = line.substr(colon + 1);
  }
  return calib;
}

inline KittiCalibration parse_kitti_calib_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("kitti calibration: cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return parse_kitti_calib(os.str());
}

/// Cityscapes per-image camera file.
struct CityscapesCamera {
  double fx = 0.0;
  double fy = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double baseline = 0.0;
  double camera_height = 0.0;  ///< extrinsic z
  double pitch = 0.0;
  double roll = 0.0;
  double yaw = 0.0;
};

namespace detail {

inline double json_number(const nlohmann::json& obj, const std::string& section,
                          const char* field) {
  if (!obj.contains(field) || !obj[field].is_number())
    throw ParseError("cityscapes camera: missing field '" + section + "." + field + "'");
  return obj[field].get<double>();
}

}  // namespace detail

inline CityscapesCamera parse_cityscapes_camera(const nlohmann::json& doc) {
  if (!doc.contains("intrinsic") || !doc["intrinsic"].is_object())
    throw ParseError("cityscapes camera: missing field 'intrinsic'");
  if (!doc.contains("extrinsic") || !doc["extrinsic"].is_object())
    throw ParseError("cityscapes camera: missing field 'extrinsic'");
  const auto& intrinsic = doc["intrinsic"];
  const auto& extrinsic = doc["extrinsic"];

  CityscapesCamera cam;
  cam.fx = detail::json_number(intrinsic, "intrinsic", "fx");
  cam.fy = detail::json_number(intrinsic, "intrinsic", "fy");
  cam.u0 = detail::json_number(intrinsic, "intrinsic", "u0");
  cam.v0 = detail::json_number(intrinsic, "intrinsic", "v0");
  cam.camera_height = detail::json_number(extrinsic, "extrinsic", "z");
  cam.pitch = detail::json_number(extrinsic, "extrinsic", "pitch");
  cam.roll = detail::json_number(extrinsic, "extrinsic", "roll");
  cam.yaw = detail::json_number(extrinsic, "extrinsic", "yaw");
  cam.baseline = extrinsic.contains("baseline") && extrinsic["baseline"].is_number()
                     ? extrinsic["baseline"].get<double>()
                     : 0.0;
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0))
    throw InvalidInput("cityscapes camera: focal lengths must be positive");
  if (!(cam.camera_height > 0.0))
    throw InvalidInput("cityscapes camera: camera height must be positive");
  return cam;
}

inline CameraModel to_camera_model(const CityscapesCamera& cam, int width, int height) {
  CameraModel model{{cam.fx, cam.fy, cam.u0, cam.v0, width, height},
                    {cam.camera_height, cam.roll, cam.pitch, cam.yaw}};
  model.validate();
  return model;
}

/// One LiDAR return in the sensor frame.
struct LidarPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float reflectance = 0.0f;
};

struct LidarScan {
  std::vector<LidarPoint> points;
};

/// KITTI velodyne binary layout: consecutive little-endian f32 quadruples.
inline LidarScan read_velodyne_bin(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 16 != 0)
    throw ParseError("velodyne: byte length " + std::to_string(bytes.size()) +
                     " is not a multiple of 16");
  LidarScan scan;
  scan.points.reserve(bytes.size() / 16);
  for (std::size_t i = 0; i < bytes.size(); i += 16) {
    float v[4];
    for (int k = 0; k < 4; ++k) {
      const std::size_t o = i + static_cast<std::size_t>(k) * 4;
      const std::uint32_t u = static_cast<std::uint32_t>(bytes[o]) |
                              (static_cast<std::uint32_t>(bytes[o + 1]) << 8) |
                              (static_cast<std::uint32_t>(bytes[o + 2]) << 16) |
                              (static_cast<std::uint32_t>(bytes[o + 3]) << 24);
      v[k] = std::bit_cast<float>(u);
      if (!std::isfinite(v[k]))
        throw ParseError("velodyne: non-finite value at byte offset " + std::to_string(o));
    }
    scan.points.push_back({v[0], v[1], v[2], v[3]});
  }
  return scan;
}

inline LidarScan read_velodyne_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("velodyne: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return read_velodyne_bin(bytes);
}

/// Project a scan into a sparse depth map. Points behind the camera are
/// dropped; when several points land on one pixel the nearest wins.
inline DepthMap lidar_to_depth(const LidarScan& scan, const RigidTransform& sensor_to_cam,
                               const Intrinsics& intr) {
  intr.validate();
  sensor_to_cam.validate();
  DepthMap out(intr.width, intr.height);
  for (const LidarPoint& pt : scan.points) {
    const Eigen::Vector3d p = sensor_to_cam.apply({pt.x, pt.y, pt.z});
    if (!(p.z() > 0.0)) continue;
    const PixelCoord px = project(intr, p);
    const int xi = static_cast<int>(std::floor(px.u));
    const int yi = static_cast<int>(std::floor(px.v));
    if (xi < 0 || xi >= out.width() || yi < 0 || yi >= out.height()) continue;
    if (!out.valid(xi, yi) || p.z() < out.value(xi, yi))
      out.set(xi, yi, p.z(), Provenance::external);
  }
  return out;
}

/// Combined velodyne-to-rectified-camera transform for a KITTI setup. The
/// parsed rotations carry text precision only, so the product is snapped to
/// the nearest rotation before constructing the transform.
inline RigidTransform kitti_velo_to_rect_cam(const KittiCalibration& velo_to_cam,
                                             const KittiCalibration& cam_to_cam, int cam) {
  const auto& rv = velo_to_cam.values("R");
  const auto& tv = velo_to_cam.values("T");
  Eigen::Matrix3d r_velo;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r_velo(i, j) = rv[static_cast<std::size_t>(i) * 3 + j];
  const Eigen::Vector3d t_velo(tv[0], tv[1], tv[2]);

  const Eigen::Matrix3d r_rect = cam_to_cam.rectification(0);
  Eigen::Matrix3d r = r_rect * r_velo;
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  r = u * svd.matrixV().transpose();

  const Eigen::Vector3d t = r_rect * t_velo + cam_to_cam.rect_cam_offset(cam);
  RigidTransform transform{r, t};
  transform.validate();
  return transform;
}

/// Label schema document: {"classes": [{"id": int, "name": str, "category": str}]}.
inline LabelSchema parse_label_schema(const nlohmann::json& doc) {
  if (!doc.contains("classes") || !doc["classes"].is_array())
    throw ParseError("label schema: missing field 'classes'");
  std::vector<LabelSchema::Entry> entries;
  std::size_t index = 0;
  for (const auto& item : doc["classes"]) {
    const std::string path = "classes[" + std::to_string(index++) + "]";
    if (!item.is_object()) throw ParseError("label schema: " + path + " is not an object");
    if (!item.contains("id") || !item["id"].is_number_integer())
      throw ParseError("label schema: missing field '" + path + ".id'");
    if (!item.contains("category") || !item["category"].is_string())
      throw ParseError("label schema: missing field '" + path + ".category'");
    LabelSchema::Entry entry;
    entry.id = item["id"].get<int>();
    entry.name = item.contains("name") && item["name"].is_string()
                     ? item["name"].get<std::string>()
                     : std::string{};
    entry.category = category_from_string(item["category"].get<std::string>());
    entries.push_back(std::move(entry));
  }
  return LabelSchema(std::move(entries));
}

inline nlohmann::json label_schema_to_json(const LabelSchema& schema) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& entry : schema.entries())
    classes.push_back(
        {{"id", entry.id}, {"name", entry.name}, {"category", to_string(entry.category)}});
  return {{"classes", classes}};
}

/// Native camera document:
/// {"intrinsics": {fx, fy, ox, oy, width, height},
///  "extrinsics": {camera_height, roll, pitch, yaw}}.
inline CameraModel camera_model_from_json(const nlohmann::json& doc) {
  if (!doc.contains("intrinsics") || !doc["intrinsics"].is_object())
    throw ParseError("camera model: missing field 'intrinsics'");
  if (!doc.contains("extrinsics") || !doc["extrinsics"].is_object())
    throw ParseError("camera model: missing field 'extrinsics'");
  const auto& ij = doc["intrinsics"];
  const auto& ej = doc["extrinsics"];
  const auto number = [](const nlohmann::json& obj, const char* section, const char* field) {
    if (!obj.contains(field) || !obj[field].is_number())
      throw ParseError("camera model: missing field '" + std::string(section) + "." + field +
                       "'");
    return obj[field].get<double>();
  };
  CameraModel model;
  model.intrinsics.fx = number(ij, "intrinsics", "fx");
  model.intrinsics.fy = number(ij, "intrinsics", "fy");
  model.intrinsics.ox = number(ij, "intrinsics", "ox");
  model.intrinsics.oy = number(ij, "intrinsics", "oy");
  model.intrinsics.width = static_cast<int>(number(ij, "intrinsics", "width"));
  model.intrinsics.height = static_cast<int>(number(ij, "intrinsics", "height"));
  model.extrinsics.camera_height = number(ej, "extrinsics", "camera_height");
  model.extrinsics.roll = number(ej, "extrinsics", "roll");
  model.extrinsics.pitch = number(ej, "extrinsics", "pitch");
  model.extrinsics.yaw = number(ej, "extrinsics", "yaw");
  model.validate();
  return model;
}

inline nlohmann::json camera_model_to_json(const CameraModel& model) {
  return {{"intrinsics",
           {{"fx", model.intrinsics.fx},
            {"fy", model.intrinsics.fy},
            {"ox", model.intrinsics.ox},
            {"oy", model.intrinsics.oy},
            {"width", model.intrinsics.width},
            {"height", model.intrinsics.height}}},
          {"extrinsics",
           {{"camera_height", model.extrinsics.camera_height},
            {"roll", model.extrinsics.roll},
            {"pitch", model.extrinsics.pitch},
            {"yaw", model.extrinsics.yaw}}}};
}

}  // namespace physdepth
