// Command-line front end: physics depth priors, loss reports, depth
// evaluation, scale alignment, and synthetic scene bundles.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "physdepth/physdepth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw physdepth::IoError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw physdepth::ParseError("'" + path + "': " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw physdepth::IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw physdepth::IoError("write failed: '" + path.string() + "'");
}

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path))
    throw physdepth::IoError(std::string(what) + " not found: '" + path + "'");
}

struct CameraFlags {
  int kitti_cam = 2;
  double camera_height = 1.65;  // KITTI sensor mount height
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  int width = 0;   // 0 = derive from the file when possible
  int height = 0;
};

// Accepts a native camera JSON, a Cityscapes camera JSON, or a KITTI
// calibration text file.
physdepth::CameraModel load_camera(const std::string& path, const CameraFlags& flags) {
  require_exists(path, "camera file");
  if (fs::path(path).extension() == ".json") {
    const json doc = read_json_file(path);
    if (doc.contains("intrinsic") && doc.contains("extrinsic")) {
      const auto cs = physdepth::parse_cityscapes_camera(doc);
      const int width = flags.width > 0 ? flags.width : 2048;
      const int height = flags.height > 0 ? flags.height : 1024;
      return physdepth::to_camera_model(cs, width, height);
    }
    return physdepth::camera_model_from_json(doc);
  }
  const auto calib = physdepth::parse_kitti_calib_file(path);
  const physdepth::Intrinsics intr =
      flags.width > 0 && flags.height > 0
          ? calib.intrinsics(flags.kitti_cam, flags.width, flags.height)
          : calib.intrinsics(flags.kitti_cam);
  physdepth::CameraModel cam{intr, {flags.camera_height, flags.roll, flags.pitch, flags.yaw}};
  cam.validate();
  return cam;
}

physdepth::LabelSchema load_schema(const std::string& path) {
  if (path.empty()) return physdepth::LabelSchema::cityscapes_trainids();
  require_exists(path, "schema file");
  return physdepth::parse_label_schema(read_json_file(path));
}

physdepth::RigidTransform load_pose(const std::string& path) {
  if (path.empty() || path == "identity") return physdepth::RigidTransform::identity();
  require_exists(path, "pose file");
  const json doc = read_json_file(path);
  if (!doc.contains("rotation") || !doc.contains("translation"))
    throw physdepth::ParseError("pose: need 'rotation' (3x3) and 'translation' (3)");
  physdepth::RigidTransform pose;
  const auto& r = doc["rotation"];
  const auto& t = doc["translation"];
  if (!r.is_array() || r.size() != 3 || !t.is_array() || t.size() != 3)
    throw physdepth::ParseError("pose: 'rotation' must be 3x3 and 'translation' length 3");
  for (int i = 0; i < 3; ++i) {
    if (!r[i].is_array() || r[i].size() != 3)
      throw physdepth::ParseError("pose: 'rotation' must be 3x3");
    for (int j = 0; j < 3; ++j) pose.rotation(i, j) = r[i][j].get<double>();
    pose.translation(i) = t[i].get<double>();
  }
  pose.validate();
  return pose;
}

std::pair<double, double> parse_pair(const std::string& text, const char* flag) {
  const std::size_t comma = text.find(',');
  if (comma == std::string::npos)
    throw physdepth::ParseError(std::string(flag) + ": expected 'a,b', got '" + text + "'");
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    throw physdepth::ParseError(std::string(flag) + ": expected numbers, got '" + text + "'");
  }
}

void append_csv(const std::string& path, const std::string& header, const std::string& row) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw physdepth::IoError("cannot open '" + path + "' for appending");
  if (fresh) os << header << '\n';
  os << row << '\n';
}

int run_physics_depth(const std::string& camera_path, const std::string& mask_path,
                      const std::string& schema_path, const std::string& which,
                      const physdepth::PhysicsDepthConfig& cfg, const CameraFlags& camera_flags,
                      const std::string& out_dir, bool preview) {
  const physdepth::CameraModel cam = load_camera(camera_path, camera_flags);
  require_exists(mask_path, "mask file");
  const physdepth::LabelMap mask = physdepth::read_label_png(mask_path);
  const physdepth::LabelSchema schema = load_schema(schema_path);
  if (which != "road" && which != "flat")
    throw physdepth::ParseError("--which must be 'road' or 'flat'");

  std::size_t unknown_ids = 0;
  const auto categories = physdepth::categorize(mask, schema, &unknown_ids);
  if (unknown_ids > 0)
    std::cerr << "warning: " << unknown_ids << " pixels with unknown class ids -> ignore\n";

  physdepth::PhysicsDepthResult result;
  result.road =
      physdepth::ground_physics_depth(cam, categories, physdepth::GroundSelect::road_only, cfg);
  result.flat =
      physdepth::ground_physics_depth(cam, categories, physdepth::GroundSelect::all_flat, cfg);
  result.edge_extended =
      physdepth::edge_extend(which == "road" ? result.road : result.flat, categories);
  result.dense = physdepth::densify(result.edge_extended, categories, cfg);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  physdepth::write_pfd((out / "road.pfd").string(), result.road);
  physdepth::write_pfd((out / "flat.pfd").string(), result.flat);
  physdepth::write_pfd((out / "extended.pfd").string(), result.edge_extended);
  physdepth::write_pfd((out / "dense.pfd").string(), result.dense);
  if (preview) {
    physdepth::write_depth_preview_png((out / "road.png").string(), result.road);
    physdepth::write_depth_preview_png((out / "flat.png").string(), result.flat);
    physdepth::write_depth_preview_png((out / "extended.png").string(), result.edge_extended);
    physdepth::write_depth_preview_png((out / "dense.png").string(), result.dense);
  }

  const json summary = {
      {"spec_version", physdepth::kSpecVersion},
      {"width", result.dense.width()},
      {"height", result.dense.height()},
      {"which", which},
      {"unknown_label_pixels", unknown_ids},
      {"config",
       {{"horizon_epsilon", cfg.horizon_epsilon},
        {"max_depth", cfg.max_depth},
        {"sky_factor", cfg.sky_factor},
        {"inpaint_radius", cfg.inpaint_radius}}},
      {"stages",
       {{"road", {{"valid_pixels", result.road.valid_count()}}},
        {"flat", {{"valid_pixels", result.flat.valid_count()}}},
        {"edge_extended", {{"valid_pixels", result.edge_extended.valid_count()}}},
        {"dense", {{"valid_pixels", result.dense.valid_count()}}}}}};
  write_text_file(out / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& gt_path,
                 const std::string& range_text, const std::string& pct_text,
                 const std::string& csv_path, const std::string& pct_csv_path) {
  require_exists(pred_path, "prediction file");
  require_exists(gt_path, "ground truth file");
  const physdepth::DepthMap pred = physdepth::read_pfd(pred_path);
  const physdepth::DepthMap gt = physdepth::read_pfd(gt_path);

  physdepth::DepthRange range;
  if (!range_text.empty()) {
    const auto [lo, hi] = parse_pair(range_text, "--range");
    range = {lo, hi};
  }
  const physdepth::MetricsReport report = physdepth::depth_metrics(pred, gt, range);

  json doc = {{"spec_version", physdepth::kSpecVersion}, {"metrics", report.to_json()}};
  if (!pct_text.empty()) {
    json pct = json::object();
    physdepth::PctErrorReport pct_report;
    bool have5 = false, have10 = false;
    std::stringstream ss(pct_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      double p = 0.0;
      try {
        p = std::stod(item);
      } catch (const std::exception&) {
        throw physdepth::ParseError("--pct: expected numbers, got '" + pct_text + "'");
      }
      const double fraction = physdepth::within_pct(pred, gt, p);
      std::ostringstream key;
      key << "within_" << p << "pct";
      pct[key.str()] = fraction;
      if (p == 5.0) {
        pct_report.frac_within_5pct = fraction;
        have5 = true;
      }
      if (p == 10.0) {
        pct_report.frac_within_10pct = fraction;
        have10 = true;
      }
    }
    doc["pct"] = pct;
    if (have5 && have10) {
      std::size_t overlap = 0;
      for (int y = 0; y < pred.height(); ++y)
        for (int x = 0; x < pred.width(); ++x)
          overlap += pred.valid(x, y) && gt.valid(x, y);
      pct_report.n_pixels = overlap;
      doc["pct_report"] = pct_report.to_json();
      if (!pct_csv_path.empty())
        append_csv(pct_csv_path, physdepth::PctErrorReport::csv_header(), pct_report.csv_row());
    }
  }
  if (!csv_path.empty())
    append_csv(csv_path, physdepth::MetricsReport::csv_header(), report.csv_row());
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

int run_scale(const std::string& pred_path, const std::string& ref_path,
              const std::string& out_path) {
  require_exists(pred_path, "prediction file");
  require_exists(ref_path, "reference file");
  const physdepth::DepthMap pred = physdepth::read_pfd(pred_path);
  const physdepth::DepthMap ref = physdepth::read_pfd(ref_path);
  const double scale = physdepth::median_scale(pred, ref);
  const physdepth::DepthMap scaled = physdepth::apply_scale(pred, scale);
  physdepth::write_pfd(out_path, scaled);
  const json doc = {{"spec_version", physdepth::kSpecVersion},
                    {"scale", scale},
                    {"scaled_path", out_path}};
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

int run_losses(const std::string& target_path, const std::string& prev_path,
               const std::string& next_path, const std::string& depth_path,
               const std::string& phys_path, const std::string& pose_prev_path,
               const std::string& pose_next_path, const std::string& camera_path,
               const CameraFlags& camera_flags, const physdepth::LossConfig& cfg, int patch,
               int search) {
  require_exists(target_path, "target image");
  require_exists(prev_path, "source image");
  require_exists(depth_path, "depth file");
  const physdepth::ImageBuffer target = physdepth::read_image_png(target_path);
  const physdepth::ImageBuffer prev = physdepth::read_image_png(prev_path);
  const physdepth::DepthMap depth = physdepth::read_pfd(depth_path);
  const physdepth::CameraModel cam = load_camera(camera_path, camera_flags);

  json doc = {{"spec_version", physdepth::kSpecVersion},
              {"config",
               {{"alpha_ssim", cfg.alpha_ssim},
                {"smooth_lambda", cfg.smooth_lambda},
                {"l2d_alpha", cfg.l2d_alpha},
                {"l2d_beta", cfg.l2d_beta},
                {"patch", patch},
                {"search", search}}}};

  if (!phys_path.empty()) {
    require_exists(phys_path, "physics depth file");
    const physdepth::DepthMap phys = physdepth::read_pfd(phys_path);
    const auto weights = physdepth::confidence_map(phys);
    const auto l_phy = physdepth::physics_supervision_loss(depth, phys, weights);
    doc["l_phy"] = {{"value", l_phy.value}, {"empty", l_phy.empty}};
  }

  const physdepth::RigidTransform pose_prev = load_pose(pose_prev_path);
  const auto warp_fwd = physdepth::warp_image(prev, depth, pose_prev, cam.intrinsics);
  const auto loss_fwd = physdepth::photometric_loss(target, warp_fwd.image, warp_fwd.valid, cfg);
  doc["photometric"] = {{"forward", {{"mean", loss_fwd.mean}, {"empty", loss_fwd.empty}}}};

  physdepth::MaskedMap min_map = loss_fwd.per_pixel;
  if (!next_path.empty()) {
    require_exists(next_path, "source image");
    const physdepth::ImageBuffer next = physdepth::read_image_png(next_path);
    const physdepth::RigidTransform pose_next = load_pose(pose_next_path);
    const auto warp_bwd = physdepth::warp_image(next, depth, pose_next, cam.intrinsics);
    const auto loss_bwd =
        physdepth::photometric_loss(target, warp_bwd.image, warp_bwd.valid, cfg);
    doc["photometric"]["backward"] = {{"mean", loss_bwd.mean}, {"empty", loss_bwd.empty}};
    min_map = physdepth::min_reprojection(loss_fwd.per_pixel, loss_bwd.per_pixel);

    // Motion at t from the previous frame, motion at t+1 from the next one,
    // both sampled on the target grid.
    const auto flow_to_prev = physdepth::block_matching_flow(target, prev, patch, search);
    const auto flow_to_next = physdepth::block_matching_flow(target, next, patch, search);
    physdepth::FlowField motion_t(flow_to_prev.width(), flow_to_prev.height());
    for (int y = 0; y < flow_to_prev.height(); ++y)
      for (int x = 0; x < flow_to_prev.width(); ++x)
        if (flow_to_prev.valid(x, y))
          motion_t.set(x, y, -flow_to_prev.u(x, y), -flow_to_prev.v(x, y));
    const auto matches = physdepth::flow_matches(motion_t, flow_to_next);
    if (!matches.empty()) doc["l_2d"] = physdepth::spatial_2d_loss(matches, cfg);
  }
  const auto min_mean = physdepth::masked_mean(min_map);
  doc["photometric"]["min"] = {{"mean", min_mean.value}, {"empty", min_mean.empty}};

  const auto smooth = physdepth::smoothness_loss(depth, target, cfg.smooth_lambda);
  doc["smoothness"] = {{"value", smooth.value}, {"empty", smooth.empty}};

  std::cout << doc.dump(2) << std::endl;
  return 0;
}

int run_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir) {
  physdepth::SynthSceneSpec spec;
  if (spec_path.empty()) {
    // Built-in default: road with a sidewalk strip and two parked boxes.
    spec.boxes.push_back({-2.5, 14.0, 2.0, 1.8, 3.5, 0.0, 13});
    spec.boxes.push_back({2.0, 22.0, 2.2, 2.0, 4.0, 0.0, 13});
  } else {
    require_exists(spec_path, "scene spec");
    spec = physdepth::synth_spec_from_json(read_json_file(spec_path));
  }

  const physdepth::SynthScene scene = physdepth::synth_scene(spec, seed);
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  physdepth::Raster<std::uint8_t> mask(scene.labels.width(), scene.labels.height(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = static_cast<std::uint8_t>(scene.labels[i]);
  physdepth::write_rgb8_png((out / "image.png").string(), scene.image);
  physdepth::write_gray8_png((out / "mask.png").string(), mask);
  physdepth::write_pfd((out / "depth_gt.pfd").string(), scene.depth);
  write_text_file(out / "camera.json",
                  physdepth::camera_model_to_json(scene.camera).dump(2) + "\n");
  write_text_file(out / "scene.json", physdepth::synth_spec_to_json(spec).dump(2) + "\n");

  const json doc = {{"spec_version", physdepth::kSpecVersion},
                    {"seed", seed},
                    {"out", out_dir},
                    {"files", {"image.png", "mask.png", "depth_gt.pfd", "camera.json",
                               "scene.json"}}};
  std::cout << doc.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"physics depth priors, self-supervision losses, and depth evaluation"};
  app.require_subcommand(1);

  // physics-depth
  auto* cmd_pd = app.add_subcommand("physics-depth",
                                    "compute road/flat/extended/dense depth priors");
  std::string pd_camera, pd_mask, pd_schema, pd_which = "flat", pd_out = ".";
  bool pd_preview = false;
  physdepth::PhysicsDepthConfig pd_cfg;
  CameraFlags pd_camera_flags;
  cmd_pd->add_option("--camera", pd_camera, "camera JSON or KITTI calibration text")->required();
  cmd_pd->add_option("--mask", pd_mask, "label map PNG")->required();
  cmd_pd->add_option("--schema", pd_schema, "label schema JSON (default: Cityscapes train ids)");
  cmd_pd->add_option("--which", pd_which, "extension base: road|flat (default flat)");
  cmd_pd->add_option("--horizon-epsilon", pd_cfg.horizon_epsilon, "minimum downward ray component");
  cmd_pd->add_option("--max-depth", pd_cfg.max_depth, "ground depth cap (m)");
  cmd_pd->add_option("--sky-factor", pd_cfg.sky_factor, "sky depth multiplier");
  cmd_pd->add_option("--inpaint-radius", pd_cfg.inpaint_radius, "fill neighborhood (px)");
  cmd_pd->add_option("--kitti-cam", pd_camera_flags.kitti_cam, "KITTI camera index");
  cmd_pd->add_option("--camera-height", pd_camera_flags.camera_height, "camera height (m)");
  cmd_pd->add_option("--camera-pitch", pd_camera_flags.pitch, "pitch (rad) for KITTI cameras");
  cmd_pd->add_option("--camera-roll", pd_camera_flags.roll, "roll (rad) for KITTI cameras");
  cmd_pd->add_option("--camera-yaw", pd_camera_flags.yaw, "yaw (rad) for KITTI cameras");
  cmd_pd->add_option("--width", pd_camera_flags.width, "image width override");
  cmd_pd->add_option("--height", pd_camera_flags.height, "image height override");
  cmd_pd->add_option("--out", pd_out, "output directory");
  cmd_pd->add_flag("--preview", pd_preview, "also write colormapped preview PNGs");

  // evaluate
  auto* cmd_eval = app.add_subcommand("evaluate", "depth metrics for a prediction vs ground truth");
  std::string ev_pred, ev_gt, ev_range, ev_pct, ev_csv, ev_pct_csv;
  cmd_eval->add_option("--pred", ev_pred, "prediction PFD1")->required();
  cmd_eval->add_option("--gt", ev_gt, "ground truth PFD1")->required();
  cmd_eval->add_option("--range", ev_range, "evaluation depth range 'min,max' (default 0.001,80)");
  cmd_eval->add_option("--pct", ev_pct, "comma list of percent tolerances, e.g. 5,10");
  cmd_eval->add_option("--csv", ev_csv, "append the metrics row to this CSV");
  cmd_eval->add_option("--pct-csv", ev_pct_csv,
                       "append the 5/10 percent report row to this CSV (needs --pct 5,10)");

  // scale
  auto* cmd_scale = app.add_subcommand("scale", "median-scale a prediction against a reference");
  std::string sc_pred, sc_ref, sc_out = "scaled.pfd";
  cmd_scale->add_option("--pred", sc_pred, "prediction PFD1")->required();
  cmd_scale->add_option("--ref", sc_ref, "reference PFD1 (ground truth or physics depth)")->required();
  cmd_scale->add_option("--out", sc_out, "output path for the scaled prediction");

  // losses
  auto* cmd_losses = app.add_subcommand("losses", "loss report for a frame triple");
  std::string lo_target, lo_prev, lo_next, lo_depth, lo_phys, lo_pose_prev, lo_pose_next,
      lo_camera;
  physdepth::LossConfig lo_cfg;
  CameraFlags lo_camera_flags;
  int lo_patch = 7, lo_search = 4;
  cmd_losses->add_option("--target", lo_target, "target frame PNG")->required();
  cmd_losses->add_option("--source-prev", lo_prev, "previous frame PNG")->required();
  cmd_losses->add_option("--source-next", lo_next, "next frame PNG");
  cmd_losses->add_option("--pred-depth", lo_depth, "predicted depth PFD1")->required();
  cmd_losses->add_option("--phys-depth", lo_phys, "physics depth PFD1 (enables the prior loss)");
  cmd_losses->add_option("--pose-prev", lo_pose_prev, "target->prev pose JSON or 'identity'");
  cmd_losses->add_option("--pose-next", lo_pose_next, "target->next pose JSON or 'identity'");
  cmd_losses->add_option("--camera", lo_camera, "camera JSON or KITTI calibration text")->required();
  cmd_losses->add_option("--alpha-ssim", lo_cfg.alpha_ssim, "structural weight");
  cmd_losses->add_option("--smooth-lambda", lo_cfg.smooth_lambda, "smoothness weight");
  cmd_losses->add_option("--l2d-alpha", lo_cfg.l2d_alpha, "positional weight");
  cmd_losses->add_option("--l2d-beta", lo_cfg.l2d_beta, "directional weight");
  cmd_losses->add_option("--patch", lo_patch, "block matching patch size (odd)");
  cmd_losses->add_option("--search", lo_search, "block matching search radius");
  cmd_losses->add_option("--kitti-cam", lo_camera_flags.kitti_cam, "KITTI camera index");
  cmd_losses->add_option("--camera-height", lo_camera_flags.camera_height, "camera height (m)");
  cmd_losses->add_option("--width", lo_camera_flags.width, "image width override");
  cmd_losses->add_option("--height", lo_camera_flags.height, "image height override");

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "render a synthetic scene bundle");
  std::string sy_spec, sy_out = "synth_out";
  std::uint64_t sy_seed = 0;
  cmd_synth->add_option("--spec", sy_spec, "scene spec JSON (default: built-in scene)");
  cmd_synth->add_option("--seed", sy_seed, "texture seed");
  cmd_synth->add_option("--out", sy_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_pd->parsed())
      return run_physics_depth(pd_camera, pd_mask, pd_schema, pd_which, pd_cfg, pd_camera_flags,
                               pd_out, pd_preview);
    if (cmd_eval->parsed())
      return run_evaluate(ev_pred, ev_gt, ev_range, ev_pct, ev_csv, ev_pct_csv);
    if (cmd_scale->parsed()) return run_scale(sc_pred, sc_ref, sc_out);
    if (cmd_losses->parsed())
      return run_losses(lo_target, lo_prev, lo_next, lo_depth, lo_phys, lo_pose_prev,
                        lo_pose_next, lo_camera, lo_camera_flags, lo_cfg, lo_patch, lo_search);
    if (cmd_synth->parsed()) return run_synth(sy_spec, sy_seed, sy_out);
  } catch (const physdepth::ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const physdepth::IoError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const physdepth::EmptyOverlap& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 4;
  } catch (const physdepth::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
