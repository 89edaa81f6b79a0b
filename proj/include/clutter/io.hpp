#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "clutter/observation.hpp"
#include "clutter/scene.hpp"
#include "clutter/solver.hpp"

namespace clutter {

using json = nlohmann::ordered_json;

// Scene file format: versioned header, preset, seed, per-object shape/pose,
// target. All reals are quantized at generation time, so serialization is
// byte-stable and digests are reproducible.
inline json scene_to_json(const SceneState& s) {
  json j;
  j["format"] = "clutter-scene";
  j["version"] = 1;
  j["preset"] = s.preset_name;
  j["seed"] = s.rng_seed;
  j["target_id"] = s.target_id;
  j["objects"] = json::array();
  for (const auto& o : s.objects) {
    json jo;
    jo["id"] = o.id;
    jo["category"] = o.category;
    jo["half_extents"] = {o.half_extents.x, o.half_extents.y, o.half_extents.z};
    jo["yaw"] = o.pose.yaw;
    jo["pos"] = {o.pose.pos.x, o.pose.pos.y, o.pose.pos.z};
    j["objects"].push_back(std::move(jo));
  }
  j["removed"] = json::array();
  for (int id : s.removed) j["removed"].push_back(id);
  return j;
}

inline SceneState scene_from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "clutter-scene")
    throw std::runtime_error("scene parse error: not a clutter-scene file");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("scene parse error: unsupported version");
  SceneState s;
  s.preset_name = j.value("preset", "");
  s.rng_seed = j.value("seed", std::uint64_t{0});
  s.target_id = j.at("target_id").get<int>();
  for (const auto& jo : j.at("objects")) {
    RigidObject o;
    o.id = jo.at("id").get<int>();
    o.category = jo.value("category", "");
    auto he = jo.at("half_extents");
    o.half_extents = {he.at(0).get<double>(), he.at(1).get<double>(),
                      he.at(2).get<double>()};
    o.pose.yaw = jo.at("yaw").get<double>();
    auto pos = jo.at("pos");
    o.pose.pos = {pos.at(0).get<double>(), pos.at(1).get<double>(),
                  pos.at(2).get<double>()};
    o.refresh_particles(s.params.h);
    s.objects.push_back(std::move(o));
  }
  for (const auto& r : j.value("removed", json::array()))
    s.removed.insert(r.get<int>());
  if (!s.is_active(s.target_id))
    throw std::runtime_error("scene parse error: target missing or removed");
  return s;
}

inline std::string scene_to_string(const SceneState& s) {
  return scene_to_json(s).dump(2) + "\n";
}

inline SceneState load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("scene parse error in " + path + ": " + e.what());
  }
  return scene_from_json(j);
}

inline std::uint64_t scene_digest(const SceneState& s) {
  return fnv1a(scene_to_string(s));
}

inline std::string digest_hex(std::uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(d));
  return buf;
}

// Observation dump: mirrors the scene format with per-object visible points.
inline json observation_to_json(const Observation& obs) {
  json j;
  j["format"] = "clutter-observation";
  j["version"] = 1;
  j["step"] = obs.step;
  j["objects"] = json::array();
  for (const auto& o : obs.objects) {
    json jo;
    jo["id"] = o.id;
    jo["visibility_ratio"] = o.visibility_ratio;
    jo["points"] = json::array();
    for (const auto& p : o.visible_points.points)
      jo["points"].push_back({p.x, p.y, p.z});
    j["objects"].push_back(std::move(jo));
  }
  return j;
}

inline json action_to_json(const Action& a) {
  json j;
  j["object_id"] = a.object_id;
  j["grasp_point"] = {a.grasp_point.x, a.grasp_point.y, a.grasp_point.z};
  j["approach"] = {a.pose.approach.x, a.pose.approach.y, a.pose.approach.z};
  j["roll"] = a.pose.roll;
  j["retrieval_dir"] = {a.retrieval_dir.x, a.retrieval_dir.y, a.retrieval_dir.z};
  return j;
}

// Line-delimited episode log: one JSON record per step.
inline std::string episode_log_lines(const EpisodeReport& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const StepRecord& s = r.steps[i];
    json j;
    j["step"] = i;
    j["object_id"] = s.object_id;
    j["action"] = action_to_json(s.action);
    j["graph_digest"] = digest_hex(s.graph_digest);
    j["queries"] = s.queries;
    j["adjust_added_nodes"] = s.adjust_added_nodes;
    j["max_other_displacement"] = s.max_other_displacement;
    j["movements"] = json::array();
    for (const auto& m : s.movements)
      j["movements"].push_back({{"id", m.object_id},
                                {"displacement", m.displacement},
                                {"rotation_change", m.rotation_change}});
    os << j.dump() << "\n";
  }
  json tail;
  tail["success"] = r.success;
  tail["failure_reason"] = r.failure_reason;
  tail["accumulated_displacement"] = r.accumulated_displacement;
  tail["total_queries"] = r.total_queries;
  tail["total_steps"] = r.total_steps;
  tail["adjust_events"] = r.adjust_events;
  os << tail.dump() << "\n";
  return os.str();
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path().string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace clutter
