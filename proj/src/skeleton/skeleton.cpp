#include "skeleton/skeleton.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "common/error.hpp"

namespace poselift::skeleton {

using nlohmann::json;

const char* group_name(JointGroup g) {
  switch (g) {
    case JointGroup::kTorsoHead: return "torso_head";
    case JointGroup::kLimbLeg: return "limb_leg";
    case JointGroup::kLimbArm: return "limb_arm";
  }
  return "?";
}

JointGroup parse_group(const std::string& name) {
  for (JointGroup g : kAllGroups)
    if (name == group_name(g)) return g;
  fail(ErrorCode::kInvalidArgument, "unknown joint group '" + name + "'");
}

SkeletonSpec::SkeletonSpec(std::vector<std::string> joint_names, std::size_t root_index,
                           std::vector<JointGroup> groups_for_non_root)
    : names_(std::move(joint_names)), root_(root_index) {
  require(names_.size() >= 2, ErrorCode::kConfig, "skeleton needs at least 2 joints");
  require(root_ < names_.size(), ErrorCode::kConfig,
          "skeleton root index " + std::to_string(root_) + " out of range");
  require(groups_for_non_root.size() == names_.size() - 1, ErrorCode::kConfig,
          "skeleton: every non-root joint needs exactly one group");
  std::set<std::string> seen;
  for (const auto& n : names_)
    require(seen.insert(n).second, ErrorCode::kConfig, "skeleton: duplicate joint name '" + n + "'");
  groups_.resize(names_.size(), JointGroup::kTorsoHead);
  for (std::size_t j = 0, k = 0; j < names_.size(); ++j) {
    if (j == root_) continue;
    groups_[j] = groups_for_non_root[k++];
  }
}

SkeletonSpec SkeletonSpec::h36m17() {
  using G = JointGroup;
  std::vector<std::string> names = {"hip",       "r_hip",      "r_knee",  "r_ankle", "l_hip",
                                    "l_knee",    "l_ankle",    "spine",   "thorax",  "neck",
                                    "head",      "l_shoulder", "l_elbow", "l_wrist", "r_shoulder",
                                    "r_elbow",   "r_wrist"};
  std::vector<G> groups = {
      G::kTorsoHead, G::kLimbLeg,   G::kLimbLeg,   // r_hip r_knee r_ankle
      G::kTorsoHead, G::kLimbLeg,   G::kLimbLeg,   // l_hip l_knee l_ankle
      G::kTorsoHead, G::kTorsoHead, G::kTorsoHead, G::kTorsoHead,  // spine thorax neck head
      G::kTorsoHead, G::kLimbArm,   G::kLimbArm,   // l_shoulder l_elbow l_wrist
      G::kTorsoHead, G::kLimbArm,   G::kLimbArm,   // r_shoulder r_elbow r_wrist
  };
  return SkeletonSpec(std::move(names), 0, std::move(groups));
}

std::size_t SkeletonSpec::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j)
    if (names_[j] == name) return j;
  fail(ErrorCode::kConfig, "skeleton: unknown joint '" + name + "'");
}

JointGroup SkeletonSpec::group_of(std::size_t joint) const {
  require(joint < names_.size() && joint != root_, ErrorCode::kInvalidArgument,
          "group_of: joint " + std::to_string(joint) + " is the root or out of range");
  return groups_[joint];
}

// {"joint_names": [...], "root": "hip", "groups": {"torso_head": [...], ...}}
SkeletonSpec SkeletonSpec::from_json(const json& j) {
  require(j.is_object() && j.contains("joint_names") && j.contains("root") && j.contains("groups"),
          ErrorCode::kConfig, "skeleton spec requires joint_names, root and groups");
  for (const auto& [key, _] : j.items())
    require(key == "joint_names" || key == "root" || key == "groups", ErrorCode::kConfig,
            "skeleton spec: unknown key '" + key + "'");
  auto names = j.at("joint_names").get<std::vector<std::string>>();
  std::size_t root = 0;
  if (j.at("root").is_string()) {
    const auto r = j.at("root").get<std::string>();
    bool found = false;
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == r) root = k, found = true;
    require(found, ErrorCode::kConfig, "skeleton spec: root '" + r + "' is not a joint");
  } else {
    root = j.at("root").get<std::size_t>();
  }
  std::vector<int> assigned(names.size(), -1);
  for (const auto& [gname, members] : j.at("groups").items()) {
    const JointGroup g = parse_group(gname);
    for (const auto& m : members) {
      const auto name = m.get<std::string>();
      std::size_t idx = names.size();
      for (std::size_t k = 0; k < names.size(); ++k)
        if (names[k] == name) idx = k;
      require(idx < names.size(), ErrorCode::kConfig,
              "skeleton spec: group member '" + name + "' is not a joint");
      require(idx != root, ErrorCode::kConfig, "skeleton spec: root joint cannot be grouped");
      require(assigned[idx] < 0, ErrorCode::kConfig,
              "skeleton spec: joint '" + name + "' assigned to more than one group");
      assigned[idx] = static_cast<int>(g);
    }
  }
  std::vector<JointGroup> groups;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k == root) continue;
    require(assigned[k] >= 0, ErrorCode::kConfig,
            "skeleton spec: joint '" + names[k] + "' has no group");
    groups.push_back(static_cast<JointGroup>(assigned[k]));
  }
  return SkeletonSpec(std::move(names), root, std::move(groups));
}

SkeletonSpec SkeletonSpec::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open skeleton spec '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, "skeleton spec '" + path + "': " + e.what());
  }
  return from_json(j);
}

json SkeletonSpec::to_json() const {
  json groups = json::object();
  for (JointGroup g : kAllGroups) groups[group_name(g)] = json::array();
  for (std::size_t k = 0; k < names_.size(); ++k)
    if (k != root_) groups[group_name(groups_[k])].push_back(names_[k]);
  return json{{"joint_names", names_}, {"root", names_[root_]}, {"groups", groups}};
}

Pose root_center(const Pose& pose, const SkeletonSpec& spec) {
  const auto d = static_cast<std::size_t>(pose.dim);
  require(pose.dim == 2 || pose.dim == 3, ErrorCode::kShapeMismatch, "root_center: dim must be 2 or 3");
  require(pose.coords.size() == spec.n_joints() * d, ErrorCode::kShapeMismatch,
          "root_center: pose has " + std::to_string(pose.coords.size()) + " values, skeleton expects " +
              std::to_string(spec.n_joints() * d));
  const std::size_t r = spec.root_index();
  Pose out{std::vector<double>(), pose.dim};
  out.coords.reserve((spec.n_joints() - 1) * d);
  for (std::size_t j = 0; j < spec.n_joints(); ++j) {
    if (j == r) continue;
    for (std::size_t a = 0; a < d; ++a) out.coords.push_back(pose.coords[j * d + a] - pose.coords[r * d + a]);
  }
  return out;
}

Pose insert_root(const Pose& rootless, const SkeletonSpec& spec) {
  const auto d = static_cast<std::size_t>(rootless.dim);
  require(rootless.coords.size() == (spec.n_joints() - 1) * d, ErrorCode::kShapeMismatch,
          "insert_root: pose does not match skeleton");
  Pose out{std::vector<double>(spec.n_joints() * d, 0.0), rootless.dim};
  for (std::size_t j = 0; j < spec.n_joints(); ++j) {
    if (j == spec.root_index()) continue;
    const std::size_t src = spec.rootless_index(j);
    for (std::size_t a = 0; a < d; ++a) out.coords[j * d + a] = rootless.coords[src * d + a];
  }
  return out;
}

std::vector<std::size_t> group_mask(const SkeletonSpec& spec, JointGroup group, int dim) {
  require(dim == 2 || dim == 3, ErrorCode::kInvalidArgument, "group_mask: dim must be 2 or 3");
  const auto d = static_cast<std::size_t>(dim);
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < spec.n_joints(); ++j) {
    if (j == spec.root_index() || spec.group_of(j) != group) continue;
    const std::size_t base = spec.rootless_index(j) * d;
    for (std::size_t a = 0; a < d; ++a) idx.push_back(base + a);
  }
  return idx;
}

}  // namespace poselift::skeleton
