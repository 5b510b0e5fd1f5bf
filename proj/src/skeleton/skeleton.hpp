#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace poselift::skeleton {

enum class JointGroup { kTorsoHead, kLimbLeg, kLimbArm };

inline constexpr JointGroup kAllGroups[] = {JointGroup::kTorsoHead, JointGroup::kLimbLeg,
                                            JointGroup::kLimbArm};

const char* group_name(JointGroup g);
JointGroup parse_group(const std::string& name);

// Joint model: names, the root (central hip), and the group of every
// non-root joint. Immutable once validated.
class SkeletonSpec {
 public:
  SkeletonSpec(std::vector<std::string> joint_names, std::size_t root_index,
               std::vector<JointGroup> groups_for_non_root);

  // Human3.6M-style 17-joint layout, root = hip (index 0).
  static SkeletonSpec h36m17();

  static SkeletonSpec from_json(const nlohmann::json& j);
  static SkeletonSpec load(const std::string& path);
  nlohmann::json to_json() const;

  std::size_t n_joints() const { return names_.size(); }
  std::size_t root_index() const { return root_; }
  const std::vector<std::string>& joint_names() const { return names_; }
  std::size_t index_of(const std::string& name) const;

  // Group of joint `j` (j != root).
  JointGroup group_of(std::size_t joint) const;

  // Position of joint `j` once the root is removed.
  std::size_t rootless_index(std::size_t joint) const { return joint < root_ ? joint : joint - 1; }

  friend bool operator==(const SkeletonSpec&, const SkeletonSpec&) = default;

 private:
  std::vector<std::string> names_;
  std::size_t root_;
  std::vector<JointGroup> groups_;  // indexed by joint; root entry unused
};

struct Pose {
  std::vector<double> coords;  // joint-major, then axis
  int dim = 3;

  std::size_t n_joints() const { return coords.size() / static_cast<std::size_t>(dim); }
};

// Subtracts the root from every joint and drops the root: (J-1)*d values.
Pose root_center(const Pose& pose, const SkeletonSpec& spec);
// Inverse layout of root_center for a root-relative pose: reinserts the root
// at the origin.
Pose insert_root(const Pose& rootless, const SkeletonSpec& spec);

// Indices of the root-removed coordinate vector (dimension `dim`) that belong
// to `group`. The three masks partition [0, (J-1)*dim).
std::vector<std::size_t> group_mask(const SkeletonSpec& spec, JointGroup group, int dim = 3);

}  // namespace poselift::skeleton
