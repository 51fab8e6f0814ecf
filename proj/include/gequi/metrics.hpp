#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gequi/group.hpp"
#include "gequi/layers.hpp"
#include "gequi/tensor.hpp"

namespace gequi {

/// Input indices read by output cell (x, y) of a layer with kernel k and stride s.
IndexPatch index_patch(int x, int y, int k, int s);

struct Counterexample {
  Index2 output;
  IndexPatch transform_then_sample;  // index(T_o(x, y))
  IndexPatch sample_then_transform;  // T_i(index(x, y))

  bool operator==(const Counterexample&) const = default;
};

struct CommutationVerdict {
  bool holds = true;
  std::optional<Counterexample> counterexample;

  bool operator==(const CommutationVerdict&) const = default;
};

enum class Symmetry { Rotation, Mirror };

/// Brute-force check, over every output index of an unpadded layer, that sampling
/// then rotating selects the same input patch as rotating then sampling.
CommutationVerdict rotation_commutation(int i, int k, int s);
CommutationVerdict mirror_commutation(int i, int k, int s);
CommutationVerdict commutation(Symmetry symmetry, int i, int k, int s);

/// (1 / (C * K * I * J)) * sqrt(sum |a - b|^2); the normalizer sits outside the root.
double equivariance_error(const FeatureMap& a, const FeatureMap& b);

/// T' for a map at some depth: the full group action on group-valued maps, the
/// spatial action otherwise.
FeatureMap transform_output(GroupElement g, const FeatureMap& fm, GroupKind kind);

/// Depths at which forward(T x) and T'(forward(x)) are comparable: every layer up to and
/// including d is built to commute with the group. A Conv2d ends tracking, and a Dense
/// layer ends it unless it reads an invariant (1x1, group-free) input.
std::vector<int> tracked_depths(const Network& net);

struct ProfileEntry {
  int layer_index = 0;
  GroupElement element;
  double error = 0.0;

  bool operator==(const ProfileEntry&) const = default;
};

struct EquivarianceProfile {
  std::string network;
  std::uint64_t seed = 0;
  bool integer_mode = true;
  std::vector<ProfileEntry> entries;

  double max_error() const;
  bool operator==(const EquivarianceProfile&) const = default;
};

/// Seed used to draw the network input, distinct from the weight stream.
std::uint64_t input_seed(std::uint64_t seed);

EquivarianceProfile profile_equivariance(const Network& net, const FeatureMap& input,
                                         const std::vector<GroupElement>& elements);

/// Builds the network with weights drawn from `seed` and a random input, then profiles it.
EquivarianceProfile profile_equivariance(const ArchitectureSpec& arch, std::uint64_t seed,
                                         const std::vector<GroupElement>& elements, bool integer_mode);

/// Largest absolute difference between the last activation on x and on g.x, where the
/// last layer is expected to be invariant.
double output_discrepancy(const Network& net, const FeatureMap& input, GroupElement g);

/// Rotation by `angle_degrees` counterclockwise about ((n-1)/2, (n-1)/2) with bilinear
/// sampling; samples that fall outside the map read 0.
FeatureMap rotate_bilinear(const FeatureMap& fm, double angle_degrees);

struct SweepRow {
  double angle = 0.0;
  double discrepancy = 0.0;

  bool operator==(const SweepRow&) const = default;
};

/// Throws ConfigError unless the network ends in a group-invariant head.
void require_invariant_head(const Network& net);

/// Per angle: max_abs_diff(f(crop(x)), f(crop(rotate(x, angle)))).
std::vector<SweepRow> invariance_sweep(const Network& net, const FeatureMap& input,
                                       const std::vector<double>& angles);

/// Angles 0, step, 2*step, ... below 360.
std::vector<double> sweep_angles(double step);

}  // namespace gequi
