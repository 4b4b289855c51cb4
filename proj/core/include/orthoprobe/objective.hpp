#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ortho {

/// Source of the gold tree/graph a probe is trained against.
enum class Structure : std::uint8_t { Dep = 0, Lex = 1, Pos = 2, Rand = 3 };

/// Quantity the probe predicts from embeddings.
enum class Target : std::uint8_t { Depth = 0, Distance = 1 };

/// One (structure, target) pair, e.g. dependency-tree distance. A probe in a
/// multitask run keeps one scaling vector per objective.
struct ObjectiveId {
  Structure structure = Structure::Dep;
  Target target = Target::Depth;

  auto operator<=>(const ObjectiveId&) const = default;

  /// Dense index in [0, 8); also the byte written to checkpoint files.
  std::uint8_t tag() const {
    return static_cast<std::uint8_t>(static_cast<std::uint8_t>(structure) * 2 +
                                     static_cast<std::uint8_t>(target));
  }
  static ObjectiveId from_tag(std::uint8_t tag);

  /// Lowercase identifier like "dep_distance"; inverse of parse().
  std::string name() const;
  static ObjectiveId parse(std::string_view name);
};

std::string_view structure_name(Structure s);
std::string_view target_name(Target t);
Structure parse_structure(std::string_view name);
Target parse_target(std::string_view name);

/// All eight objectives in tag order.
std::array<ObjectiveId, 8> all_objectives();

}  // namespace ortho
