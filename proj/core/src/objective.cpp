#include "orthoprobe/objective.hpp"

#include "orthoprobe/errors.hpp"

namespace ortho {

ObjectiveId ObjectiveId::from_tag(std::uint8_t tag) {
  if (tag >= 8) {
    throw ConfigError("objective tag out of range: " + std::to_string(tag));
  }
  return ObjectiveId{static_cast<Structure>(tag / 2), static_cast<Target>(tag % 2)};
}

std::string_view structure_name(Structure s) {
  switch (s) {
    case Structure::Dep: return "dep";
    case Structure::Lex: return "lex";
    case Structure::Pos: return "pos";
    case Structure::Rand: return "rand";
  }
  throw ConfigError("invalid structure value");
}

std::string_view target_name(Target t) {
  switch (t) {
    case Target::Depth: return "depth";
    case Target::Distance: return "distance";
  }
  throw ConfigError("invalid target value");
}

Structure parse_structure(std::string_view name) {
  if (name == "dep") return Structure::Dep;
  if (name == "lex") return Structure::Lex;
  if (name == "pos") return Structure::Pos;
  if (name == "rand") return Structure::Rand;
  throw ConfigError("unknown structure: " + std::string(name));
}

Target parse_target(std::string_view name) {
  if (name == "depth") return Target::Depth;
  if (name == "distance") return Target::Distance;
  throw ConfigError("unknown target: " + std::string(name));
}

std::string ObjectiveId::name() const {
  return std::string(structure_name(structure)) + "_" + std::string(target_name(target));
}

ObjectiveId ObjectiveId::parse(std::string_view name) {
  const auto sep = name.find('_');
  if (sep == std::string_view::npos) {
    throw ConfigError("malformed objective name: " + std::string(name));
  }
  return ObjectiveId{parse_structure(name.substr(0, sep)), parse_target(name.substr(sep + 1))};
}

std::array<ObjectiveId, 8> all_objectives() {
  std::array<ObjectiveId, 8> out{};
  for (std::uint8_t tag = 0; tag < 8; ++tag) out[tag] = ObjectiveId::from_tag(tag);
  return out;
}

}  // namespace ortho
