#pragma once

#include <filesystem>
#include <iosfwd>

#include "orthoprobe/probe.hpp"
#include "orthoprobe/trainer.hpp"

namespace ortho {

/// Trained parameters plus the mode that produced them. Serialized as OPCKP:
/// magic "OPCKP\0", u8 version 1, u8 mode tag, u32 dim, u32 objective count,
/// then either V as row-major float64 followed by per-objective u8 tag +
/// float64 scaling vector (orthogonal modes), or per-objective u8 tag +
/// row-major float64 B (mode II). All integers little-endian.
struct Checkpoint {
  Mode mode = Mode::A;
  ProbeParams params;
};

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint load_checkpoint(std::istream& in);

/// Writes to a sibling temp file and renames it into place, so readers never
/// observe a partial checkpoint.
void save_checkpoint_file(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

}  // namespace ortho
