#include "orthoprobe/checkpoint.hpp"

#include <array>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "orthoprobe/errors.hpp"

namespace ortho {

namespace {

constexpr std::array<unsigned char, 6> kMagic = {0x4F, 0x50, 0x43, 0x4B, 0x50, 0x00};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 20;

void write_matrix(io::Writer& w, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  }
}

Matrix read_matrix(io::Reader& r, int rows, int cols, const char* what) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = r.f64(what);
  }
  return m;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  const bool orthogonal = std::holds_alternative<OrthogonalProbeParams>(ckpt.params);
  if (orthogonal != mode_is_orthogonal(ckpt.mode)) {
    throw ConfigError("checkpoint parameter kind does not match mode " +
                      std::string(mode_name(ckpt.mode)));
  }
  io::Writer w{out};
  for (unsigned char b : kMagic) w.u8(b);
  w.u8(kVersion);
  w.u8(static_cast<std::uint8_t>(ckpt.mode));
  if (orthogonal) {
    const auto& p = std::get<OrthogonalProbeParams>(ckpt.params);
    w.u32(static_cast<std::uint32_t>(p.dim()));
    w.u32(static_cast<std::uint32_t>(p.scalers.size()));
    write_matrix(w, p.v);
    for (const auto& [objective, d] : p.scalers) {
      w.u8(objective.tag());
      for (Eigen::Index i = 0; i < d.size(); ++i) w.f64(d(i));
    }
  } else {
    const auto& p = std::get<LinearProbeParams>(ckpt.params);
    w.u32(static_cast<std::uint32_t>(p.dim()));
    w.u32(static_cast<std::uint32_t>(p.maps.size()));
    for (const auto& [objective, b] : p.maps) {
      w.u8(objective.tag());
      write_matrix(w, b);
    }
  }
  if (!out) throw DataError("write failed while emitting checkpoint");
}

Checkpoint load_checkpoint(std::istream& in) {
  io::Reader r{in};
  for (unsigned char expected : kMagic) {
    const std::uint64_t at = r.offset;
    if (r.u8("magic") != expected) {
      throw FormatError("bad magic, not an OPCKP file", at);
    }
  }
  const std::uint64_t version_at = r.offset;
  const std::uint8_t version = r.u8("version");
  if (version != kVersion) {
    throw FormatError("unsupported OPCKP version " + std::to_string(version), version_at);
  }
  const std::uint64_t mode_at = r.offset;
  const std::uint8_t mode_tag = r.u8("mode");
  if (mode_tag > static_cast<std::uint8_t>(Mode::II)) {
    throw FormatError("unknown mode tag " + std::to_string(mode_tag), mode_at);
  }
  Checkpoint ckpt;
  ckpt.mode = static_cast<Mode>(mode_tag);
  const std::uint64_t dim_at = r.offset;
  const std::uint32_t dim = r.u32("dim");
  const std::uint32_t n_objectives = r.u32("objective count");
  if (dim == 0 || dim > kMaxDim || n_objectives == 0 || n_objectives > 8) {
    throw FormatError("implausible header counts", dim_at);
  }
  const int d = static_cast<int>(dim);
  if (mode_is_orthogonal(ckpt.mode)) {
    OrthogonalProbeParams p;
    p.v = read_matrix(r, d, d, "V entry");
    for (std::uint32_t k = 0; k < n_objectives; ++k) {
      const std::uint64_t tag_at = r.offset;
      const std::uint8_t tag = r.u8("objective tag");
      if (tag >= 8) throw FormatError("invalid objective tag " + std::to_string(tag), tag_at);
      Vector vec(d);
      for (int i = 0; i < d; ++i) vec(i) = r.f64("scaling value");
      if (!p.scalers.emplace(ObjectiveId::from_tag(tag), std::move(vec)).second) {
        throw FormatError("duplicate objective tag " + std::to_string(tag), tag_at);
      }
    }
    ckpt.params = std::move(p);
  } else {
    LinearProbeParams p;
    for (std::uint32_t k = 0; k < n_objectives; ++k) {
      const std::uint64_t tag_at = r.offset;
      const std::uint8_t tag = r.u8("objective tag");
      if (tag >= 8) throw FormatError("invalid objective tag " + std::to_string(tag), tag_at);
      Matrix b = read_matrix(r, d, d, "B entry");
      if (!p.maps.emplace(ObjectiveId::from_tag(tag), std::move(b)).second) {
        throw FormatError("duplicate objective tag " + std::to_string(tag), tag_at);
      }
    }
    ckpt.params = std::move(p);
  }
  return ckpt;
}

void save_checkpoint_file(const Checkpoint& ckpt, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    save_checkpoint(ckpt, out);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace ortho
