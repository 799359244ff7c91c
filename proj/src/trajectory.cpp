#include "gemesh/trajectory.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "gemesh/errors.hpp"

namespace gemesh {

namespace {

constexpr char kMagic[4] = {'G', 'M', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    T s = 0;
    for (size_t i = 0; i < sizeof(T); ++i) s = (s << 8) | ((v >> (8 * i)) & 0xff);
    return s;
  }
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  v = byteswap_if_big(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return byteswap_if_big(v);
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return byteswap_if_big(v);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void save_trajectory(const std::string& path, const Frames& frames, double dt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  check(out.good(), Err::IoError, "cannot write " + path);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u64(out, static_cast<std::uint64_t>(frames.cols()));
  put_u64(out, static_cast<std::uint64_t>(frames.rows()));
  put_f64(out, dt);
  for (Eigen::Index i = 0; i < frames.size(); ++i) {
    put_f64(out, frames.data()[i]);
  }
  out.flush();
  check(out.good(), Err::IoError, "short write to " + path);
}

Frames load_trajectory(const std::string& path, double* dt_out) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), Err::IoError, "cannot read " + path);
  char magic[4] = {};
  in.read(magic, 4);
  check(in.good() && std::memcmp(magic, kMagic, 4) == 0, Err::ParseError,
        path + " is not a trajectory file");
  const std::uint32_t version = get_u32(in);
  check(version == kVersion, Err::ParseError,
        "unsupported trajectory version " + std::to_string(version));
  const std::uint64_t cols = get_u64(in);
  const std::uint64_t rows = get_u64(in);
  const double dt = get_f64(in);
  check(in.good() && cols > 0 && rows > 0 && cols * rows < (1ull << 32),
        Err::ParseError, "corrupt trajectory header in " + path);

  Frames frames(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < frames.size(); ++i) {
    frames.data()[i] = get_f64(in);
  }
  check(in.good(), Err::ParseError, "truncated trajectory data in " + path);
  if (dt_out) *dt_out = dt;
  return frames;
}

std::string trajectory_meta_path(const std::string& trajectory_path) {
  return std::filesystem::path(trajectory_path).replace_extension(".json").string();
}

void save_trajectory_meta(const std::string& trajectory_path,
                          const nlohmann::json& meta) {
  const std::string path = trajectory_meta_path(trajectory_path);
  std::ofstream out(path, std::ios::trunc);
  check(out.good(), Err::IoError, "cannot write " + path);
  out << meta.dump(2) << "\n";
  out.flush();
  check(out.good(), Err::IoError, "short write to " + path);
}

nlohmann::json load_trajectory_meta(const std::string& trajectory_path) {
  const std::string path = trajectory_meta_path(trajectory_path);
  std::ifstream in(path);
  check(in.good(), Err::IoError, "cannot read " + path);
  nlohmann::json meta = nlohmann::json::parse(in, nullptr, false);
  check(!meta.is_discarded(), Err::ParseError, path + " is not valid JSON");
  return meta;
}

}  // namespace gemesh
