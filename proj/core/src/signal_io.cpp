#include "anisograph/error.hpp"
#include "anisograph/spectral.hpp"
#include "binary_io.hpp"

namespace anisograph {
namespace {

constexpr std::string_view kSignalMagic = "CLSG";
constexpr std::uint32_t kSignalVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_signal(const Signal& s) {
  detail::ByteWriter w;
  w.magic(kSignalMagic);
  w.u32(kSignalVersion);
  w.u64(static_cast<std::uint64_t>(s.rows()));
  w.u32(static_cast<std::uint32_t>(s.cols()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) w.f64(s(i, j));
  }
  return w.take();
}

Signal deserialize_signal(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kSignalMagic);
  r.expect_version(kSignalVersion);
  const auto rows = r.u64();
  const auto cols = r.u32();
  const auto at = r.position();
  if (cols != 0 && rows > r.remaining() / 8 / cols) throw FormatError("truncated signal data", at);
  const auto data = r.f64s(rows * cols);
  if (!r.at_end()) throw FormatError("trailing bytes", r.position());
  Signal s(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i) {
    for (std::uint32_t j = 0; j < cols; ++j) {
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * cols + j];
    }
  }
  return s;
}

void save_signal(const std::string& path, const Signal& s) { detail::write_file(path, serialize_signal(s)); }

Signal load_signal(const std::string& path) { return deserialize_signal(detail::read_file(path)); }

}  // namespace anisograph
