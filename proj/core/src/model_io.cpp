#include <cmath>

#include "anisograph/error.hpp"
#include "anisograph/network.hpp"
#include "binary_io.hpp"

namespace anisograph {
namespace {

constexpr std::string_view kModelMagic = "CLMD";
constexpr std::uint32_t kModelVersion = 1;

enum class Tag : std::uint8_t { Cheb = 0, Relu = 1, Pool = 2, Unpool = 3, GlobalMax = 4, Dense = 5, LogSoftmax = 6 };

void write_matrix(detail::ByteWriter& w, const Eigen::MatrixXd& m) {
  w.f64s(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

void write_plan(detail::ByteWriter& w, const PoolPlan& p) {
  w.u8(static_cast<std::uint8_t>(p.mode));
  w.u64(p.seed);
  w.u8(p.merged_trailing ? 1 : 0);
  w.u64(p.fine_size);
  w.u64(p.coarse_size);
  w.u64s(p.cluster);
}

Eigen::MatrixXd read_matrix(detail::ByteReader& r, std::size_t rows, std::size_t cols) {
  const auto at = r.position();
  if (cols != 0 && rows > r.remaining() / 8 / cols) throw FormatError("truncated parameter blob", at);
  const auto v = r.f64s(rows * cols);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(v.begin(), v.end(), m.data());
  if (!m.allFinite()) throw FormatError("non-finite parameters", at);
  return m;
}

std::shared_ptr<PoolPlan> read_plan(detail::ByteReader& r) {
  const auto at = r.position();
  auto p = std::make_shared<PoolPlan>();
  const auto mode = r.u8();
  if (mode > static_cast<std::uint8_t>(PoolMode::S2Avg)) throw FormatError("unknown pool mode", at);
  p->mode = static_cast<PoolMode>(mode);
  p->seed = r.u64();
  p->merged_trailing = r.u8() != 0;
  p->fine_size = r.u64();
  p->coarse_size = r.u64();
  p->cluster = r.u64s(p->fine_size);
  try {
    p->finalize();
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid pool plan: ") + e.what(), at);
  }
  return p;
}

std::uint32_t read_dim(detail::ByteReader& r) {
  const auto at = r.position();
  const auto v = r.u32();
  if (v == 0) throw FormatError("zero layer dimension", at);
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& m, std::span<const std::uint32_t> cheb_levels) {
  detail::ByteWriter w;
  w.magic(kModelMagic);
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(m.layers.size()));
  std::size_t cheb = 0;
  for (const auto& layer : m.layers) {
    if (const auto* c = std::get_if<ChebLayer>(&layer)) {
      if (cheb >= cheb_levels.size()) throw ArgumentError("serialize_model: missing graph level for a Cheb layer");
      w.u8(static_cast<std::uint8_t>(Tag::Cheb));
      w.u32(cheb_levels[cheb++]);
      w.u32(static_cast<std::uint32_t>(c->theta.order()));
      w.u32(static_cast<std::uint32_t>(c->theta.d_in()));
      w.u32(static_cast<std::uint32_t>(c->theta.d_out()));
      for (const auto& t : c->theta.theta) write_matrix(w, t);
      write_matrix(w, c->bias);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      w.u8(static_cast<std::uint8_t>(Tag::Relu));
    } else if (const auto* p = std::get_if<PoolLayer>(&layer)) {
      w.u8(static_cast<std::uint8_t>(Tag::Pool));
      write_plan(w, p->plan());
    } else if (const auto* u = std::get_if<UnpoolLayer>(&layer)) {
      w.u8(static_cast<std::uint8_t>(Tag::Unpool));
      write_plan(w, u->plan());
    } else if (std::holds_alternative<GlobalMaxPoolLayer>(layer)) {
      w.u8(static_cast<std::uint8_t>(Tag::GlobalMax));
    } else if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      w.u8(static_cast<std::uint8_t>(Tag::Dense));
      w.u32(static_cast<std::uint32_t>(d->weight.rows()));
      w.u32(static_cast<std::uint32_t>(d->weight.cols()));
      write_matrix(w, d->weight);
      write_matrix(w, d->bias);
    } else {
      w.u8(static_cast<std::uint8_t>(Tag::LogSoftmax));
    }
  }
  if (cheb != cheb_levels.size()) throw ArgumentError("serialize_model: more graph levels than Cheb layers");
  return w.take();
}

ModelFile deserialize_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect_magic(kModelMagic);
  r.expect_version(kModelVersion);
  const auto count = r.u32();
  ModelFile file;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto at = r.position();
    const auto tag = r.u8();
    switch (static_cast<Tag>(tag)) {
      case Tag::Cheb: {
        file.cheb_levels.push_back(r.u32());
        const auto order = read_dim(r);
        const auto d_in = read_dim(r);
        const auto d_out = read_dim(r);
        std::vector<Eigen::MatrixXd> theta;
        for (std::uint32_t j = 0; j < order; ++j) theta.push_back(read_matrix(r, d_in, d_out));
        Eigen::RowVectorXd bias = read_matrix(r, 1, d_out);
        file.model.layers.emplace_back(ChebLayer(nullptr, ChebCoeffs(std::move(theta)), std::move(bias)));
        break;
      }
      case Tag::Relu: file.model.layers.emplace_back(ReluLayer{}); break;
      case Tag::Pool: file.model.layers.emplace_back(PoolLayer(read_plan(r))); break;
      case Tag::Unpool: file.model.layers.emplace_back(UnpoolLayer(read_plan(r))); break;
      case Tag::GlobalMax: file.model.layers.emplace_back(GlobalMaxPoolLayer{}); break;
      case Tag::Dense: {
        const auto d_in = read_dim(r);
        const auto d_out = read_dim(r);
        Eigen::MatrixXd w = read_matrix(r, d_in, d_out);
        Eigen::RowVectorXd b = read_matrix(r, 1, d_out);
        file.model.layers.emplace_back(DenseLayer(std::move(w), std::move(b)));
        break;
      }
      case Tag::LogSoftmax: file.model.layers.emplace_back(LogSoftmaxLayer{}); break;
      default: throw FormatError("unknown layer tag " + std::to_string(tag), at);
    }
  }
  if (!r.at_end()) throw FormatError("trailing bytes", r.position());
  return file;
}

void save_model(const std::string& path, const Model& m, std::span<const std::uint32_t> cheb_levels) {
  detail::write_file(path, serialize_model(m, cheb_levels));
}

ModelFile load_model(const std::string& path) { return deserialize_model(detail::read_file(path)); }

void attach(ModelFile& file, std::span<const std::shared_ptr<const Laplacian>> levels) {
  std::size_t cheb = 0;
  for (auto& layer : file.model.layers) {
    if (auto* c = std::get_if<ChebLayer>(&layer)) {
      const auto level = file.cheb_levels.at(cheb++);
      if (level >= levels.size()) throw ArgumentError("attach: graph level " + std::to_string(level) + " missing");
      c->set_laplacian(levels[level]);
    }
  }
}

}  // namespace anisograph
