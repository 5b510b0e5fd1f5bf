#include "model/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "common/error.hpp"

namespace poselift::model {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'L', 'F', 'T'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : b_(bytes) {}
  void need(std::size_t n) const {
    require(pos_ + n <= b_.size(), ErrorCode::kFormat, "checkpoint is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == b_.size(); }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  const ModelConfig& c = ckpt.params.config;
  const auto sizes = ckpt.params.tensor_sizes();
  require(ckpt.optimizer.m.size() == sizes.size() && ckpt.optimizer.v.size() == sizes.size(),
          ErrorCode::kShapeMismatch, "checkpoint: optimizer state does not match parameters");
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(c.input_dim));
  w.u32(static_cast<std::uint32_t>(c.output_dim));
  w.u32(static_cast<std::uint32_t>(c.hidden));
  w.u32(static_cast<std::uint32_t>(c.seq_len));
  w.u32((c.residual ? 1u : 0u) | (c.layer_norm ? 2u : 0u) | (c.dense_decoder_input ? 4u : 0u));
  w.f64(c.dropout_p);
  w.f64(c.forget_bias);
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (auto s : sizes) w.u64(s);
  ckpt.params.visit([&](const std::string&, std::span<const double> v) {
    for (double x : v) w.f64(x);
  });
  const auto& opt = ckpt.optimizer;
  w.u64(opt.step_count);
  w.f64(opt.beta1);
  w.f64(opt.beta2);
  w.f64(opt.eps);
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    require(opt.m[t].size() == sizes[t] && opt.v[t].size() == sizes[t], ErrorCode::kShapeMismatch,
            "checkpoint: optimizer moment shape mismatch");
  }
  for (const auto& m : opt.m)
    for (double x : m) w.f64(x);
  for (const auto& v : opt.v)
    for (double x : v) w.f64(x);
  const std::string trailer = json{{"norm_2d", ckpt.stats_2d.to_json()},
                                   {"norm_3d", ckpt.stats_3d.to_json()},
                                   {"skeleton", ckpt.skeleton.to_json()},
                                   {"train_state", ckpt.train_state}}
                                  .dump();
  w.u64(trailer.size());
  w.raw(trailer.data(), trailer.size());
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  require(r.bytes(4) == std::string(kMagic, 4), ErrorCode::kFormat, "not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  require(version == kCheckpointVersion, ErrorCode::kFormat,
          "checkpoint format version " + std::to_string(version) + " is not supported (expected " +
              std::to_string(kCheckpointVersion) + ")");
  ModelConfig c;
  c.input_dim = r.u32();
  c.output_dim = r.u32();
  c.hidden = r.u32();
  c.seq_len = r.u32();
  const std::uint32_t flags = r.u32();
  c.residual = (flags & 1u) != 0;
  c.layer_norm = (flags & 2u) != 0;
  c.dense_decoder_input = (flags & 4u) != 0;
  c.dropout_p = r.f64();
  c.forget_bias = r.f64();
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("checkpoint header: ") + e.what());
  }

  // Shapes are rebuilt from the header, then checked against the stored table.
  ModelParams params;
  params.config = c;
  params.encoder = LstmCellParams::zeros(c.input_dim, c.hidden);
  params.decoder = LstmCellParams::zeros(c.output_dim, c.hidden);
  if (c.dense_decoder_input) {
    params.dec_in_w = Matrix(c.output_dim, c.output_dim);
    params.dec_in_b.assign(c.output_dim, 0.0);
  }
  params.out_w = Matrix(c.hidden, c.output_dim);
  params.out_b.assign(c.output_dim, 0.0);
  const auto sizes = params.tensor_sizes();

  const std::uint32_t count = r.u32();
  require(count == sizes.size(), ErrorCode::kFormat, "checkpoint tensor count does not match header");
  for (std::size_t t = 0; t < count; ++t)
    require(r.u64() == sizes[t], ErrorCode::kFormat, "checkpoint tensor " + std::to_string(t) + " has the wrong size");
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  r.need(total * 8);
  params.visit([&](const std::string&, std::span<double> v) {
    for (double& x : v) x = r.f64();
  });

  kernel::AdamState opt = kernel::AdamState::for_sizes(sizes);
  opt.step_count = r.u64();
  opt.beta1 = r.f64();
  opt.beta2 = r.f64();
  opt.eps = r.f64();
  r.need(total * 16);
  for (auto& m : opt.m)
    for (double& x : m) x = r.f64();
  for (auto& v : opt.v)
    for (double& x : v) x = r.f64();

  const std::uint64_t trailer_len = r.u64();
  const std::string trailer = r.bytes(trailer_len);
  require(r.at_end(), ErrorCode::kFormat, "checkpoint has trailing bytes");
  json tj;
  try {
    tj = json::parse(trailer);
    Checkpoint ckpt{std::move(params), std::move(opt), pipeline::NormStats::from_json(tj.at("norm_2d")),
                    pipeline::NormStats::from_json(tj.at("norm_3d")),
                    skeleton::SkeletonSpec::from_json(tj.at("skeleton")), tj.at("train_state")};
    require(ckpt.stats_2d.dim() == c.input_dim && ckpt.stats_3d.dim() == c.output_dim, ErrorCode::kFormat,
            "checkpoint norm stats do not match model dims");
    require((ckpt.skeleton.n_joints() - 1) * 2 == c.input_dim, ErrorCode::kFormat,
            "checkpoint skeleton does not match model dims");
    return ckpt;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("checkpoint trailer: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const std::string bytes = encode_checkpoint(ckpt);
  // Write to a sibling then rename so readers never observe a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::kIo, "cannot write checkpoint '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorCode::kIo, "write failed for checkpoint '" + path + "'");
  }
  require(std::rename(tmp.c_str(), path.c_str()) == 0, ErrorCode::kIo,
          "cannot move checkpoint into place at '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path, std::optional<ExpectedDims> expected) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open checkpoint '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Checkpoint ckpt = decode_checkpoint(bytes);
  if (expected) {
    const auto& c = ckpt.params.config;
    require(c.input_dim == expected->input_dim && c.output_dim == expected->output_dim,
            ErrorCode::kShapeMismatch,
            "checkpoint dims (" + std::to_string(c.input_dim) + ", " + std::to_string(c.output_dim) +
                ") do not match requested (" + std::to_string(expected->input_dim) + ", " +
                std::to_string(expected->output_dim) + ")");
  }
  return ckpt;
}

}  // namespace poselift::model
