#include "mdm/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mdm {

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'D', 'M', '1'};

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw std::runtime_error("checkpoint: truncated");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

void put_u64(std::ostream& out, std::uint64_t v) { put_le(out, v); }
std::uint64_t get_u64(std::istream& in) { return get_le<std::uint64_t>(in); }

void put_matrix(std::ostream& out, const MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_le(out, std::bit_cast<std::uint64_t>(m(i, j)));
}

void get_matrix(std::istream& in, MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = std::bit_cast<double>(get_u64(in));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void save_embeddings(std::ostream& out, const RelationEmbeddings<double>& rel,
                     const EncoderParams<double>& enc) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(rel.rows.rows()));
  put_u64(out, static_cast<std::uint64_t>(rel.rows.cols()));
  put_matrix(out, rel.rows);
  put_matrix(out, enc.table);
  put_matrix(out, enc.wx);
  put_matrix(out, enc.wh);
  put_matrix(out, enc.b);
}

void save_checkpoint(std::ostream& out, const MdmParams<double>& p) {
  save_embeddings(out, p.relations, p.encoder);
  const MdmHyper& h = p.hyper;
  for (int v : {h.dim, h.window, h.depth_r, h.depth_e, static_cast<int>(h.window_mode),
                static_cast<int>(h.relation_sum), static_cast<int>(h.components)})
    put_u64(out, static_cast<std::uint64_t>(v));

  std::uint64_t count = 0;
  for_each_tensor(p, [&](const std::string&, TensorGroup g, const MatrixXd&) {
    if (g == TensorGroup::kModel) ++count;
  });
  put_u64(out, count);
  for_each_tensor(p, [&](const std::string& name, TensorGroup g, const MatrixXd& m) {
    if (g != TensorGroup::kModel) return;
    put_le(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    put_matrix(out, m);
  });
}

void save_checkpoint(const std::filesystem::path& path, const MdmParams<double>& params) {
  auto out = open_out(path);
  save_checkpoint(out, params);
}

void save_embeddings(const std::filesystem::path& path, const RelationEmbeddings<double>& rel,
                     const EncoderParams<double>& enc) {
  auto out = open_out(path);
  save_embeddings(out, rel, enc);
}

Checkpoint load_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error("checkpoint: bad magic");
  const auto M = static_cast<int>(get_u64(in));
  const auto d = static_cast<int>(get_u64(in));
  if (M < 1 || d < 1 || M > 1 << 16 || d > 1 << 16) throw std::runtime_error("checkpoint: bad shape");

  Checkpoint ck{RelationEmbeddings<double>::zeros(M, d), EncoderParams<double>::zeros(M, d), {}};
  get_matrix(in, ck.relations.rows);
  get_matrix(in, ck.encoder.table);
  get_matrix(in, ck.encoder.wx);
  get_matrix(in, ck.encoder.wh);
  get_matrix(in, ck.encoder.b);

  if (in.peek() == std::char_traits<char>::eof()) return ck;

  MdmHyper h;
  h.relations = M;
  h.dim = static_cast<int>(get_u64(in));
  h.window = static_cast<int>(get_u64(in));
  h.depth_r = static_cast<int>(get_u64(in));
  h.depth_e = static_cast<int>(get_u64(in));
  h.window_mode = static_cast<WindowMode>(get_u64(in));
  h.relation_sum = static_cast<RelationSum>(get_u64(in));
  h.components = static_cast<Components>(get_u64(in));
  if (h.dim != d) throw std::runtime_error("checkpoint: model dimension disagrees with embeddings");
  if (h.window < 1 || h.window > 1 << 16 || h.depth_r < 0 || h.depth_r > 1024 || h.depth_e < 0 ||
      h.depth_e > 1024 || static_cast<int>(h.window_mode) > 1 ||
      static_cast<int>(h.relation_sum) > 1 || static_cast<int>(h.components) > 3)
    throw std::runtime_error("checkpoint: bad hyperparameters");

  MdmParams<double> p = MdmParams<double>::zeros(h);
  p.relations = ck.relations;
  p.encoder = ck.encoder;
  std::uint64_t count = get_u64(in);
  std::uint64_t seen = 0;
  std::string error;
  for_each_tensor(p, [&](const std::string& name, TensorGroup g, MatrixXd& m) {
    if (g != TensorGroup::kModel || !error.empty()) return;
    ++seen;
    const auto len = get_le<std::uint32_t>(in);
    if (len > 256) {
      error = "checkpoint: bad tensor name";
      return;
    }
    std::string got(len, '\0');
    if (!in.read(got.data(), len)) throw std::runtime_error("checkpoint: truncated");
    const auto rows = get_u64(in);
    const auto cols = get_u64(in);
    if (got != name || rows != static_cast<std::uint64_t>(m.rows()) ||
        cols != static_cast<std::uint64_t>(m.cols())) {
      error = "checkpoint: unexpected tensor " + got + " (wanted " + name + ")";
      return;
    }
    get_matrix(in, m);
  });
  if (!error.empty()) throw std::runtime_error(error);
  if (seen != count) throw std::runtime_error("checkpoint: tensor count mismatch");
  ck.model = std::move(p);
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load_checkpoint(in);
}

}  // namespace mdm
