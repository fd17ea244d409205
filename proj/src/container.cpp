#include "cpd/container.hpp"

#include <string>

#include "cpd/error.hpp"

namespace cpd {

namespace {

void put_header(ByteWriter& w, ContainerKind kind) {
  w.raw("CPDC");
  w.u16(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(kind));
  w.u8(0);
}

ByteReader open_body(std::span<const std::uint8_t> bytes, ContainerKind expected) {
  const ContainerKind kind = peek_container_kind(bytes);
  if (kind != expected)
    fail(Errc::bad_kind, "container holds kind " + std::to_string(static_cast<int>(kind)) +
                             ", expected " + std::to_string(static_cast<int>(expected)));
  ByteReader r(bytes);
  r.raw(8);
  return r;
}

void finish(const ByteReader& r) {
  if (r.remaining() != 0)
    fail(Errc::structural, "container has " + std::to_string(r.remaining()) + " trailing bytes");
}

std::uint32_t dim32(Eigen::Index n) {
  if (n < 0 || static_cast<std::uint64_t>(n) > 0xffffffffULL)
    fail(Errc::dim_overflow, "dimension does not fit the container format");
  return static_cast<std::uint32_t>(n);
}

// Rejects dimension products that the remaining bytes cannot possibly hold.
void check_room(const ByteReader& r, std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > (r.remaining() / 8) / a)
    fail(Errc::truncated, "container dimensions " + std::to_string(a) + "x" + std::to_string(b) +
                              " exceed the " + std::to_string(r.remaining()) + " bytes left");
}

void put_vector(ByteWriter& w, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.f64(v(i));
}

void put_matrix(ByteWriter& w, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
}

Vector get_vector(ByteReader& r, std::uint32_t n) {
  check_room(r, 1, n);
  Vector v(n);
  for (std::uint32_t i = 0; i < n; ++i) v(i) = r.f64();
  return v;
}

Matrix get_matrix(ByteReader& r, std::uint32_t rows, std::uint32_t cols) {
  check_room(r, rows, cols);
  Matrix m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = r.f64();
  return m;
}

void put_pca(ByteWriter& w, const PcaModel& m) {
  w.u32(dim32(m.basis.rows()));
  w.u32(dim32(m.basis.cols()));
  put_vector(w, m.mean);
  put_matrix(w, m.basis);
  put_vector(w, m.eigenvalues);
}

PcaModel get_pca(ByteReader& r) {
  PcaModel m;
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  m.mean = get_vector(r, n);
  m.basis = get_matrix(r, n, d);
  m.eigenvalues = get_vector(r, d);
  return m;
}

void put_gmm(ByteWriter& w, const GmmModel& m) {
  w.u32(dim32(m.means.rows()));
  w.u32(dim32(m.means.cols()));
  put_vector(w, m.weights);
  put_matrix(w, m.means);
  put_matrix(w, m.variances);
}

GmmModel get_gmm(ByteReader& r) {
  GmmModel m;
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  m.weights = get_vector(r, k);
  m.means = get_matrix(r, k, d);
  m.variances = get_matrix(r, k, d);
  for (Eigen::Index i = 0; i < m.variances.size(); ++i) {
    if (!(m.variances.data()[i] > 0.0)) fail(Errc::structural, "GMM variance must be positive");
  }
  return m;
}

void put_kmeans(ByteWriter& w, const KmeansModel& m) {
  w.u32(dim32(m.centroids.rows()));
  w.u32(dim32(m.centroids.cols()));
  put_matrix(w, m.centroids);
}

KmeansModel get_kmeans(ByteReader& r) {
  KmeansModel m;
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  m.centroids = get_matrix(r, k, d);
  return m;
}

}  // namespace

ContainerKind peek_container_kind(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::string(bytes.begin(), bytes.begin() + 4) != "CPDC")
    fail(Errc::bad_magic, "not a CPDC container");
  ByteReader r(bytes);
  r.raw(4);
  const std::uint16_t version = r.u16();
  if (version != kContainerVersion)
    fail(Errc::bad_version, "unsupported container version " + std::to_string(version));
  const std::uint8_t kind = r.u8();
  r.u8();
  if (kind < 1 || kind > 7) fail(Errc::bad_kind, "unknown container kind " + std::to_string(kind));
  return static_cast<ContainerKind>(kind);
}

std::vector<std::uint8_t> encode_container(const PcaModel& m) {
  ByteWriter w;
  put_header(w, ContainerKind::pca);
  put_pca(w, m);
  return w.take();
}

std::vector<std::uint8_t> encode_container(const GmmModel& m) {
  ByteWriter w;
  put_header(w, ContainerKind::gmm);
  put_gmm(w, m);
  return w.take();
}

std::vector<std::uint8_t> encode_container(const KmeansModel& m) {
  ByteWriter w;
  put_header(w, ContainerKind::kmeans);
  put_kmeans(w, m);
  return w.take();
}

std::vector<std::uint8_t> encode_container(const LinearSvmModel& m) {
  ByteWriter w;
  put_header(w, ContainerKind::svm);
  w.u32(dim32(m.weights.rows()));
  w.u32(dim32(m.weights.cols()));
  for (int label : m.classes) w.i32(label);
  w.f64(m.c);
  put_matrix(w, m.weights);
  put_vector(w, m.bias);
  return w.take();
}

std::vector<std::uint8_t> encode_container(const Matrix& m) {
  ByteWriter w;
  put_header(w, ContainerKind::matrix);
  w.u32(dim32(m.rows()));
  w.u32(dim32(m.cols()));
  put_matrix(w, m);
  return w.take();
}

std::vector<std::uint8_t> encode_container(const ScoreMatrix& m) {
  ByteWriter w;
  put_header(w, ContainerKind::scores);
  w.u32(dim32(m.scores.rows()));
  w.u32(dim32(m.scores.cols()));
  for (int label : m.classes) w.i32(label);
  w.u32(static_cast<std::uint32_t>(m.provenance.size()));
  w.raw(m.provenance);
  put_matrix(w, m.scores);
  return w.take();
}

std::vector<std::uint8_t> encode_container(const Codebook& m) {
  ByteWriter w;
  put_header(w, ContainerKind::codebook);
  w.u8(static_cast<std::uint8_t>(m.encoder));
  put_pca(w, m.pca);
  if (m.encoder == Encoder::fv)
    put_gmm(w, std::get<GmmModel>(m.mixture));
  else
    put_kmeans(w, std::get<KmeansModel>(m.mixture));
  return w.take();
}

PcaModel decode_pca(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::pca);
  PcaModel m = get_pca(r);
  finish(r);
  return m;
}

GmmModel decode_gmm(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::gmm);
  GmmModel m = get_gmm(r);
  finish(r);
  return m;
}

KmeansModel decode_kmeans(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::kmeans);
  KmeansModel m = get_kmeans(r);
  finish(r);
  return m;
}

LinearSvmModel decode_svm(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::svm);
  LinearSvmModel m;
  const std::uint32_t classes = r.u32();
  const std::uint32_t dim = r.u32();
  check_room(r, 1, classes);
  for (std::uint32_t i = 0; i < classes; ++i) m.classes.push_back(r.i32());
  m.c = r.f64();
  m.weights = get_matrix(r, classes, dim);
  m.bias = get_vector(r, classes);
  finish(r);
  return m;
}

Matrix decode_matrix(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::matrix);
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  Matrix m = get_matrix(r, rows, cols);
  finish(r);
  return m;
}

ScoreMatrix decode_scores(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::scores);
  ScoreMatrix m;
  const std::uint32_t rows = r.u32();
  const std::uint32_t classes = r.u32();
  check_room(r, 1, classes);
  for (std::uint32_t i = 0; i < classes; ++i) m.classes.push_back(r.i32());
  const std::uint32_t len = r.u32();
  m.provenance = r.raw(len);
  m.scores = get_matrix(r, rows, classes);
  finish(r);
  return m;
}

Codebook decode_codebook(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_body(bytes, ContainerKind::codebook);
  Codebook m;
  const std::uint8_t enc = r.u8();
  if (enc > 1) fail(Errc::bad_kind, "unknown codebook encoder " + std::to_string(enc));
  m.encoder = static_cast<Encoder>(enc);
  m.pca = get_pca(r);
  if (m.encoder == Encoder::fv)
    m.mixture = get_gmm(r);
  else
    m.mixture = get_kmeans(r);
  finish(r);
  const std::size_t mixture_dim = m.encoder == Encoder::fv ? std::get<GmmModel>(m.mixture).dim()
                                                           : std::get<KmeansModel>(m.mixture).dim();
  if (mixture_dim != m.pca.output_dim())
    fail(Errc::structural, "codebook mixture dimension does not match PCA output");
  return m;
}

namespace {

template <class F>
auto load_with(const std::filesystem::path& path, F decode) {
  const auto bytes = read_file(path);
  try {
    return decode(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace

Matrix load_matrix(const std::filesystem::path& path) {
  return load_with(path, [](const auto& b) { return decode_matrix(b); });
}
ScoreMatrix load_scores(const std::filesystem::path& path) {
  return load_with(path, [](const auto& b) { return decode_scores(b); });
}
LinearSvmModel load_svm(const std::filesystem::path& path) {
  return load_with(path, [](const auto& b) { return decode_svm(b); });
}
Codebook load_codebook(const std::filesystem::path& path) {
  return load_with(path, [](const auto& b) { return decode_codebook(b); });
}

}  // namespace cpd
