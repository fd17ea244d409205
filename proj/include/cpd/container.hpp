#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cpd/binary_io.hpp"
#include "cpd/encoding.hpp"
#include "cpd/svm.hpp"

namespace cpd {

// "CPDC" | u16 version | u8 kind | u8 reserved, then a kind-specific body of
// u32 dimensions followed by little-endian IEEE-754 doubles. See docs/formats.md.
inline constexpr std::uint16_t kContainerVersion = 1;

enum class ContainerKind : std::uint8_t {
  pca = 1,
  gmm = 2,
  kmeans = 3,
  svm = 4,
  matrix = 5,
  scores = 6,
  codebook = 7,
};

ContainerKind peek_container_kind(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_container(const PcaModel& m);
std::vector<std::uint8_t> encode_container(const GmmModel& m);
std::vector<std::uint8_t> encode_container(const KmeansModel& m);
std::vector<std::uint8_t> encode_container(const LinearSvmModel& m);
std::vector<std::uint8_t> encode_container(const Matrix& m);
std::vector<std::uint8_t> encode_container(const ScoreMatrix& m);
std::vector<std::uint8_t> encode_container(const Codebook& m);

PcaModel decode_pca(std::span<const std::uint8_t> bytes);
GmmModel decode_gmm(std::span<const std::uint8_t> bytes);
KmeansModel decode_kmeans(std::span<const std::uint8_t> bytes);
LinearSvmModel decode_svm(std::span<const std::uint8_t> bytes);
Matrix decode_matrix(std::span<const std::uint8_t> bytes);
ScoreMatrix decode_scores(std::span<const std::uint8_t> bytes);
Codebook decode_codebook(std::span<const std::uint8_t> bytes);

template <class T>
void save_container(const T& value, const std::filesystem::path& path) {
  write_file_atomic(path, encode_container(value));
}

Matrix load_matrix(const std::filesystem::path& path);
ScoreMatrix load_scores(const std::filesystem::path& path);
LinearSvmModel load_svm(const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace cpd
