#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpd/encoding.hpp"
#include "cpd/svm.hpp"
#include "cpd/trajpool.hpp"

namespace cpd {

enum class FusionMode : std::uint8_t { sum, concat };
std::string_view to_string(FusionMode f);
FusionMode parse_fusion_mode(std::string_view text);

struct PipelineConfig {
  std::vector<std::string> layers{"conv3", "conv4", "conv5"};
  std::vector<NormMode> modes{NormMode::st, NormMode::ch};
  std::vector<DescriptorKind> kinds{DescriptorKind::tdd, DescriptorKind::cpd};
  Encoder encoder = Encoder::vlad;
  std::optional<std::size_t> pca_dim;   // unset: encoder default
  std::optional<std::size_t> clusters;  // unset: encoder default
  std::size_t codebook_sample = kCodebookSampleSize;
  CpdFormulation formulation = CpdFormulation::weighted;
  FusionMode fusion = FusionMode::sum;
  double svm_c = kDefaultSvmC;
  double svm_tolerance = 1e-4;
  std::size_t svm_max_epochs = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::filesystem::path corpus;
  std::filesystem::path output;

  EncoderParams encoder_params() const;
  // Throws Errc::config on an unusable configuration.
  void validate() const;
};

struct PipelineResult {
  std::vector<std::string> report;          // JSON records, one per line of report.jsonl
  std::map<std::string, double> accuracy;   // "tdd", "cpd", "tdd+cpd" and per-classifier names
  std::string summary;                      // the final summary record
  std::size_t eval_videos = 0;
};

// Normalize, weight, cross, pool, encode, classify, fuse. Writes
// representations/, models/, scores/, report.jsonl and predictions.tsv under
// config.output.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace cpd
