#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "cpd/binary_io.hpp"
#include "cpd/container.hpp"
#include "cpd/error.hpp"
#include "cpd/pipeline.hpp"
#include "cpd/synth.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace cpd;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.classes = 3;
  s.train_per_class = 3;
  s.test_per_class = 2;
  s.video_width = 64;
  s.video_height = 48;
  s.frames = 8;
  s.layers = {{"c4", 8, 6, 8}, {"c5", 4, 3, 8}};
  s.trajectories = 20;
  s.trajectory_length = 6;
  return s;
}

PipelineConfig small_config(const fs::path& corpus, const fs::path& out) {
  PipelineConfig c;
  c.corpus = corpus;
  c.output = out;
  c.layers = {"c4", "c5"};
  c.pca_dim = 4;
  c.clusters = 3;
  return c;
}

}  // namespace

TEST_CASE("pipeline writes every block and a summary") {
  const fs::path root = support::scratch_dir("pipeline_small");
  const SynthSummary s = generate_synthetic(small_spec(), 5, root / "corpus");
  CHECK(s.videos.size() == 15);
  CHECK(s.files == 15 * 5);

  const PipelineResult r = run_pipeline(small_config(root / "corpus", root / "out"));
  std::set<std::string> blocks;
  std::size_t summaries = 0;
  for (const std::string& line : r.report) {
    const auto j = nlohmann::json::parse(line);
    if (j["record"] == "block") blocks.insert(j["block"].get<std::string>());
    if (j["record"] == "summary") ++summaries;
  }
  CHECK(blocks.size() == 2 * 2 * 2 * 2);
  CHECK(blocks.count("c5.tmp.ch.cpd") == 1);
  CHECK(summaries == 1);
  CHECK(r.eval_videos == 6);
  for (const char* k : {"tdd", "cpd", "tdd+cpd"}) {
    REQUIRE(r.accuracy.count(k) == 1);
    CHECK(r.accuracy.at(k) >= 0.0);
    CHECK(r.accuracy.at(k) <= 1.0);
  }

  const std::string report = read_text_file(root / "out" / "report.jsonl");
  CHECK(std::count(report.begin(), report.end(), '\n') == static_cast<long>(r.report.size()));
  CHECK(fs::exists(root / "out" / "predictions.tsv"));
  const Matrix rep = load_matrix(root / "out" / "representations" / "c4.sp.cpd.cpdc");
  CHECK(rep.rows() == 15);
  CHECK(rep.cols() == 2 * 3 * 4);
  const ScoreMatrix fused = load_scores(root / "out" / "scores" / "fused.tdd+cpd.cpdc");
  CHECK(fused.classes == std::vector<int>{0, 1, 2});
}

TEST_CASE("direct and weighted formulations give identical outputs") {
  const fs::path root = support::scratch_dir("pipeline_formulation");
  generate_synthetic(small_spec(), 9, root / "corpus");
  PipelineConfig a = small_config(root / "corpus", root / "weighted");
  PipelineConfig b = small_config(root / "corpus", root / "direct");
  b.formulation = CpdFormulation::direct;
  run_pipeline(a);
  run_pipeline(b);
  for (const auto& entry : fs::directory_iterator(root / "weighted" / "representations"))
    CHECK(read_file(entry.path()) ==
          read_file(root / "direct" / "representations" / entry.path().filename()));
}

TEST_CASE("concatenation fusion trains one classifier per group") {
  const fs::path root = support::scratch_dir("pipeline_concat");
  generate_synthetic(small_spec(), 3, root / "corpus");
  PipelineConfig c = small_config(root / "corpus", root / "out");
  c.fusion = FusionMode::concat;
  c.encoder = Encoder::fv;
  c.clusters = 2;
  const PipelineResult r = run_pipeline(c);
  std::size_t classifiers = 0;
  for (const std::string& line : r.report)
    classifiers += nlohmann::json::parse(line)["record"] == "classifier";
  CHECK(classifiers == 3);
  CHECK(r.accuracy.count("tdd+cpd") == 1);
}

TEST_CASE("pipeline configuration errors") {
  const fs::path root = support::scratch_dir("pipeline_errors");
  generate_synthetic(small_spec(), 1, root / "corpus");
  auto code = [&](PipelineConfig c) {
    try {
      run_pipeline(c);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::usage;
  };
  PipelineConfig c = small_config(root / "corpus", root / "out");
  c.layers.clear();
  CHECK(code(c) == Errc::config);
  c = small_config(root / "corpus", root / "out");
  c.kinds.clear();
  CHECK(code(c) == Errc::config);
  c = small_config(root / "corpus", root / "out");
  c.layers = {"c4", "missing"};
  CHECK(code(c) == Errc::io);
  c = small_config(root / "corpus", root / "out");
  c.pca_dim = 0;
  CHECK(code(c) == Errc::config);
  c = small_config(root / "nowhere", root / "out");
  CHECK(code(c) == Errc::io);
}
