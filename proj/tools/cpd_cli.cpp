// Command-line front end for the cross-stream pooled descriptor pipeline.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cpd/binary_io.hpp"
#include "cpd/container.hpp"
#include "cpd/error.hpp"
#include "cpd/pgm.hpp"
#include "cpd/pipeline.hpp"
#include "cpd/synth.hpp"
#include "cpd/tensor_file.hpp"
#include "cpd/trajectory_file.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void emit(const json& j) { std::cout << j.dump() << std::endl; }

json shape_json(const cpd::Shape& s) { return json::array({s.width, s.height, s.channels, s.frames}); }

std::vector<int> load_labels(const fs::path& path) {
  std::istringstream in(cpd::read_text_file(path));
  std::vector<int> labels;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      labels.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      cpd::fail(cpd::Errc::parse, path.string() + ": label '" + token + "' is not an integer");
    }
  }
  return labels;
}

cpd::NormalizedMap load_normalized(const fs::path& path, cpd::NormMode mode) {
  cpd::TensorRecord rec = cpd::load_tensor_record(path);
  return cpd::NormalizedMap(std::move(rec.values), rec.stream, mode, rec.video);
}

cpd::WeightMap load_weights(const fs::path& path, cpd::NormMode mode, std::size_t channels) {
  cpd::TensorRecord rec = cpd::load_tensor_record(path);
  return cpd::WeightMap(std::move(rec.values), rec.stream, mode, rec.video, channels);
}

cpd::Matrix descriptor_matrix(const std::vector<cpd::PooledDescriptor>& descs, std::size_t dim) {
  cpd::Matrix m(static_cast<Eigen::Index>(descs.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < descs.size(); ++i)
    for (std::size_t n = 0; n < dim; ++n)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = descs[i].values[n];
  return m;
}

template <class E, class Parse>
std::vector<E> parse_list(const std::vector<std::string>& items, Parse parse) {
  std::vector<E> out;
  for (const std::string& s : items) out.push_back(parse(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-stream pooled descriptors: pooling, encoding, classification and fusion"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read flags from an INI/TOML file; command-line flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  // normalize
  std::string in_path, out_path, mode_text = "st", weights_path, traj_path, kind_text = "tdd";
  bool allow_same = false;
  auto* normalize = app.add_subcommand("normalize", "Spatiotemporal (st) or channel (ch) normalization");
  normalize->add_option("-i,--input", in_path, "Raw feature map (.cpdt)")->required();
  normalize->add_option("-o,--output", out_path, "Normalized map (.cpdt)")->required();
  normalize->add_option("--mode", mode_text, "st | ch")->check(CLI::IsMember({"st", "ch"}));

  auto* weightmap = app.add_subcommand("weightmap", "Channel-summed weight map of a normalized map");
  weightmap->add_option("-i,--input", in_path, "Normalized map (.cpdt)")->required();
  weightmap->add_option("-o,--output", out_path, "Weight map (.cpdt, one channel)")->required();
  weightmap->add_option("--mode", mode_text, "Norm mode of the input")->check(CLI::IsMember({"st", "ch"}));

  auto* cross = app.add_subcommand("cross", "Weight a normalized map by the other stream's weight map");
  cross->add_option("-i,--input", in_path, "Normalized map (.cpdt)")->required();
  cross->add_option("-w,--weights", weights_path, "Weight map of the other stream")->required();
  cross->add_option("-o,--output", out_path, "Cross-stream map (.cpdt)")->required();
  cross->add_option("--mode", mode_text, "Norm mode of the input")->check(CLI::IsMember({"st", "ch"}));
  cross->add_flag("--allow-same-stream", allow_same, "Ablation: permit same-stream weighting");

  auto* pool = app.add_subcommand("pool", "Pool a map along trajectories");
  pool->add_option("-t,--trajectories", traj_path, "Trajectory file")->required();
  pool->add_option("-m,--map", in_path, "Normalized map (tdd, weighted cpd) or cross map (direct cpd)")->required();
  pool->add_option("-w,--weights", weights_path, "Other stream's weight map; selects weighted cpd");
  pool->add_option("--kind", kind_text, "tdd | cpd")->check(CLI::IsMember({"tdd", "cpd"}));
  pool->add_option("--mode", mode_text, "Norm mode of the map")->check(CLI::IsMember({"st", "ch"}));
  pool->add_flag("--allow-same-stream", allow_same, "Ablation: permit same-stream weighting");
  pool->add_option("-o,--output", out_path, "Descriptor matrix (.cpdc)")->required();

  std::vector<std::string> inputs;
  std::string encoder_text = "vlad";
  std::optional<std::size_t> pca_dim, clusters;
  std::size_t sample = cpd::kCodebookSampleSize;
  std::uint64_t seed = 1;
  auto* fit = app.add_subcommand("fit-codebook", "Fit PCA plus GMM (fv) or k-means (vlad)");
  fit->add_option("-d,--descriptors", inputs, "Descriptor matrices (.cpdc)")->required();
  fit->add_option("--encoder", encoder_text, "fv | vlad")->check(CLI::IsMember({"fv", "vlad"}));
  fit->add_option("--pca-dim", pca_dim, "PCA dimension (default 64 for fv, 128 for vlad)");
  fit->add_option("--clusters", clusters, "Mixtures / clusters (default 128 for fv, 64 for vlad)");
  fit->add_option("--sample", sample, "Maximum training descriptors");
  fit->add_option("--seed", seed, "Random seed")->envname("CPD_SEED");
  fit->add_option("-o,--output", out_path, "Codebook (.cpdc)")->required();

  std::string codebook_path;
  auto* encode = app.add_subcommand("encode", "Encode one descriptor matrix per video");
  encode->add_option("-c,--codebook", codebook_path, "Codebook (.cpdc)")->required();
  encode->add_option("-d,--descriptors", inputs, "Descriptor matrices, one per video")->required();
  encode->add_option("-o,--output", out_path, "Representation matrix (.cpdc)")->required();

  std::string reps_path, labels_path, model_path, provenance;
  double c_reg = cpd::kDefaultSvmC, tolerance = 1e-4;
  std::size_t max_epochs = 1000;
  auto* train = app.add_subcommand("train", "Train a one-vs-rest linear SVM");
  train->add_option("-r,--reps", reps_path, "Representation matrix (.cpdc)")->required();
  train->add_option("-l,--labels", labels_path, "Whitespace-separated integer labels")->required();
  train->add_option("--c", c_reg, "Regularization parameter");
  train->add_option("--tolerance", tolerance, "Dual coordinate descent stopping tolerance");
  train->add_option("--max-epochs", max_epochs, "Epoch limit");
  train->add_option("--seed", seed, "Random seed")->envname("CPD_SEED");
  train->add_option("-o,--output", out_path, "SVM model (.cpdc)")->required();

  auto* score = app.add_subcommand("score", "Raw SVM decision values");
  score->add_option("-m,--model", model_path, "SVM model (.cpdc)")->required();
  score->add_option("-r,--reps", reps_path, "Representation matrix (.cpdc)")->required();
  score->add_option("--provenance", provenance, "Tag stored with the scores");
  score->add_option("-o,--output", out_path, "Score matrix (.cpdc)")->required();

  auto* fuse = app.add_subcommand("fuse", "Sum score matrices");
  fuse->add_option("-i,--inputs", inputs, "Score matrices (.cpdc)")->required();
  fuse->add_option("-l,--labels", labels_path, "Labels for an accuracy report");
  fuse->add_option("-o,--output", out_path, "Fused score matrix (.cpdc)")->required();

  cpd::PipelineConfig pc;
  std::string corpus, pipeline_out;
  std::vector<std::string> layers = pc.layers, modes{"st", "ch"}, kinds{"tdd", "cpd"};
  std::string formulation = "weighted", fusion = "sum";
  auto* pipeline = app.add_subcommand("pipeline", "Run the full pipeline over a corpus");
  pipeline->add_option("--corpus", corpus, "Corpus directory with manifest.txt")->required();
  pipeline->add_option("--out", pipeline_out, "Output directory")->required();
  pipeline->add_option("--layers", layers, "Layer names")->delimiter(',');
  pipeline->add_option("--modes", modes, "Norm modes")->delimiter(',')->check(CLI::IsMember({"st", "ch"}));
  pipeline->add_option("--kinds", kinds, "Descriptor kinds")->delimiter(',')->check(CLI::IsMember({"tdd", "cpd"}));
  pipeline->add_option("--encoder", encoder_text, "fv | vlad")->check(CLI::IsMember({"fv", "vlad"}));
  pipeline->add_option("--pca-dim", pca_dim, "PCA dimension (default 64 for fv, 128 for vlad)");
  pipeline->add_option("--clusters", clusters, "Mixtures / clusters (default 128 for fv, 64 for vlad)");
  pipeline->add_option("--codebook-sample", pc.codebook_sample, "Maximum codebook training descriptors");
  pipeline->add_option("--formulation", formulation, "CPD route: weighted | direct")
      ->check(CLI::IsMember({"weighted", "direct"}));
  pipeline->add_option("--fusion", fusion, "sum | concat")->check(CLI::IsMember({"sum", "concat"}));
  pipeline->add_option("--c", pc.svm_c, "SVM regularization parameter");
  pipeline->add_option("--svm-tolerance", pc.svm_tolerance, "SVM stopping tolerance");
  pipeline->add_option("--svm-max-epochs", pc.svm_max_epochs, "SVM epoch limit");
  pipeline->add_option("--threads", pc.threads, "Worker threads");
  pipeline->add_option("--seed", seed, "Random seed")->envname("CPD_SEED");

  cpd::SynthSpec ss;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
  synth->add_option("-o,--output", synth_out, "Corpus directory")->required();
  synth->add_option("--seed", seed, "Random seed")->envname("CPD_SEED");
  synth->add_option("--classes", ss.classes, "Number of classes");
  synth->add_option("--train-per-class", ss.train_per_class, "Training videos per class");
  synth->add_option("--test-per-class", ss.test_per_class, "Test videos per class");
  synth->add_option("--frames", ss.frames, "Frames per video");
  synth->add_option("--trajectories", ss.trajectories, "Trajectories per video");
  synth->add_option("--trajectory-length", ss.trajectory_length, "Points per trajectory");
  synth->add_option("--hotspot-share", ss.hotspot_share, "Fraction of trajectories on the hotspot");
  synth->add_option("--clutter-blobs", ss.clutter_blobs, "Static distractor blobs per video");
  synth->add_option("--noise-density", ss.noise_density, "Probability a value carries background noise");
  synth->add_option("--noise-level", ss.noise_level, "Maximum background noise activation");
  synth->add_option("--shake-level", ss.shake_level, "Peak per-frame camera-shake motion");
  synth->add_option("--motion-class-share", ss.motion_class_share,
                    "Class-specific part of the hotspot motion pattern");

  std::size_t frame = 0;
  auto* export_wm = app.add_subcommand("export-wm", "Write one weight-map frame as a PGM image");
  export_wm->add_option("-i,--input", in_path, "Weight map (.cpdt)")->required();
  export_wm->add_option("--frame", frame, "Frame index");
  export_wm->add_option("-o,--output", out_path, "Image (.pgm)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const bool config_error = dynamic_cast<const CLI::ConfigError*>(&e) != nullptr;
    const cpd::Errc code = config_error ? cpd::Errc::config : cpd::Errc::usage;
    json err{{"error", cpd::errc_name(code)}, {"code", static_cast<int>(code)}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return static_cast<int>(code);
  }

  try {
    const cpd::NormMode mode = cpd::parse_norm_mode(mode_text);
    if (*normalize) {
      const cpd::FeatureMap map = cpd::load_tensor(in_path);
      const cpd::NormalizedMap n = cpd::normalize(map, mode);
      cpd::save_tensor(n.values(), n.stream(), n.video(), out_path);
      emit({{"command", "normalize"}, {"output", out_path}, {"mode", mode_text},
            {"stream", cpd::to_string(n.stream())}, {"shape", shape_json(n.shape())}});
    } else if (*weightmap) {
      const cpd::NormalizedMap n = load_normalized(in_path, mode);
      const cpd::WeightMap w = cpd::weight_map(n);
      cpd::save_tensor(w.values(), w.source(), w.video(), out_path);
      emit({{"command", "weightmap"}, {"output", out_path}, {"source", cpd::to_string(w.source())},
            {"shape", shape_json(w.shape())}});
    } else if (*cross) {
      const cpd::NormalizedMap n = load_normalized(in_path, mode);
      const cpd::WeightMap w = load_weights(weights_path, mode, n.shape().channels);
      const cpd::CrossStreamMap d = cpd::cross_stream(n, w, {allow_same});
      cpd::save_tensor(d.values(), d.weighted(), d.video(), out_path);
      emit({{"command", "cross"}, {"output", out_path}, {"weighted", cpd::to_string(d.weighted())},
            {"weighting", cpd::to_string(d.weighting())}, {"shape", shape_json(d.shape())}});
    } else if (*pool) {
      const cpd::TrajectorySet trajs = cpd::load_trajectories(traj_path);
      const cpd::DescriptorKind kind = cpd::parse_descriptor_kind(kind_text);
      cpd::TensorRecord rec = cpd::load_tensor_record(in_path);
      if (rec.values.shape().frames != trajs.dims().frames)
        cpd::fail(cpd::Errc::structural, "map has " + std::to_string(rec.values.shape().frames) +
                                             " frames but the video has " +
                                             std::to_string(trajs.dims().frames));
      const std::size_t channels = rec.values.shape().channels;
      std::vector<cpd::PooledDescriptor> descs;
      std::string route = "tdd";
      if (kind == cpd::DescriptorKind::tdd) {
        const cpd::NormalizedMap n(std::move(rec.values), rec.stream, mode, rec.video);
        for (const auto& t : trajs.trajectories()) descs.push_back(cpd::pool_tdd(t, n, trajs.dims()));
      } else if (!weights_path.empty()) {
        route = "weighted";
        const cpd::NormalizedMap n(std::move(rec.values), rec.stream, mode, rec.video);
        const cpd::WeightMap w = load_weights(weights_path, mode, channels);
        for (const auto& t : trajs.trajectories())
          descs.push_back(cpd::pool_cpd_weighted(t, n, w, trajs.dims(), {allow_same}));
      } else {
        route = "direct";
        const cpd::CrossStreamMap d(std::move(rec.values), rec.stream, cpd::complement(rec.stream),
                                    mode, rec.video);
        for (const auto& t : trajs.trajectories()) descs.push_back(cpd::pool_cpd_direct(t, d, trajs.dims()));
      }
      cpd::save_container(descriptor_matrix(descs, channels), out_path);
      emit({{"command", "pool"}, {"output", out_path}, {"kind", kind_text}, {"route", route},
            {"trajectories", descs.size()}, {"dim", channels}});
    } else if (*fit) {
      std::vector<cpd::Matrix> parts;
      Eigen::Index rows = 0;
      for (const auto& p : inputs) {
        parts.push_back(cpd::load_matrix(p));
        rows += parts.back().rows();
        if (parts.back().cols() != parts.front().cols())
          cpd::fail(cpd::Errc::structural, p + ": descriptor dimension differs from " + inputs.front());
      }
      cpd::Matrix all(rows, parts.front().cols());
      Eigen::Index at = 0;
      for (const auto& m : parts) {
        all.middleRows(at, m.rows()) = m;
        at += m.rows();
      }
      cpd::CodebookParams cp;
      cp.encoder = cpd::parse_encoder(encoder_text);
      const cpd::EncoderParams defaults = cpd::default_params(cp.encoder);
      cp.pca_dim = pca_dim.value_or(defaults.pca_dim);
      cp.clusters = clusters.value_or(defaults.clusters);
      cp.seed = seed;
      cp.max_sample = sample;
      const cpd::Codebook cb = cpd::fit_codebook(all, cp);
      cpd::save_container(cb, out_path);
      emit({{"command", "fit-codebook"}, {"output", out_path}, {"encoder", encoder_text},
            {"pca_dim", cp.pca_dim}, {"clusters", cp.clusters}, {"encoded_dim", cb.encoded_dim()}});
    } else if (*encode) {
      const cpd::Codebook cb = cpd::load_codebook(codebook_path);
      cpd::Matrix reps(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(cb.encoded_dim()));
      for (std::size_t i = 0; i < inputs.size(); ++i)
        reps.row(static_cast<Eigen::Index>(i)) = cpd::encode_video(cb, cpd::load_matrix(inputs[i])).transpose();
      cpd::save_container(reps, out_path);
      emit({{"command", "encode"}, {"output", out_path}, {"videos", inputs.size()}, {"dim", cb.encoded_dim()}});
    } else if (*train) {
      const cpd::Matrix reps = cpd::load_matrix(reps_path);
      const std::vector<int> labels = load_labels(labels_path);
      cpd::SvmOptions o;
      o.c = c_reg;
      o.tolerance = tolerance;
      o.max_epochs = max_epochs;
      o.seed = seed;
      const cpd::LinearSvmModel m = cpd::svm_train(reps, labels, o);
      cpd::save_container(m, out_path);
      const cpd::ScoreMatrix s = cpd::svm_score(m, reps);
      emit({{"command", "train"}, {"output", out_path}, {"classes", m.classes.size()},
            {"dim", m.dim()}, {"training_accuracy", cpd::accuracy(cpd::predict(s), labels)}});
    } else if (*score) {
      const cpd::LinearSvmModel m = cpd::load_svm(model_path);
      const cpd::ScoreMatrix s = cpd::svm_score(m, cpd::load_matrix(reps_path), provenance);
      cpd::save_container(s, out_path);
      emit({{"command", "score"}, {"output", out_path}, {"videos", s.scores.rows()},
            {"classes", s.classes.size()}});
    } else if (*fuse) {
      std::vector<cpd::ScoreMatrix> parts;
      for (const auto& p : inputs) parts.push_back(cpd::load_scores(p));
      const cpd::ScoreMatrix f = cpd::fuse_scores(parts);
      cpd::save_container(f, out_path);
      json j{{"command", "fuse"}, {"output", out_path}, {"inputs", inputs.size()}};
      if (!labels_path.empty()) j["accuracy"] = cpd::accuracy(cpd::predict(f), load_labels(labels_path));
      emit(j);
    } else if (*pipeline) {
      pc.corpus = corpus;
      pc.output = pipeline_out;
      pc.layers = layers;
      pc.modes = parse_list<cpd::NormMode>(modes, [](const std::string& s) { return cpd::parse_norm_mode(s); });
      pc.kinds = parse_list<cpd::DescriptorKind>(kinds, [](const std::string& s) { return cpd::parse_descriptor_kind(s); });
      pc.encoder = cpd::parse_encoder(encoder_text);
      pc.pca_dim = pca_dim;
      pc.clusters = clusters;
      pc.formulation = formulation == "direct" ? cpd::CpdFormulation::direct : cpd::CpdFormulation::weighted;
      pc.fusion = cpd::parse_fusion_mode(fusion);
      pc.seed = seed;
      const cpd::PipelineResult r = cpd::run_pipeline(pc);
      std::cout << r.summary << std::endl;
    } else if (*synth) {
      const cpd::SynthSummary s = cpd::generate_synthetic(ss, seed, synth_out);
      emit({{"command", "synth"}, {"output", synth_out}, {"videos", s.videos.size()}, {"files", s.files},
            {"classes", ss.classes}, {"seed", seed}});
    } else if (*export_wm) {
      cpd::TensorRecord rec = cpd::load_tensor_record(in_path);
      const std::size_t channels = rec.values.shape().channels;
      if (channels != 1) cpd::fail(cpd::Errc::structural, in_path + ": weight map must have one channel");
      const cpd::WeightMap w(std::move(rec.values), rec.stream, mode, rec.video, channels);
      cpd::export_weightmap_image(w, frame, out_path);
      emit({{"command", "export-wm"}, {"output", out_path}, {"frame", frame},
            {"width", w.shape().width}, {"height", w.shape().height}});
    }
  } catch (const cpd::Error& e) {
    json err{{"error", cpd::errc_name(e.code())}, {"code", static_cast<int>(e.code())}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return static_cast<int>(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    json err{{"error", "io"}, {"code", static_cast<int>(cpd::Errc::io)}, {"message", e.what()}};
    std::cerr << err.dump() << std::endl;
    return static_cast<int>(cpd::Errc::io);
  }
  return 0;
}
