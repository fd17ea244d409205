#include "cpd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <set>
#include <thread>

#include "cpd/binary_io.hpp"
#include "cpd/container.hpp"
#include "cpd/corpus.hpp"
#include "cpd/error.hpp"
#include "cpd/rng.hpp"
#include "cpd/tensor_file.hpp"
#include "cpd/trajectory_file.hpp"
#include "json.hpp"

namespace cpd {

std::string_view to_string(FusionMode f) { return f == FusionMode::sum ? "sum" : "concat"; }

FusionMode parse_fusion_mode(std::string_view text) {
  if (text == "sum") return FusionMode::sum;
  if (text == "concat") return FusionMode::concat;
  fail(Errc::parse, "unknown fusion mode '" + std::string(text) + "'");
}

EncoderParams PipelineConfig::encoder_params() const {
  EncoderParams p = default_params(encoder);
  if (pca_dim) p.pca_dim = *pca_dim;
  if (clusters) p.clusters = *clusters;
  return p;
}

void PipelineConfig::validate() const {
  if (layers.empty()) fail(Errc::config, "at least one layer is required");
  if (std::set<std::string>(layers.begin(), layers.end()).size() != layers.size())
    fail(Errc::config, "layer names must be unique");
  if (modes.empty()) fail(Errc::config, "at least one norm mode is required");
  if (kinds.empty()) fail(Errc::config, "at least one descriptor kind is required");
  const EncoderParams p = encoder_params();
  if (p.pca_dim == 0) fail(Errc::config, "PCA dimension must be >= 1");
  if (p.clusters == 0) fail(Errc::config, "cluster count must be >= 1");
  if (codebook_sample == 0) fail(Errc::config, "codebook sample size must be >= 1");
  if (!(svm_c > 0.0)) fail(Errc::config, "SVM C must be positive");
  if (!(svm_tolerance > 0.0)) fail(Errc::config, "SVM tolerance must be positive");
  if (svm_max_epochs == 0) fail(Errc::config, "SVM epoch limit must be >= 1");
  if (threads == 0) fail(Errc::config, "thread count must be >= 1");
  if (corpus.empty()) fail(Errc::config, "corpus directory is required");
  if (output.empty()) fail(Errc::config, "output directory is required");
}

namespace {

using json = nlohmann::ordered_json;

// Runs fn(0..n-1) on up to `threads` workers. Results must be written by index;
// the lowest-index failure is rethrown.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(threads, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Matrix to_matrix(const std::vector<PooledDescriptor>& descs, std::size_t dim) {
  Matrix m(static_cast<Eigen::Index>(descs.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < descs.size(); ++i)
    for (std::size_t n = 0; n < dim; ++n)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = descs[i].values[n];
  return m;
}

Matrix stack_rows(const std::vector<Matrix>& parts, const std::vector<std::size_t>& which) {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (std::size_t v : which) {
    rows += parts[v].rows();
    cols = parts[v].cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (std::size_t v : which) {
    out.middleRows(at, parts[v].rows()) = parts[v];
    at += parts[v].rows();
  }
  return out;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& which) {
  Matrix out(static_cast<Eigen::Index>(which.size()), m.cols());
  for (std::size_t i = 0; i < which.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(which[i]));
  return out;
}

Matrix hconcat(const std::vector<const Matrix*>& parts) {
  Eigen::Index cols = 0;
  for (const Matrix* p : parts) cols += p->cols();
  Matrix out(parts.front()->rows(), cols);
  Eigen::Index at = 0;
  for (const Matrix* p : parts) {
    out.middleCols(at, p->cols()) = *p;
    at += p->cols();
  }
  return out;
}

struct Classifier {
  std::string name;
  DescriptorKind kind = DescriptorKind::tdd;  // unused for concatenated groups
  Matrix reps;                                 // all videos x dim
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  const std::vector<VideoEntry> videos = load_manifest(config.corpus);
  const std::filesystem::path& out = config.output;

  // Canonical orders so outputs never depend on flag order.
  std::vector<NormMode> modes;
  for (NormMode m : {NormMode::st, NormMode::ch})
    if (std::find(config.modes.begin(), config.modes.end(), m) != config.modes.end()) modes.push_back(m);
  std::vector<DescriptorKind> kinds;
  for (DescriptorKind k : {DescriptorKind::tdd, DescriptorKind::cpd})
    if (std::find(config.kinds.begin(), config.kinds.end(), k) != config.kinds.end()) kinds.push_back(k);

  std::vector<BlockKey> keys;
  for (const std::string& layer : config.layers)
    for (Stream s : {Stream::spatial, Stream::temporal})
      for (NormMode m : modes)
        for (DescriptorKind k : kinds) keys.push_back({layer, s, m, k});
  const auto key_index = [&](const BlockKey& key) {
    return static_cast<std::size_t>(std::find(keys.begin(), keys.end(), key) - keys.begin());
  };

  std::vector<std::size_t> train_rows, test_rows;
  std::vector<int> labels;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    (videos[v].split == Split::train ? train_rows : test_rows).push_back(v);
    labels.push_back(videos[v].label);
  }
  if (train_rows.empty()) fail(Errc::input, "manifest has no training videos");
  const std::vector<std::size_t>& eval_rows = test_rows.empty() ? train_rows : test_rows;
  const std::string eval_split = test_rows.empty() ? "train" : "test";
  std::vector<int> train_labels, eval_labels;
  for (std::size_t v : train_rows) train_labels.push_back(labels[v]);
  for (std::size_t v : eval_rows) eval_labels.push_back(labels[v]);

  // Pool: descriptors[block][video] is trajectories x N.
  std::vector<std::vector<Matrix>> descriptors(keys.size(), std::vector<Matrix>(videos.size()));
  std::vector<std::size_t> block_dims(keys.size(), 0);
  PoolConfig pool_config{modes, kinds, config.formulation};
  parallel_for(videos.size(), config.threads, [&](std::size_t v) {
    const VideoEntry& video = videos[v];
    try {
      const TrajectorySet trajs = load_trajectories(trajectory_path(config.corpus, video));
      if (trajs.size() == 0) fail(Errc::input, "no trajectories");
      for (const std::string& layer : config.layers) {
        const FeatureMap sp = load_tensor(map_path(config.corpus, video, layer, "sp"));
        const FeatureMap tmp = load_tensor(map_path(config.corpus, video, layer, "tmp"));
        if (sp.shape().frames != trajs.dims().frames || tmp.shape().frames != trajs.dims().frames)
          fail(Errc::structural, "layer " + layer + " is not per-frame: map has " +
                                     std::to_string(sp.shape().frames) + " frames, video has " +
                                     std::to_string(trajs.dims().frames));
        const LayerMaps maps(layer, sp, tmp, modes);
        for (DescriptorSet& set : pool_all(trajs, maps, pool_config)) {
          const std::size_t b = key_index(set.key);
          descriptors[b][v] = to_matrix(set.descriptors, set.dim());
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), "video " + video.id + ": " + e.what());
    }
  });
  for (std::size_t b = 0; b < keys.size(); ++b) {
    block_dims[b] = static_cast<std::size_t>(descriptors[b][0].cols());
    for (const Matrix& m : descriptors[b])
      if (static_cast<std::size_t>(m.cols()) != block_dims[b])
        fail(Errc::structural, "block " + keys[b].name() + ": channel count differs between videos");
  }

  // Encode: one codebook per descriptor block, fitted on training videos only.
  const EncoderParams params = config.encoder_params();
  std::vector<Matrix> encoded(keys.size());
  std::vector<json> block_records(keys.size());
  parallel_for(keys.size(), config.threads, [&](std::size_t b) {
    const Matrix train = stack_rows(descriptors[b], train_rows);
    CodebookParams cp;
    cp.encoder = config.encoder;
    cp.pca_dim = std::min(params.pca_dim, block_dims[b]);
    cp.clusters = params.clusters;
    cp.seed = mix_seed(config.seed, b);
    cp.max_sample = config.codebook_sample;
    Codebook cb;
    try {
      cb = fit_codebook(train, cp);
    } catch (const Error& e) {
      throw Error(e.code(), "block " + keys[b].name() + ": " + e.what());
    }
    save_container(cb, out / "models" / (keys[b].name() + ".codebook.cpdc"));
    Matrix enc(static_cast<Eigen::Index>(videos.size()), static_cast<Eigen::Index>(cb.encoded_dim()));
    for (std::size_t v = 0; v < videos.size(); ++v)
      enc.row(static_cast<Eigen::Index>(v)) = encode_video(cb, descriptors[b][v]).transpose();
    encoded[b] = std::move(enc);

    std::size_t count = 0;
    for (const Matrix& m : descriptors[b]) count += static_cast<std::size_t>(m.rows());
    json rec;
    rec["record"] = "block";
    rec["block"] = keys[b].name();
    rec["layer"] = keys[b].layer;
    rec["stream"] = to_string(keys[b].stream);
    rec["norm"] = to_string(keys[b].mode);
    rec["kind"] = to_string(keys[b].kind);
    rec["descriptors"] = count;
    rec["descriptor_dim"] = block_dims[b];
    rec["codebook_sample"] = std::min<std::size_t>(static_cast<std::size_t>(train.rows()), cp.max_sample);
    rec["encoder"] = to_string(cp.encoder);
    rec["pca_dim"] = cp.pca_dim;
    rec["clusters"] = cp.clusters;
    rec["encoded_dim"] = cb.encoded_dim();
    block_records[b] = std::move(rec);
  });

  // Assemble per-layer representations: st block, then ch block.
  std::vector<Classifier> layer_reps;
  for (const std::string& layer : config.layers) {
    for (Stream s : {Stream::spatial, Stream::temporal}) {
      for (DescriptorKind k : kinds) {
        Classifier c;
        c.name = layer + "." + std::string(to_string(s)) + "." + std::string(to_string(k));
        c.kind = k;
        std::vector<const Matrix*> parts;
        for (NormMode m : modes) parts.push_back(&encoded[key_index({layer, s, m, k})]);
        if (parts.size() == 2) {
          c.reps.resize(static_cast<Eigen::Index>(videos.size()), parts[0]->cols() + parts[1]->cols());
          for (std::size_t v = 0; v < videos.size(); ++v) {
            const auto row = static_cast<Eigen::Index>(v);
            const VideoRepresentation rep =
                assemble_layer(parts[0]->row(row).transpose(), parts[1]->row(row).transpose());
            c.reps.row(row) = rep.values().transpose();
          }
        } else {
          c.reps = *parts[0];
        }
        save_container(c.reps, out / "representations" / (c.name + ".cpdc"));
        layer_reps.push_back(std::move(c));
      }
    }
  }

  // Classify. In sum mode every layer representation gets its own SVM and groups
  // are fused by summing scores; in concat mode each group is one SVM.
  struct Group {
    std::string name;
    std::vector<std::size_t> members;
  };
  std::vector<Group> groups;
  for (DescriptorKind k : kinds) {
    Group g{std::string(to_string(k)), {}};
    for (std::size_t i = 0; i < layer_reps.size(); ++i)
      if (layer_reps[i].kind == k) g.members.push_back(i);
    groups.push_back(std::move(g));
  }
  if (kinds.size() == 2) {
    Group all{"tdd+cpd", {}};
    for (std::size_t i = 0; i < layer_reps.size(); ++i) all.members.push_back(i);
    groups.push_back(std::move(all));
  }

  SvmOptions svm_options;
  svm_options.c = config.svm_c;
  svm_options.tolerance = config.svm_tolerance;
  svm_options.max_epochs = config.svm_max_epochs;

  PipelineResult result;
  result.eval_videos = eval_rows.size();
  const auto train_and_score = [&](const std::string& name, const Matrix& reps, std::size_t salt) {
    SvmOptions o = svm_options;
    o.seed = mix_seed(config.seed, 1000 + salt);
    const LinearSvmModel model = svm_train(select_rows(reps, train_rows), train_labels, o);
    save_container(model, out / "models" / (name + ".svm.cpdc"));
    ScoreMatrix scores = svm_score(model, reps, name);
    save_container(scores, out / "scores" / (name + ".cpdc"));
    return scores;
  };
  const auto eval_accuracy = [&](const ScoreMatrix& scores) {
    ScoreMatrix sub{select_rows(scores.scores, eval_rows), scores.classes, scores.provenance};
    return accuracy(predict(sub), eval_labels);
  };

  std::vector<json> classifier_records;
  std::vector<ScoreMatrix> fused;
  if (config.fusion == FusionMode::sum) {
    std::vector<ScoreMatrix> per_rep(layer_reps.size());
    parallel_for(layer_reps.size(), config.threads, [&](std::size_t i) {
      per_rep[i] = train_and_score(layer_reps[i].name, layer_reps[i].reps, i);
    });
    for (std::size_t i = 0; i < layer_reps.size(); ++i) {
      const double acc = eval_accuracy(per_rep[i]);
      result.accuracy[layer_reps[i].name] = acc;
      json rec;
      rec["record"] = "classifier";
      rec["name"] = layer_reps[i].name;
      rec["dim"] = layer_reps[i].reps.cols();
      rec["accuracy"] = acc;
      classifier_records.push_back(std::move(rec));
    }
    for (const Group& g : groups) {
      std::vector<ScoreMatrix> parts;
      for (std::size_t i : g.members) parts.push_back(per_rep[i]);
      fused.push_back(fuse_scores(parts, "fused." + g.name));
    }
  } else {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      const Group& g = groups[gi];
      std::vector<const Matrix*> parts;
      for (std::size_t i : g.members) parts.push_back(&layer_reps[i].reps);
      const Matrix reps = hconcat(parts);
      save_container(reps, out / "representations" / ("concat." + g.name + ".cpdc"));
      ScoreMatrix s = train_and_score("concat." + g.name, reps, 500 + gi);
      json rec;
      rec["record"] = "classifier";
      rec["name"] = "concat." + g.name;
      rec["dim"] = reps.cols();
      rec["accuracy"] = eval_accuracy(s);
      result.accuracy["concat." + g.name] = rec["accuracy"].get<double>();
      classifier_records.push_back(std::move(rec));
      s.provenance = "fused." + g.name;
      fused.push_back(std::move(s));
    }
  }

  json summary;
  summary["record"] = "summary";
  summary["videos"] = videos.size();
  summary["train_videos"] = train_rows.size();
  summary["eval_videos"] = eval_rows.size();
  summary["eval_split"] = eval_split;
  summary["classes"] = std::set<int>(labels.begin(), labels.end()).size();
  summary["encoder"] = to_string(config.encoder);
  summary["fusion"] = to_string(config.fusion);
  json fused_acc = json::object();
  std::vector<json> fused_records;
  std::vector<std::vector<int>> fused_predictions;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    save_container(fused[gi], out / "scores" / ("fused." + groups[gi].name + ".cpdc"));
    const double acc = eval_accuracy(fused[gi]);
    result.accuracy[groups[gi].name] = acc;
    fused_acc[groups[gi].name] = acc;
    json rec;
    rec["record"] = "fused";
    rec["name"] = groups[gi].name;
    json members = json::array();
    for (std::size_t i : groups[gi].members) members.push_back(layer_reps[i].name);
    rec["members"] = members;
    rec["accuracy"] = acc;
    fused_records.push_back(std::move(rec));
    fused_predictions.push_back(predict(fused[gi]));
  }
  summary["accuracy"] = fused_acc;

  for (const json& r : block_records) result.report.push_back(r.dump());
  for (const json& r : classifier_records) result.report.push_back(r.dump());
  for (const json& r : fused_records) result.report.push_back(r.dump());
  result.summary = summary.dump();
  result.report.push_back(result.summary);

  std::string report_text;
  for (const std::string& line : result.report) report_text += line + "\n";
  write_text_atomic(out / "report.jsonl", report_text);

  std::string pred = "video_id\tsplit\tlabel";
  for (const Group& g : groups) pred += "\t" + g.name;
  pred += "\n";
  for (std::size_t v = 0; v < videos.size(); ++v) {
    pred += videos[v].id + "\t" + std::string(to_string(videos[v].split)) + "\t" +
            std::to_string(videos[v].label);
    for (const auto& p : fused_predictions) pred += "\t" + std::to_string(p[v]);
    pred += "\n";
  }
  write_text_atomic(out / "predictions.tsv", pred);
  return result;
}

}  // namespace cpd
