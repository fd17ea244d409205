#include "cpd/corpus.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include "cpd/binary_io.hpp"
#include "cpd/error.hpp"

namespace cpd {

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

std::vector<VideoEntry> parse_manifest(std::string_view text) {
  std::vector<VideoEntry> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string id, split, label, extra;
    if (!(fields >> id)) continue;
    const std::string where = "manifest line " + std::to_string(number);
    if (!(fields >> split >> label) || (fields >> extra))
      fail(Errc::parse, where + ": expected 'video_id split label'");
    VideoEntry v;
    v.id = id;
    if (split == "train")
      v.split = Split::train;
    else if (split == "test")
      v.split = Split::test;
    else
      fail(Errc::parse, where + ": split must be 'train' or 'test'");
    const auto res = std::from_chars(label.data(), label.data() + label.size(), v.label);
    if (res.ec != std::errc() || res.ptr != label.data() + label.size())
      fail(Errc::parse, where + ": label must be an integer");
    if (!seen.insert(v.id).second) fail(Errc::parse, where + ": duplicate video id " + v.id);
    out.push_back(std::move(v));
  }
  if (out.empty()) fail(Errc::input, "manifest lists no videos");
  return out;
}

std::string format_manifest(const std::vector<VideoEntry>& videos) {
  std::string out = "# video_id split label\n";
  for (const VideoEntry& v : videos)
    out += v.id + " " + std::string(to_string(v.split)) + " " + std::to_string(v.label) + "\n";
  return out;
}

std::vector<VideoEntry> load_manifest(const std::filesystem::path& corpus) {
  const auto path = corpus / kManifestName;
  try {
    return parse_manifest(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::filesystem::path map_path(const std::filesystem::path& corpus, const VideoEntry& video,
                               std::string_view layer, std::string_view stream) {
  return corpus / video.id / (std::string(layer) + "." + std::string(stream) + ".cpdt");
}

std::filesystem::path trajectory_path(const std::filesystem::path& corpus, const VideoEntry& video) {
  return corpus / video.id / kTrajectoryFileName;
}

}  // namespace cpd
