#include "cpd/trajectory_file.hpp"

#include <charconv>
#include <sstream>
#include <vector>

#include "cpd/binary_io.hpp"
#include "cpd/error.hpp"

namespace cpd {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::uint32_t parse_u32(std::string_view token, const std::string& where) {
  std::uint32_t v = 0;
  const auto* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end)
    fail(Errc::parse, where + ": expected a non-negative integer, got '" + std::string(token) + "'");
  return v;
}

class LineCursor {
 public:
  explicit LineCursor(std::string_view text) : text_(text) {}

  // Next non-blank line; false at end of input.
  bool next(std::string_view& line) {
    while (pos_ <= text_.size()) {
      const std::size_t nl = text_.find('\n', pos_);
      const std::size_t end = nl == std::string_view::npos ? text_.size() : nl;
      line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++number_;
      if (!split_ws(line).empty()) return true;
      if (nl == std::string_view::npos) break;
    }
    return false;
  }
  std::size_t number() const { return number_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t number_ = 0;
};

}  // namespace

TrajectorySet parse_trajectories(std::string_view text) {
  LineCursor cursor(text);
  std::string_view line;
  if (!cursor.next(line)) fail(Errc::parse, "trajectory file is empty");
  const auto header = split_ws(line);
  if (header.size() != 5)
    fail(Errc::parse, "line 1: header must be 'V_w V_h T L K', got " +
                          std::to_string(header.size()) + " fields");
  VideoDims dims;
  dims.width = parse_u32(header[0], "header V_w");
  dims.height = parse_u32(header[1], "header V_h");
  dims.frames = parse_u32(header[2], "header T");
  const std::uint32_t length = parse_u32(header[3], "header L");
  const std::uint32_t count = parse_u32(header[4], "header K");
  if (length == 0) fail(Errc::parse, "header: trajectory length L must be >= 1");

  std::vector<Trajectory> trajectories;
  trajectories.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    if (!cursor.next(line))
      fail(Errc::parse, "expected " + std::to_string(count) + " trajectories, found " +
                            std::to_string(k));
    const std::string where = "line " + std::to_string(cursor.number()) + " (trajectory " +
                              std::to_string(k) + ")";
    const auto fields = split_ws(line);
    if (fields.size() != length)
      fail(Errc::parse, where + ": expected " + std::to_string(length) + " points, got " +
                            std::to_string(fields.size()));
    Trajectory traj;
    traj.id = k;
    traj.points.reserve(length);
    for (std::size_t l = 0; l < fields.size(); ++l) {
      const std::string pw = where + ", point " + std::to_string(l);
      const std::string_view f = fields[l];
      const std::size_t c1 = f.find(',');
      const std::size_t c2 = c1 == std::string_view::npos ? c1 : f.find(',', c1 + 1);
      if (c2 == std::string_view::npos || f.find(',', c2 + 1) != std::string_view::npos)
        fail(Errc::parse, pw + ": expected 'x,y,t', got '" + std::string(f) + "'");
      traj.points.push_back({parse_u32(f.substr(0, c1), pw),
                             parse_u32(f.substr(c1 + 1, c2 - c1 - 1), pw),
                             parse_u32(f.substr(c2 + 1), pw)});
    }
    trajectories.push_back(std::move(traj));
  }
  if (cursor.next(line))
    fail(Errc::parse, "line " + std::to_string(cursor.number()) + ": more than " +
                          std::to_string(count) + " trajectories");
  return TrajectorySet(dims, std::move(trajectories));
}

std::string format_trajectories(const TrajectorySet& set) {
  const auto trajs = set.trajectories();
  const std::size_t length = trajs.empty() ? 1 : trajs.front().points.size();
  for (const Trajectory& t : trajs) {
    if (t.points.size() != length)
      fail(Errc::structural, "trajectory file format needs a uniform trajectory length");
  }
  std::ostringstream out;
  const VideoDims d = set.dims();
  out << d.width << ' ' << d.height << ' ' << d.frames << ' ' << length << ' ' << trajs.size()
      << '\n';
  for (const Trajectory& t : trajs) {
    for (std::size_t l = 0; l < t.points.size(); ++l) {
      if (l) out << ' ';
      out << t.points[l].x << ',' << t.points[l].y << ',' << t.points[l].t;
    }
    out << '\n';
  }
  return out.str();
}

TrajectorySet load_trajectories(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_trajectories(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_trajectories(const TrajectorySet& set, const std::filesystem::path& path) {
  write_text_atomic(path, format_trajectories(set));
}

}  // namespace cpd
