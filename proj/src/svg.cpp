#include "foldplan/svg.hpp"

#include <cstdio>

#include "foldplan/io.hpp"

namespace foldplan {

namespace {

constexpr double kSize = 400.0;
constexpr double kMargin = 20.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Stroke {
  const char* cls;
  const char* color;
  double width;
  const char* dash;  // empty for solid
};

Stroke stroke_for(CreaseType type, bool boundary, bool unfolded) {
  if (boundary) return {"boundary", "#000000", 3.0, ""};
  const char* gray = "#9a9a9a";
  switch (type) {
    case CreaseType::Mountain:
      return {unfolded ? "mountain unfolded" : "mountain", unfolded ? gray : "#c0392b", 1.5, ""};
    case CreaseType::Valley:
      return {unfolded ? "valley unfolded" : "valley", unfolded ? gray : "#1f5fbf", 1.5, "8 5"};
    case CreaseType::Unassigned:
      break;
  }
  return {"unassigned", gray, 1.0, "2 4"};
}

}  // namespace

std::string render_svg(const CreasePattern& pattern, const FoldState* state, std::string_view title) {
  if (state != nullptr && state->num_edges() != pattern.num_edges()) {
    throw std::invalid_argument("state does not match the pattern");
  }
  const double total = kSize + 2 * kMargin;
  auto sx = [](double x) { return num(kMargin + x * kSize); };
  auto sy = [](double y) { return num(kMargin + (1.0 - y) * kSize); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(total) + "\" height=\"" + num(total) +
         "\" viewBox=\"0 0 " + num(total) + " " + num(total) + "\">\n";
  if (!title.empty()) out += "  <title>" + escape(title) + "</title>\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"" + num(total) + "\" height=\"" + num(total) + "\" fill=\"#ffffff\"/>\n";
  // Creases first so the outline stays on top.
  for (int pass = 0; pass < 2; ++pass) {
    for (int e = 0; e < pattern.num_edges(); ++e) {
      const bool boundary = pattern.is_boundary(e);
      if (boundary != (pass == 1)) continue;
      const auto ei = static_cast<std::size_t>(e);
      const CreaseType type = state ? state->z[ei] : pattern.crease_types()[ei];
      const bool unfolded = state != nullptr && state->rho[ei] == 0.0;
      const Stroke s = stroke_for(type, boundary, unfolded);
      const Point& a = pattern.vertices()[static_cast<std::size_t>(pattern.edges()[ei].a)];
      const Point& b = pattern.vertices()[static_cast<std::size_t>(pattern.edges()[ei].b)];
      out += "  <line class=\"" + std::string(s.cls) + "\" data-edge=\"" + std::to_string(e) + "\" x1=\"" + sx(a.x) +
             "\" y1=\"" + sy(a.y) + "\" x2=\"" + sx(b.x) + "\" y2=\"" + sy(b.y) + "\" stroke=\"" + s.color +
             "\" stroke-width=\"" + num(s.width) + "\"";
      if (*s.dash != '\0') out += " stroke-dasharray=\"" + std::string(s.dash) + "\"";
      out += " stroke-linecap=\"round\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::vector<std::filesystem::path> export_trajectory_svgs(const CreasePattern& pattern, const Trajectory& trajectory,
                                                          const std::filesystem::path& dir, std::string_view stem) {
  std::vector<std::filesystem::path> written;
  const std::size_t n = trajectory.steps.size();
  for (std::size_t t = 0; t <= n; ++t) {
    const FoldState& s = t == 0 ? trajectory.initial_state : trajectory.steps[t - 1].state_after;
    char name[64];
    std::snprintf(name, sizeof name, "_%03zu.svg", t);
    std::string title = trajectory.category + " step " + std::to_string(t);
    if (t > 0) title += ": " + describe(trajectory.steps[t - 1].action);
    const auto path = dir / (std::string(stem) + name);
    write_text_file(path, render_svg(pattern, &s, title));
    written.push_back(path);
  }
  return written;
}

}  // namespace foldplan
