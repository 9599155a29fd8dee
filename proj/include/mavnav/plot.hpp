#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mavnav/errors.hpp"
#include "mavnav/geometry.hpp"
#include "mavnav/mission.hpp"
#include "mavnav/simulator.hpp"
#include "mavnav/world.hpp"

namespace mavnav {

// Minimal static SVG output: top-down and side views of the world geometry,
// planned poses, the flown trajectory colored by speed, and avoidance force
// lines when diagnostics are present.
class SvgCanvas {
 public:
  SvgCanvas(double x_min, double x_max, double y_min, double y_max,
            int width_px = 900)
      : x_min_(x_min),
        y_min_(y_min),
        scale_(width_px / std::max(x_max - x_min, 1e-6)),
        width_(width_px),
        height_(static_cast<int>(std::ceil((y_max - y_min) * scale_))) {
    body_ << "<rect x=\"0\" y=\"0\" width=\"" << width_ << "\" height=\""
          << height_ << "\" fill=\"#fafafa\"/>\n";
  }

  void rect(double x0, double y0, double x1, double y1,
            const std::string& fill, double opacity = 1.0) {
    const auto [px0, py1] = map(x0, y0);
    const auto [px1, py0] = map(x1, y1);
    body_ << "<rect x=\"" << px0 << "\" y=\"" << py0 << "\" width=\""
          << px1 - px0 << "\" height=\"" << py1 - py0 << "\" fill=\"" << fill
          << "\" fill-opacity=\"" << opacity << "\"/>\n";
  }

  void circle(double x, double y, double r_m, const std::string& stroke,
              const std::string& fill = "none") {
    const auto [px, py] = map(x, y);
    body_ << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\""
          << r_m * scale_ << "\" stroke=\"" << stroke << "\" fill=\"" << fill
          << "\"/>\n";
  }

  void line(double x0, double y0, double x1, double y1,
            const std::string& stroke, double width_px = 1.0,
            double opacity = 1.0) {
    const auto [px0, py0] = map(x0, y0);
    const auto [px1, py1] = map(x1, y1);
    body_ << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1
          << "\" y2=\"" << py1 << "\" stroke=\"" << stroke
          << "\" stroke-width=\"" << width_px << "\" stroke-opacity=\""
          << opacity << "\"/>\n";
  }

  void cross(double x, double y, double half_m, const std::string& stroke) {
    line(x - half_m, y, x + half_m, y, stroke, 1.5);
    line(x, y - half_m, x, y + half_m, stroke, 1.5);
    circle(x, y, half_m, stroke);
  }

  void text(double x, double y, const std::string& s) {
    const auto [px, py] = map(x, y);
    body_ << "<text x=\"" << px << "\" y=\"" << py
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << s
          << "</text>\n";
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
      throw ParseError("cannot write SVG: " + path);
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
        << "\" height=\"" << height_ << "\">\n"
        << body_.str() << "</svg>\n";
  }

 private:
  std::pair<double, double> map(double x, double y) const {
    return {(x - x_min_) * scale_, height_ - (y - y_min_) * scale_};
  }

  double x_min_, y_min_, scale_;
  int width_, height_;
  std::ostringstream body_;
};

namespace detail {

inline std::string speed_color(double speed, double v_max) {
  const double u = std::clamp(v_max > 0 ? speed / v_max : 0.0, 0.0, 1.0);
  const int r = static_cast<int>(40 + 215 * u);
  const int b = static_cast<int>(220 - 190 * u);
  std::ostringstream os;
  os << "rgb(" << r << ",60," << b << ")";
  return os.str();
}

}  // namespace detail

struct PlotInputs {
  const ScenarioWorld* world = nullptr;
  const SimTrace* trace = nullptr;                       // optional
  const std::vector<ViewPose>* poses = nullptr;          // optional
  const std::vector<AvoidanceLogEntry>* avoidance = nullptr;  // optional
  double v_max = 2.5;
};

// Axis selector: 0=x, 1=y, 2=z. Top view plots (x, y); side view (x, z).
inline void emit_view(const PlotInputs& in, int horizontal_axis,
                      int vertical_axis, const std::string& path) {
  const auto component = [](const Vec3& v, int axis) {
    return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
  };
  const Aabb& b = in.world->bounds;
  SvgCanvas svg(component(b.lo, horizontal_axis),
                component(b.hi, horizontal_axis),
                component(b.lo, vertical_axis),
                component(b.hi, vertical_axis));

  for (const auto& solid : in.world->static_solids()) {
    const Aabb bb = solid.bounding_box_at(0.0);
    svg.rect(component(bb.lo, horizontal_axis),
             component(bb.lo, vertical_axis),
             component(bb.hi, horizontal_axis),
             component(bb.hi, vertical_axis), "#8a8a8a", 0.8);
  }
  for (const auto& o : in.world->obstacles) {
    if (o.kind != ObstacleKind::kDynamic) {
      continue;
    }
    const Aabb bb = o.bounding_box_at(0.0);
    svg.rect(component(bb.lo, horizontal_axis),
             component(bb.lo, vertical_axis),
             component(bb.hi, horizontal_axis),
             component(bb.hi, vertical_axis), "#4a90d9", 0.4);
  }
  for (const auto& tag : in.world->tags) {
    svg.circle(component(tag.position, horizontal_axis),
               component(tag.position, vertical_axis), 0.06,
               tag.kind == TagKind::kVisual ? "#2a8f2a" : "#b08020",
               "#ffffff");
  }

  if (in.avoidance != nullptr) {
    for (const auto& entry : *in.avoidance) {
      if (!entry.detail.active) {
        continue;
      }
      const Vec3 mav = entry.adjusted_target - entry.detail.target;
      for (const auto& diag : entry.detail.per_obstacle) {
        const Vec3 tip = mav + diag.direction * diag.distance;
        const bool pushing = diag.factors.push > 0.0;
        svg.line(component(mav, horizontal_axis),
                 component(mav, vertical_axis),
                 component(tip, horizontal_axis),
                 component(tip, vertical_axis),
                 pushing ? "#d03030" : "#30a030", 1.0, 0.35);
      }
    }
  }

  if (in.trace != nullptr && in.trace->states.size() > 1) {
    const std::size_t stride =
        std::max<std::size_t>(1, in.trace->states.size() / 4000);
    for (std::size_t k = stride; k < in.trace->states.size(); k += stride) {
      const Vec3 a = in.trace->states[k - stride].position();
      const Vec3 c = in.trace->states[k].position();
      const double speed = in.trace->states[k].velocity().norm();
      svg.line(component(a, horizontal_axis), component(a, vertical_axis),
               component(c, horizontal_axis), component(c, vertical_axis),
               detail::speed_color(speed, in.v_max), 2.0);
    }
  }

  if (in.poses != nullptr) {
    for (const auto& vp : *in.poses) {
      svg.cross(component(vp.pose.position, horizontal_axis),
                component(vp.pose.position, vertical_axis), 0.18, "#c02020");
    }
  }

  svg.text(component(b.lo, horizontal_axis) + 0.3,
           component(b.hi, vertical_axis) - 0.3,
           in.world->name.empty() ? std::string("scenario") : in.world->name);
  svg.save(path);
}

inline void emit_plots(const PlotInputs& in, const std::string& out_dir) {
  emit_view(in, 0, 1, out_dir + "/top.svg");
  emit_view(in, 0, 2, out_dir + "/side.svg");
}

}  // namespace mavnav
