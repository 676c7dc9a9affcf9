#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dexlink/error.hpp"
#include "dexlink/glove/glove_state.hpp"

namespace dexlink::glove {

/// Time-parameterized glove pose.
using PoseFunction = std::function<kin::JointVector(double t_seconds)>;

/// Keyframed pose trace, linearly interpolated and held constant past
/// either end. CSV columns: t_seconds, q0..q20 (radians).
class PoseScript {
 public:
  struct Keyframe {
    double t = 0.0;
    kin::JointVector q;
  };

  PoseScript() = default;
  explicit PoseScript(std::vector<Keyframe> frames) : frames_(std::move(frames)) {
    if (frames_.empty()) throw ValidationError("pose script has no keyframes");
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      if (frames_[i].q.size() != kGloveDof) throw DimensionMismatch(kGloveDof, frames_[i].q.size());
      if (!frames_[i].q.all_finite() || !std::isfinite(frames_[i].t)) {
        throw ValidationError("pose script row " + std::to_string(i) + " is not finite");
      }
      if (i > 0 && !(frames_[i].t > frames_[i - 1].t)) {
        throw ValidationError("pose script times must increase (row " + std::to_string(i) + ")");
      }
    }
  }

  static PoseScript constant(const kin::JointVector& q) { return PoseScript({{0.0, q}}); }

  static PoseScript parse_csv(const std::string& text) {
    std::vector<Keyframe> frames;
    std::istringstream lines(text);
    std::string line;
    std::size_t row = 0;
    while (std::getline(lines, line)) {
      ++row;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::vector<double> cells;
      std::istringstream cs(line);
      std::string cell;
      bool numeric = true;
      while (std::getline(cs, cell, ',')) {
        try {
          std::size_t pos = 0;
          cells.push_back(std::stod(cell, &pos));
          if (cell.find_first_not_of(" \t\r", pos) != std::string::npos) numeric = false;
        } catch (const std::exception&) {
          numeric = false;
        }
      }
      if (!numeric) {
        if (frames.empty()) continue;  // header row
        throw ParseError("pose script line " + std::to_string(row) + " is not numeric");
      }
      if (cells.size() != kGloveDof + 1) {
        throw ParseError("pose script line " + std::to_string(row) + " needs 22 columns, has " +
                         std::to_string(cells.size()));
      }
      Keyframe k;
      k.t = cells[0];
      k.q = kin::JointVector(kGloveDof);
      for (std::size_t i = 0; i < kGloveDof; ++i) k.q[i] = cells[i + 1];
      frames.push_back(std::move(k));
    }
    return PoseScript(std::move(frames));
  }

  static PoseScript load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pose script '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
  }

  kin::JointVector at(double t) const {
    if (frames_.empty()) return kin::JointVector(kGloveDof);
    if (t <= frames_.front().t) return frames_.front().q;
    if (t >= frames_.back().t) return frames_.back().q;
    auto it = std::upper_bound(frames_.begin(), frames_.end(), t, [](double v, const Keyframe& k) { return v < k.t; });
    const Keyframe& b = *it;
    const Keyframe& a = *(it - 1);
    const double u = (t - a.t) / (b.t - a.t);
    return kin::JointVector(a.q.vec() + u * (b.q.vec() - a.q.vec()));
  }

  double duration() const { return frames_.empty() ? 0.0 : frames_.back().t; }
  const std::vector<Keyframe>& keyframes() const { return frames_; }

  PoseFunction as_function() const {
    return [copy = *this](double t) { return copy.at(t); };
  }

 private:
  std::vector<Keyframe> frames_;
};

}  // namespace dexlink::glove
