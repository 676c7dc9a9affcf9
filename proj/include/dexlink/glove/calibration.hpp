#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "dexlink/error.hpp"
#include "dexlink/glove/glove_state.hpp"

namespace dexlink::glove {

struct CalibrationKnot {
  double raw_degrees = 0.0;
  double true_degrees = 0.0;
};

/// Monotone piecewise-linear correction from measured to true degrees.
class CalibrationTable {
 public:
  CalibrationTable() = default;
  explicit CalibrationTable(std::vector<CalibrationKnot> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw EmptyTable();
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      if (!std::isfinite(knots_[i].raw_degrees) || !std::isfinite(knots_[i].true_degrees)) {
        throw ValidationError("calibration knot " + std::to_string(i) + " is not finite");
      }
      if (i > 0 && !(knots_[i].raw_degrees > knots_[i - 1].raw_degrees)) {
        throw ValidationError("calibration knots must have strictly increasing raw values (knot " +
                              std::to_string(i) + ")");
      }
    }
  }

  static CalibrationTable identity() { return CalibrationTable({{0.0, 0.0}, {360.0, 360.0}}); }

  const std::vector<CalibrationKnot>& knots() const { return knots_; }
  bool empty() const { return knots_.size() < 2; }

  /// Interpolates through the knots; extrapolates the end segments.
  double apply(double raw) const {
    if (empty()) throw EmptyTable();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), raw,
                               [](double v, const CalibrationKnot& k) { return v < k.raw_degrees; });
    std::size_t hi = static_cast<std::size_t>(it - knots_.begin());
    hi = std::clamp<std::size_t>(hi, 1, knots_.size() - 1);
    const CalibrationKnot& a = knots_[hi - 1];
    const CalibrationKnot& b = knots_[hi];
    if (raw == a.raw_degrees) return a.true_degrees;
    if (raw == b.raw_degrees) return b.true_degrees;
    const double u = (raw - a.raw_degrees) / (b.raw_degrees - a.raw_degrees);
    return a.true_degrees + u * (b.true_degrees - a.true_degrees);
  }

 private:
  std::vector<CalibrationKnot> knots_;
};

inline double apply_calibration(const CalibrationTable& table, double raw) { return table.apply(raw); }

/// Builds a table with knots every `spacing` raw degrees over [0, 360] from
/// paired (measured raw, reference true) samples. The samples are treated
/// as a monotone curve and resampled at each knot.
inline CalibrationTable build_calibration_table(std::vector<CalibrationKnot> samples, double spacing = 5.0) {
  if (samples.size() < 2) throw EmptyTable();
  if (!(spacing > 0.0)) throw ValidationError("knot spacing must be > 0");
  std::sort(samples.begin(), samples.end(),
            [](const CalibrationKnot& a, const CalibrationKnot& b) { return a.raw_degrees < b.raw_degrees; });
  // Collapse equal raw readings (ADC clipping) to their mean true angle.
  std::vector<CalibrationKnot> curve;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < samples.size() && samples[j].raw_degrees == samples[i].raw_degrees) sum += samples[j++].true_degrees;
    curve.push_back({samples[i].raw_degrees, sum / static_cast<double>(j - i)});
    i = j;
  }
  if (curve.size() < 2) throw EmptyTable();
  const CalibrationTable dense(curve);

  std::vector<CalibrationKnot> knots;
  const auto count = static_cast<std::size_t>(std::ceil(360.0 / spacing - 1e-9));
  for (std::size_t k = 0; k <= count; ++k) {
    const double raw = std::min(360.0, static_cast<double>(k) * spacing);
    knots.push_back({raw, dense.apply(raw)});
  }
  return CalibrationTable(std::move(knots));
}

/// Calibration sweep against an external reference encoder: drives the
/// joint through true angles [0, 360] in `sweep_step` increments, records
/// what the glove encoder reports, and fits a table.
inline CalibrationTable calibrate_channel(const std::function<double(double)>& measured_at_true,
                                          double spacing = 5.0, double sweep_step = 0.25) {
  std::vector<CalibrationKnot> samples;
  for (double t = 0.0; t <= 360.0 + 1e-9; t += sweep_step) {
    const double truth = std::min(t, 360.0);
    samples.push_back({measured_at_true(truth), truth});
  }
  return build_calibration_table(std::move(samples), spacing);
}

/// Persisted calibration: one table per encoder channel plus the flat-hand
/// zero offsets (degrees) of all 21 glove joints.
struct GloveCalibration {
  std::array<CalibrationTable, kEncoderChannels> tables;
  std::array<double, kGloveDof> zero_offsets_deg{};

  static GloveCalibration identity(double zero_offset_deg = 180.0) {
    GloveCalibration c;
    c.tables.fill(CalibrationTable::identity());
    c.zero_offsets_deg.fill(zero_offset_deg);
    return c;
  }
};

inline nlohmann::json to_json(const CalibrationTable& t) {
  nlohmann::json knots = nlohmann::json::array();
  for (const auto& k : t.knots()) knots.push_back(nlohmann::json::array({k.raw_degrees, k.true_degrees}));
  return knots;
}

inline CalibrationTable calibration_table_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("calibration table must be an array of [raw, true] pairs");
  std::vector<CalibrationKnot> knots;
  for (const auto& k : j) {
    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
      throw ParseError("calibration knot must be [raw, true]");
    }
    knots.push_back({k[0].get<double>(), k[1].get<double>()});
  }
  return CalibrationTable(std::move(knots));
}

/// {"tables": {"0": [[raw, true], ...], ...}, "zero_offsets_deg": [21]}.
/// Channels without a table fall back to identity.
inline nlohmann::json to_json(const GloveCalibration& c) {
  nlohmann::json tables = nlohmann::json::object();
  for (std::size_t ch = 0; ch < kEncoderChannels; ++ch) tables[std::to_string(ch)] = to_json(c.tables[ch]);
  return nlohmann::json{{"tables", std::move(tables)}, {"zero_offsets_deg", c.zero_offsets_deg}};
}

inline GloveCalibration glove_calibration_from_json(const nlohmann::json& j) {
  GloveCalibration c = GloveCalibration::identity();
  try {
    if (j.contains("tables")) {
      for (auto it = j.at("tables").begin(); it != j.at("tables").end(); ++it) {
        std::size_t pos = 0;
        const unsigned long ch = std::stoul(it.key(), &pos);
        if (pos != it.key().size() || ch >= kEncoderChannels) throw ParseError("bad calibration channel '" + it.key() + "'");
        c.tables[ch] = calibration_table_from_json(it.value());
      }
    }
    if (j.contains("zero_offsets_deg")) c.zero_offsets_deg = j.at("zero_offsets_deg").get<std::array<double, kGloveDof>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("calibration document: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("calibration channel keys must be integers");
  }
  return c;
}

}  // namespace dexlink::glove
