#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "afp/bus_sim.hpp"
#include "afp/detector.hpp"
#include "afp/errors.hpp"
#include "afp/evaluation.hpp"
#include "afp/features.hpp"
#include "afp/lof.hpp"
#include "afp/segmentation.hpp"

namespace afp::io {

using nlohmann::json;

namespace detail {

inline void require_object(const json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  require_object(j, what);
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + what);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + what);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + what + ": " + e.what());
  }
}

template <class T>
void get_opt(const json& j, const char* key, T& out, const std::string& what) {
  if (j.contains(key)) out = get<T>(j, key, what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Device configuration

inline json to_json(const TransmitterProfile& p) {
  return {{"hi_volts", p.hi_volts},         {"lo_volts", p.lo_volts},
          {"null_volts", p.null_volts},     {"rise_time", p.rise_time},
          {"fall_time", p.fall_time},       {"overshoot_frac", p.overshoot_frac},
          {"ringing_freq", p.ringing_freq}, {"ringing_damping", p.ringing_damping},
          {"null_shape_gain", p.null_shape_gain}, {"timing_jitter", p.timing_jitter},
          {"noise_sigma", p.noise_sigma},   {"bit_rate", p.bit_rate}};
}

// Missing fields keep their defaults.
inline TransmitterProfile profile_from_json(const json& j) {
  const std::string what = "transmitter profile";
  detail::reject_unknown(j,
                         {"hi_volts", "lo_volts", "null_volts", "rise_time", "fall_time", "overshoot_frac",
                          "ringing_freq", "ringing_damping", "null_shape_gain", "timing_jitter", "noise_sigma",
                          "bit_rate"},
                         what);
  TransmitterProfile p;
  detail::get_opt(j, "hi_volts", p.hi_volts, what);
  detail::get_opt(j, "lo_volts", p.lo_volts, what);
  detail::get_opt(j, "null_volts", p.null_volts, what);
  detail::get_opt(j, "rise_time", p.rise_time, what);
  detail::get_opt(j, "fall_time", p.fall_time, what);
  detail::get_opt(j, "overshoot_frac", p.overshoot_frac, what);
  detail::get_opt(j, "ringing_freq", p.ringing_freq, what);
  detail::get_opt(j, "ringing_damping", p.ringing_damping, what);
  detail::get_opt(j, "null_shape_gain", p.null_shape_gain, what);
  detail::get_opt(j, "timing_jitter", p.timing_jitter, what);
  detail::get_opt(j, "noise_sigma", p.noise_sigma, what);
  detail::get_opt(j, "bit_rate", p.bit_rate, what);
  return p;
}

inline json to_json(const ReceiverLoad& l) { return {{"cutoff_freq", l.cutoff_freq}, {"gain", l.gain}}; }

inline ReceiverLoad load_from_json(const json& j) {
  const std::string what = "receiver load";
  detail::reject_unknown(j, {"cutoff_freq", "gain"}, what);
  ReceiverLoad l;
  detail::get_opt(j, "cutoff_freq", l.cutoff_freq, what);
  detail::get_opt(j, "gain", l.gain, what);
  return l;
}

inline json loads_to_json(const std::vector<ReceiverLoad>& loads) {
  json a = json::array();
  for (const auto& l : loads) a.push_back(to_json(l));
  return a;
}

inline std::vector<ReceiverLoad> loads_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("loads must be a JSON array");
  std::vector<ReceiverLoad> out;
  for (const auto& e : j) out.push_back(load_from_json(e));
  return out;
}

inline json to_json(const Thresholds& t) {
  return {{"v_l1", t.v_l1}, {"v_l2", t.v_l2}, {"v_h1", t.v_h1}, {"v_h2", t.v_h2}};
}

inline Thresholds thresholds_from_json(const json& j) {
  const std::string what = "thresholds";
  detail::reject_unknown(j, {"v_l1", "v_l2", "v_h1", "v_h2"}, what);
  Thresholds t;
  detail::get_opt(j, "v_l1", t.v_l1, what);
  detail::get_opt(j, "v_l2", t.v_l2, what);
  detail::get_opt(j, "v_h1", t.v_h1, what);
  detail::get_opt(j, "v_h2", t.v_h2, what);
  return t;
}

inline json to_json(const LofParams& p) { return {{"k", p.k}, {"contamination", p.contamination}}; }

inline LofParams lof_params_from_json(const json& j) {
  const std::string what = "lof parameters";
  detail::reject_unknown(j, {"k", "contamination"}, what);
  LofParams p;
  detail::get_opt(j, "k", p.k, what);
  detail::get_opt(j, "contamination", p.contamination, what);
  return p;
}

// ---------------------------------------------------------------------------
// Scenario

inline json to_json(const Scenario& s) {
  json rogues = json::array();
  for (const auto& r : s.rogue_variants) rogues.push_back({{"tx", to_json(r.tx)}, {"loads", loads_to_json(r.loads)}});
  json words = json::array();
  for (auto w : s.words) words.push_back(format_word(w));
  return {{"guarded_tx", to_json(s.guarded.tx)},
          {"guarded_loads", loads_to_json(s.guarded.loads)},
          {"rogue_variants", rogues},
          {"attack_kind", to_string(s.attack_kind)},
          {"words", words},
          {"words_per_device", s.words_per_device},
          {"seed", s.seed},
          {"gap_bits", s.gap_bits},
          {"samples_per_bit", s.samples_per_bit},
          {"thresholds", to_json(s.thresholds)},
          {"lof", to_json(s.lof)}};
}

inline Scenario scenario_from_json(const json& j) {
  const std::string what = "scenario";
  detail::reject_unknown(j,
                         {"guarded_tx", "guarded_loads", "rogue_variants", "attack_kind", "words",
                          "words_per_device", "seed", "gap_bits", "samples_per_bit", "thresholds", "lof"},
                         what);
  Scenario s;
  if (!j.contains("guarded_tx")) throw ConfigError("missing key 'guarded_tx' in scenario");
  s.guarded.tx = profile_from_json(j.at("guarded_tx"));
  if (j.contains("guarded_loads")) s.guarded.loads = loads_from_json(j.at("guarded_loads"));
  if (!j.contains("rogue_variants") || !j.at("rogue_variants").is_array())
    throw ConfigError("scenario needs a 'rogue_variants' array");
  for (const auto& r : j.at("rogue_variants")) {
    detail::reject_unknown(r, {"tx", "loads"}, "rogue variant");
    DeviceConfig d;
    if (r.contains("tx")) d.tx = profile_from_json(r.at("tx"));
    if (r.contains("loads")) d.loads = loads_from_json(r.at("loads"));
    s.rogue_variants.push_back(std::move(d));
  }
  if (j.contains("attack_kind")) s.attack_kind = parse_attack_kind(detail::get<std::string>(j, "attack_kind", what));
  if (j.contains("words")) {
    s.words.clear();
    for (const auto& w : detail::get<std::vector<std::string>>(j, "words", what)) s.words.push_back(parse_word(w));
  }
  detail::get_opt(j, "words_per_device", s.words_per_device, what);
  detail::get_opt(j, "seed", s.seed, what);
  detail::get_opt(j, "gap_bits", s.gap_bits, what);
  detail::get_opt(j, "samples_per_bit", s.samples_per_bit, what);
  if (j.contains("thresholds")) s.thresholds = thresholds_from_json(j.at("thresholds"));
  if (j.contains("lof")) s.lof = lof_params_from_json(j.at("lof"));
  try {
    validate(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Models

inline json to_json(const LofModel& m) {
  return {{"dim", m.dim},
          {"count", m.count},
          {"k", m.params.k},
          {"contamination", m.params.contamination},
          {"threshold", m.threshold},
          {"scaler", {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}}},
          {"training", m.points}};
}

// Neighborhoods, densities and the threshold are rebuilt from the training
// matrix; the stored threshold must agree.
inline LofModel lof_model_from_json(const json& j) {
  const std::string what = "LOF model";
  detail::reject_unknown(j, {"dim", "count", "k", "contamination", "threshold", "scaler", "training"}, what);
  LofModel m;
  m.dim = detail::get<std::size_t>(j, "dim", what);
  m.count = detail::get<std::size_t>(j, "count", what);
  m.params.k = detail::get<int>(j, "k", what);
  m.params.contamination = detail::get<double>(j, "contamination", what);
  const double stored = detail::get<double>(j, "threshold", what);
  const json& sc = j.at("scaler");
  detail::reject_unknown(sc, {"mean", "scale"}, "LOF scaler");
  m.scaler.mean = detail::get<std::vector<double>>(sc, "mean", "LOF scaler");
  m.scaler.scale = detail::get<std::vector<double>>(sc, "scale", "LOF scaler");
  m.points = detail::get<std::vector<double>>(j, "training", what);
  if (m.dim == 0 || m.scaler.mean.size() != m.dim || m.scaler.scale.size() != m.dim ||
      m.points.size() != m.dim * m.count || m.count < static_cast<std::size_t>(m.params.k) + 2 || m.params.k < 1)
    throw ConfigError("inconsistent LOF model dimensions");
  lof_build(m);
  if (std::abs(m.threshold - stored) > 1e-9 * std::max(1.0, std::abs(stored)))
    throw ConfigError("LOF model threshold does not match its training matrix");
  return m;
}

inline json to_json(const FeatureOptions& f) {
  return {{"raw_lengths", f.raw_lengths}, {"poly_degrees", f.poly_degrees}, {"sample_interval", f.sample_interval}};
}

inline FeatureOptions feature_options_from_json(const json& j) {
  const std::string what = "feature options";
  detail::reject_unknown(j, {"raw_lengths", "poly_degrees", "sample_interval"}, what);
  FeatureOptions f;
  detail::get_opt(j, "raw_lengths", f.raw_lengths, what);
  detail::get_opt(j, "poly_degrees", f.poly_degrees, what);
  detail::get_opt(j, "sample_interval", f.sample_interval, what);
  return f;
}

inline json to_json(const WordDetector& d) {
  json models = json::object();
  for (const auto& [t, m] : d.models) models[to_string(t)] = to_json(m);
  return {{"set_id", to_string(d.set_id)},
          {"t_votes", d.t_votes},
          {"lof", to_json(d.lof)},
          {"features", to_json(d.features)},
          {"models", models}};
}

inline WordDetector detector_from_json(const json& j) {
  const std::string what = "detector";
  detail::reject_unknown(j, {"set_id", "t_votes", "lof", "features", "models"}, what);
  WordDetector d;
  try {
    d.set_id = parse_feature_set(detail::get<std::string>(j, "set_id", what));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  d.t_votes = detail::get<int>(j, "t_votes", what);
  if (d.t_votes < 0 || d.t_votes > static_cast<int>(kSegmentsPerWord)) throw ConfigError("t_votes must be in [0, 127]");
  if (j.contains("lof")) d.lof = lof_params_from_json(j.at("lof"));
  if (j.contains("features")) d.features = feature_options_from_json(j.at("features"));
  if (!j.contains("models")) throw ConfigError("detector has no models");
  detail::require_object(j.at("models"), "detector models");
  for (const auto& [name, m] : j.at("models").items()) {
    SegmentType t;
    try {
      t = parse_segment_type(name);
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
    d.models.emplace(t, lof_model_from_json(m));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const ErrorCurves& c) { return {{"far", c.far}, {"mdr", c.mdr}}; }

inline json to_json(const Report& r) {
  json cf = json::object();
  for (const auto& [t, v] : r.counter_far) cf[std::to_string(t)] = v;
  json dt = json::object();
  for (const auto& [t, s] : r.detection_time)
    dt[std::to_string(t)] = {{"max_words", s.max_words},     {"mean_words", s.mean_words},
                             {"observed", s.observed},       {"censored", s.censored},
                             {"max_seconds", s.max_seconds}, {"mean_seconds", s.mean_seconds}};
  return {{"set_id", to_string(r.set_id)}, {"curves", to_json(r.curves)},     {"eer", r.eer},
          {"fa_per_sec", r.fa_per_sec},   {"counter_far", cf},               {"detection_time_words", dt}};
}

// ---------------------------------------------------------------------------
// Files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(1) << '\n';
}

inline Scenario load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }
inline WordDetector load_detector(const std::string& path) { return detector_from_json(read_json_file(path)); }

}  // namespace afp::io
