// afp: command-line front end for the fingerprinting pipeline.
//
//   afp synth    --scenario s.json --out trace.bin [--device guarded|rogue:N] [--count N]
//   afp segment  --trace trace.bin [--out seg.csv]
//   afp features --trace trace.bin --feature-set raw [--out feats.csv]
//   afp train    (--trace trace.bin | --features feats.csv) --feature-set raw --out model.json
//   afp run      --model model.json --trace trace.bin --t-suspicion 20 [--out run.csv]
//   afp eval     --scenario s.json --feature-set raw --out prefix
//   afp markov   --p 0.6 --t 100 [--target 0.99999] [--rate 610] [--out prefix]
//
// Exit status: 0 ok, 2 bad configuration or arguments, 1 runtime failure.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "afp/afp.hpp"

using namespace afp;

namespace {

// Writes to the --out file when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error("cannot write " + path);
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

FeatureOptions options_for(const Trace& t) {
  FeatureOptions f;
  f.sample_interval = t.sample_interval();
  return f;
}

// Malformed words come back empty.
std::vector<WordSegments> segment_tolerant(const Trace& t, const Thresholds& th, std::size_t& malformed) {
  std::vector<WordSegments> out(t.word_starts.size());
  malformed = 0;
  for (std::size_t w = 0; w < t.word_starts.size(); ++w) {
    try {
      out[w] = segment_word(t, t.word_starts[w], th);
    } catch (const MalformedSignal& e) {
      ++malformed;
      std::cerr << "warning: " << e.with_word(w).what() << "\n";
    }
  }
  return out;
}

struct FeatureRow {
  std::size_t word = 0;
  SegmentType type = SegmentType::LO;
  std::vector<double> values;
};

void write_features_csv(std::ostream& os, FeatureSetId set, const std::vector<WordSegments>& words,
                        const FeatureOptions& opts) {
  std::size_t width = 0;
  for (SegmentType t : kAllSegmentTypes) width = std::max(width, feature_count(set, t, opts));
  os << "word_index,segment_index,segment_type,set";
  for (std::size_t i = 0; i < width; ++i) os << ",f" << i;
  os << "\n";
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t s = 0; s < words[w].size(); ++s) {
      const auto& seg = words[w][s];
      std::optional<FeatureVector> fv;
      try {
        fv = extract(set, seg, opts);
      } catch (const SegmentTooShort& e) {
        std::cerr << "warning: word " << w << " segment " << s << ": " << e.what() << "\n";
        continue;
      }
      if (!fv) continue;
      os << w << "," << s << "," << to_string(seg.seg_type) << "," << to_string(set);
      for (double v : fv->values) os << "," << fmt(v);
      for (std::size_t i = fv->values.size(); i < width; ++i) os << ",";
      os << "\n";
    }
  }
}

std::vector<FeatureRow> read_features_csv(const std::string& path, FeatureSetId& set) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("word_index,segment_index,segment_type,set", 0) != 0)
    throw ConfigError(path + ": not a features CSV");
  std::vector<FeatureRow> rows;
  std::optional<FeatureSetId> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() < 5) throw ConfigError(path + ":" + std::to_string(lineno) + ": too few columns");
    try {
      FeatureRow r;
      r.word = std::stoull(cells[0]);
      r.type = parse_segment_type(cells[2]);
      const FeatureSetId s = parse_feature_set(cells[3]);
      if (seen && *seen != s) throw ConfigError("mixed feature sets");
      seen = s;
      for (std::size_t i = 4; i < cells.size() && !cells[i].empty(); ++i) r.values.push_back(std::stod(cells[i]));
      rows.push_back(std::move(r));
    } catch (const std::logic_error& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!seen) throw ConfigError(path + ": no feature rows");
  set = *seen;
  return rows;
}

// Trains from pre-extracted feature rows; mirrors train_detector's checks.
WordDetector train_from_rows(const std::vector<FeatureRow>& rows, FeatureSetId set, int t_votes, LofParams lof,
                             FeatureOptions features) {
  std::set<std::size_t> words;
  std::map<SegmentType, std::vector<std::vector<double>>> pools;
  for (const auto& r : rows) {
    words.insert(r.word);
    pools[r.type].push_back(r.values);
  }
  if (words.size() < kMinTrainingWords)
    throw InvalidArgument("training needs at least " + std::to_string(kMinTrainingWords) + " words, got " +
                          std::to_string(words.size()));
  if (t_votes < 0 || t_votes > static_cast<int>(kSegmentsPerWord)) throw InvalidArgument("t_votes must be in [0, 127]");
  WordDetector det;
  det.set_id = set;
  det.t_votes = t_votes;
  det.lof = lof;
  det.features = features;
  for (auto& [t, pool] : pools) {
    if (!participates(set, t)) continue;
    det.models.emplace(t, lof_fit(pool, lof));
  }
  return det;
}

// --device guarded | rogue:N (0-based)
DeviceConfig pick_device(const Scenario& sc, const std::string& device) {
  if (device == "guarded") return sc.guarded;
  if (device.rfind("rogue:", 0) == 0) {
    std::size_t i = 0;
    try {
      i = std::stoul(device.substr(6));
    } catch (const std::logic_error&) {
      throw ConfigError("bad device '" + device + "'");
    }
    if (i >= sc.rogue_variants.size()) throw ConfigError("scenario has no rogue variant " + std::to_string(i));
    return sc.rogue_variants[i];
  }
  throw ConfigError("device must be 'guarded' or 'rogue:N'");
}

FeatureSetId feature_set_arg(const std::string& s) {
  try {
    return parse_feature_set(s);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

void write_markov_curves(const std::string& prefix, double target, double rate) {
  const std::vector<double> ps{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<int> ts;
  for (int t = 1; t <= 100; ++t) ts.push_back(t);
  {
    Output out(prefix + "_flight_fa.csv");
    out.get() << "T,p,flight_FA_prob\n";
    for (int t : ts)
      for (double p : ps) out.get() << t << "," << p << "," << fmt(markov::flight_false_alarm(p, t)) << "\n";
  }
  {
    Output out(prefix + "_detect.csv");
    out.get() << "T,p,seconds_to_target\n";
    for (int t : ts)
      for (double p : ps) {
        const auto s = markov::time_to_detect(p, t, target).seconds(rate);
        out.get() << t << "," << p << "," << (s ? fmt(*s) : std::string("inf")) << "\n";
      }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARINC 429 hardware-fingerprint intrusion detection"};
  app.require_subcommand(1);

  std::string scenario_path, trace_path, model_path, out_path, features_path;
  std::string feature_set = "raw", device = "guarded", encoding = "f32le";
  int t_votes = 100, t_suspicion = 20, k = 20, count = 0, reps = 1000;
  std::size_t test_words = 1968;
  double contamination = 0.10, p = 0.5, target = markov::kDetectionTarget, rate = markov::kWordsPerSecond;
  std::optional<std::uint64_t> seed;
  int t_chain = 50;

  auto* synth = app.add_subcommand("synth", "synthesize a word stream for one device of a scenario");
  synth->add_option("--scenario", scenario_path)->required();
  synth->add_option("--out", out_path)->required();
  synth->add_option("--device", device, "guarded or rogue:N");
  synth->add_option("--count", count, "number of words (default words_per_device)")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", seed);
  synth->add_option("--encoding", encoding)->check(CLI::IsMember({"f32le", "csv"}));

  auto* segment = app.add_subcommand("segment", "split every word of a trace into segments");
  segment->add_option("--trace", trace_path)->required();
  segment->add_option("--out", out_path);

  auto* features = app.add_subcommand("features", "extract per-segment feature vectors");
  features->add_option("--trace", trace_path)->required();
  features->add_option("--feature-set", feature_set);
  features->add_option("--out", out_path);

  auto* train = app.add_subcommand("train", "fit per-segment-type LOF models on normal traffic");
  auto* train_src = train->add_option("--trace", trace_path);
  train->add_option("--features", features_path)->excludes(train_src);
  train->add_option("--feature-set", feature_set);
  train->add_option("--t-votes", t_votes);
  train->add_option("--k", k);
  train->add_option("--contamination", contamination);
  train->add_option("--out", out_path)->required();

  auto* run = app.add_subcommand("run", "classify a trace word by word and drive the suspicion counter");
  run->add_option("--model", model_path)->required();
  run->add_option("--trace", trace_path)->required();
  run->add_option("--t-suspicion", t_suspicion);
  run->add_option("--t-votes", t_votes, "override the model's voting threshold");
  run->add_option("--out", out_path);

  auto* eval = app.add_subcommand("eval", "run the evaluation protocol on a scenario");
  eval->add_option("--scenario", scenario_path)->required();
  eval->add_option("--feature-set", feature_set);
  eval->add_option("--t-votes", t_votes);
  eval->add_option("--seed", seed);
  eval->add_option("--reps", reps)->check(CLI::PositiveNumber);
  eval->add_option("--test-words", test_words);
  eval->add_option("--k", k);
  eval->add_option("--contamination", contamination);
  eval->add_option("--out", out_path)->required();

  auto* mk = app.add_subcommand("markov", "suspicion counter analysis");
  mk->add_option("--p", p, "per-word anomaly probability");
  mk->add_option("--t", t_chain, "t_suspicion");
  mk->add_option("--target", target);
  mk->add_option("--rate", rate, "words per second");
  mk->add_option("--out", out_path, "prefix for the curve CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      Scenario sc = io::load_scenario(scenario_path);
      if (seed) sc.seed = *seed;
      const DeviceConfig dev = pick_device(sc, device);
      const int n = count > 0 ? count : sc.words_per_device;
      std::vector<ArincWord> words(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) words[static_cast<std::size_t>(i)] = sc.words[static_cast<std::size_t>(i) % sc.words.size()];
      SynthesisOptions opts;
      opts.samples_per_bit = sc.samples_per_bit;
      const Trace t = synthesize_stream(dev.tx, dev.loads, words, sc.gap_bits, sc.seed, opts);
      save_trace(out_path, t, parse_trace_encoding(encoding));
    } else if (*segment) {
      const Trace t = load_trace(trace_path);
      const auto words = segment_stream(t);
      Output out(out_path);
      out.get() << "word_index,segment_index,segment_type,start_index,length\n";
      for (std::size_t w = 0; w < words.size(); ++w)
        for (std::size_t s = 0; s < words[w].size(); ++s)
          out.get() << w << "," << s << "," << to_string(words[w][s].seg_type) << "," << words[w][s].start_index << ","
                    << words[w][s].samples.size() << "\n";
    } else if (*features) {
      const FeatureSetId set = feature_set_arg(feature_set);
      const Trace t = load_trace(trace_path);
      Output out(out_path);
      write_features_csv(out.get(), set, segment_stream(t), options_for(t));
    } else if (*train) {
      const LofParams lof{k, contamination};
      WordDetector det;
      if (!features_path.empty()) {
        FeatureSetId set{};
        const auto rows = read_features_csv(features_path, set);
        if (train->count("--feature-set") && feature_set_arg(feature_set) != set)
          throw ConfigError("--feature-set disagrees with the features file");
        det = train_from_rows(rows, set, t_votes, lof, FeatureOptions{});
      } else {
        if (trace_path.empty()) throw ConfigError("train needs --trace or --features");
        const Trace t = load_trace(trace_path);
        std::size_t malformed = 0;
        auto words = segment_tolerant(t, Thresholds{}, malformed);
        std::erase_if(words, [](const WordSegments& w) { return w.empty(); });
        det = train_detector(words, feature_set_arg(feature_set), t_votes, lof, options_for(t));
      }
      io::write_json_file(out_path, io::to_json(det));
    } else if (*run) {
      WordDetector det = io::load_detector(model_path);
      if (run->count("--t-votes")) {
        if (t_votes < 0 || t_votes > static_cast<int>(kSegmentsPerWord)) throw ConfigError("t_votes must be in [0, 127]");
        det.t_votes = t_votes;
      }
      const Trace t = load_trace(trace_path);
      std::size_t malformed = 0;
      const auto words = segment_tolerant(t, Thresholds{}, malformed);
      const auto verdicts = classify_words(det, words);
      SuspicionCounter counter(t_suspicion);
      Output out(out_path);
      out.get() << "word_index,normal_votes,label,counter_value,alarmed\n";
      for (std::size_t w = 0; w < verdicts.size(); ++w) {
        counter = counter_step(counter, verdicts[w].label);
        out.get() << w << "," << verdicts[w].normal_votes << "," << to_string(verdicts[w].label) << ","
                  << counter.value << "," << (counter.alarmed ? "true" : "false") << "\n";
      }
    } else if (*eval) {
      Scenario sc = io::load_scenario(scenario_path);
      if (seed) sc.seed = *seed;
      if (eval->count("--k")) sc.lof.k = k;
      if (eval->count("--contamination")) sc.lof.contamination = contamination;
      EvalOptions o;
      o.t_votes = t_votes;
      o.reps = reps;
      // Without an explicit count, small scenarios test on all held-out words.
      const std::size_t held_out = static_cast<std::size_t>(sc.words_per_device) -
                                   training_count(static_cast<std::size_t>(sc.words_per_device));
      o.test_words = eval->count("--test-words") ? test_words : std::min(test_words, held_out);
      const Report r = evaluate(sc, feature_set_arg(feature_set), o);
      io::write_json_file(out_path + ".json", io::to_json(r));
      {
        Output out(out_path + "_curves.csv");
        out.get() << "t_votes,far,mdr\n";
        for (std::size_t i = 0; i < r.curves.far.size(); ++i)
          out.get() << i << "," << fmt(r.curves.far[i]) << "," << fmt(r.curves.mdr[i]) << "\n";
      }
      {
        Output out(out_path + "_counter_far.csv");
        out.get() << "t_suspicion,counter_far\n";
        for (const auto& [t, v] : r.counter_far) out.get() << t << "," << fmt(v) << "\n";
      }
      {
        Output out(out_path + "_detection.csv");
        out.get() << "t_suspicion,max_seconds,mean_seconds,censored\n";
        for (const auto& [t, s] : r.detection_time)
          out.get() << t << "," << fmt(s.max_seconds) << "," << fmt(s.mean_seconds) << "," << s.censored << "\n";
      }
      std::cout << "eer " << fmt(r.eer) << "\nfa_per_sec " << fmt(r.fa_per_sec) << "\n";
    } else if (*mk) {
      if (!out_path.empty()) write_markov_curves(out_path, target, rate);
      if (mk->count("--p") || out_path.empty()) {
        const auto d = markov::time_to_detect(p, t_chain, target);
        std::cout << "flight_false_alarm " << fmt(markov::flight_false_alarm(p, t_chain)) << "\n";
        if (d.words)
          std::cout << "words_to_target " << *d.words << "\nseconds " << fmt(*d.seconds(rate)) << "\n";
        else
          std::cout << "words_to_target inf\nseconds inf\n";
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
