#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/features.hpp"
#include "afp/lof.hpp"
#include "afp/parallel.hpp"
#include "afp/segmentation.hpp"

namespace afp {

inline constexpr std::size_t kMinTrainingWords = 200;

// Per-segment-type LOF models plus the word-level voting rule.
struct WordDetector {
  FeatureSetId set_id = FeatureSetId::RAW;
  int t_votes = 100;
  LofParams lof;
  FeatureOptions features;
  std::map<SegmentType, LofModel> models;
};

struct WordVerdict {
  Label label = Label::normal;
  int normal_votes = 0;
  int counted = 0;  // segments that took part in the vote
};

inline WordDetector train_detector(std::span<const WordSegments> normal_words, FeatureSetId set_id,
                                   int t_votes, LofParams lof = {}, FeatureOptions features = {}) {
  if (t_votes < 0 || t_votes > static_cast<int>(kSegmentsPerWord))
    throw InvalidArgument("t_votes must be in [0, 127]");
  if (normal_words.size() < kMinTrainingWords)
    throw InvalidArgument("training needs at least " + std::to_string(kMinTrainingWords) +
                          " words, got " + std::to_string(normal_words.size()));

  std::array<std::vector<std::vector<double>>, kSegmentTypeCount> pools;
  for (const auto& word : normal_words) {
    for (const auto& seg : word) {
      if (!participates(set_id, seg.seg_type)) continue;
      try {
        if (auto fv = extract(set_id, seg, features)) pools[index_of(seg.seg_type)].push_back(std::move(fv->values));
      } catch (const SegmentTooShort&) {
        // Rare short segments are left out of training; at test time they vote anomaly.
      }
    }
  }

  WordDetector det;
  det.set_id = set_id;
  det.t_votes = t_votes;
  det.lof = lof;
  det.features = features;
  std::vector<SegmentType> types;
  for (SegmentType t : kAllSegmentTypes) {
    const auto& pool = pools[index_of(t)];
    if (!participates(set_id, t) || pool.empty()) continue;
    if (pool.size() < static_cast<std::size_t>(lof.k) + 2)
      throw InvalidArgument("insufficient " + std::string(to_string(t)) + " segments for training (" +
                            std::to_string(pool.size()) + ")");
    types.push_back(t);
  }
  std::vector<LofModel> fitted(types.size());
  parallel_for(types.size(), [&](std::size_t i) { fitted[i] = lof_fit(pools[index_of(types[i])], lof); });
  for (std::size_t i = 0; i < types.size(); ++i) det.models.emplace(types[i], std::move(fitted[i]));
  return det;
}

// Segments without a feature vector are left out of the vote. A segment too
// short for its feature set counts as an anomalous vote.
inline WordVerdict classify_word(const WordDetector& det, const WordSegments& segs) {
  WordVerdict v;
  for (const auto& seg : segs) {
    if (!participates(det.set_id, seg.seg_type)) continue;
    auto it = det.models.find(seg.seg_type);
    if (it == det.models.end())
      throw InvalidArgument("detector has no model for segment type " + std::string(to_string(seg.seg_type)));
    ++v.counted;
    std::optional<FeatureVector> fv;
    try {
      fv = extract(det.set_id, seg, det.features);
    } catch (const SegmentTooShort&) {
      continue;
    }
    if (fv && lof_classify(it->second, fv->values) == Label::normal) ++v.normal_votes;
  }
  v.label = v.normal_votes <= det.t_votes ? Label::anomaly : Label::normal;
  return v;
}

inline std::vector<WordVerdict> classify_words(const WordDetector& det, std::span<const WordSegments> words) {
  std::vector<WordVerdict> out(words.size());
  parallel_for(words.size(), [&](std::size_t i) { out[i] = classify_word(det, words[i]); });
  return out;
}

// Saturating anomaly counter; the alarm state is absorbing.
struct SuspicionCounter {
  int value = 0;
  int t_suspicion = 1;
  bool alarmed = false;

  explicit SuspicionCounter(int threshold = 1) : t_suspicion(threshold) {
    if (threshold < 1) throw InvalidArgument("t_suspicion must be >= 1");
  }
};

inline SuspicionCounter counter_step(SuspicionCounter c, Label label) {
  if (c.alarmed) return c;
  if (label == Label::anomaly)
    ++c.value;
  else if (c.value > 0)
    --c.value;
  if (c.value >= c.t_suspicion) {
    c.value = c.t_suspicion;
    c.alarmed = true;
  }
  return c;
}

// Feeds labels from `next(i)`, i = 0..n-1, into the counter. Returns the 1-based
// index of the word that raised the alarm.
template <class LabelSource>
std::optional<std::size_t> run_labels(SuspicionCounter& counter, std::size_t n, LabelSource&& next) {
  for (std::size_t i = 0; i < n; ++i) {
    counter = counter_step(counter, next(i));
    if (counter.alarmed) return i + 1;
  }
  return std::nullopt;
}

inline std::optional<std::size_t> run_stream(const WordDetector& det, SuspicionCounter& counter,
                                             std::span<const WordSegments> words) {
  return run_labels(counter, words.size(),
                    [&](std::size_t i) { return classify_word(det, words[i]).label; });
}

}  // namespace afp
