#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "afp/errors.hpp"
#include "afp/trace.hpp"

namespace afp {

enum class SegmentType : int {
  LO = 0,
  HI,
  NULL_HH,
  NULL_HL,
  NULL_LL,
  NULL_LH,
  UP_FROM_LO,
  UP_FROM_NULL,
  DOWN_FROM_HI,
  DOWN_FROM_NULL,
};

inline constexpr std::size_t kSegmentTypeCount = 10;
inline constexpr std::size_t kSegmentsPerWord = 127;

inline constexpr std::array<SegmentType, kSegmentTypeCount> kAllSegmentTypes{
    SegmentType::LO,           SegmentType::HI,           SegmentType::NULL_HH,
    SegmentType::NULL_HL,      SegmentType::NULL_LL,      SegmentType::NULL_LH,
    SegmentType::UP_FROM_LO,   SegmentType::UP_FROM_NULL, SegmentType::DOWN_FROM_HI,
    SegmentType::DOWN_FROM_NULL,
};

constexpr std::size_t index_of(SegmentType t) { return static_cast<std::size_t>(t); }

constexpr std::string_view to_string(SegmentType t) {
  constexpr std::array<std::string_view, kSegmentTypeCount> names{
      "LO",      "HI",         "NULL_HH",      "NULL_HL",      "NULL_LL",
      "NULL_LH", "UP_FROM_LO", "UP_FROM_NULL", "DOWN_FROM_HI", "DOWN_FROM_NULL"};
  return names[index_of(t)];
}

inline SegmentType parse_segment_type(std::string_view s) {
  for (SegmentType t : kAllSegmentTypes)
    if (to_string(t) == s) return t;
  throw ConfigError("unknown segment type '" + std::string(s) + "'");
}

constexpr bool is_transition(SegmentType t) {
  return t == SegmentType::UP_FROM_LO || t == SegmentType::UP_FROM_NULL ||
         t == SegmentType::DOWN_FROM_HI || t == SegmentType::DOWN_FROM_NULL;
}

// Hysteresis thresholds in volts; the negated values delimit the LO side.
struct Thresholds {
  double v_l1 = 2.0;
  double v_l2 = 2.8;
  double v_h1 = 8.0;
  double v_h2 = 7.2;
};

inline void validate(const Thresholds& t) {
  if (!(0.0 < t.v_l1 && t.v_l1 < t.v_l2 && t.v_l2 < t.v_h2 && t.v_h2 < t.v_h1))
    throw InvalidArgument("thresholds must satisfy 0 < v_l1 < v_l2 < v_h2 < v_h1");
}

struct Segment {
  SegmentType seg_type = SegmentType::HI;
  std::vector<double> samples;
  std::size_t start_index = 0;  // relative to the word start
};

using WordSegments = std::vector<Segment>;

// Splits the word beginning at `word_start` into its 127 segments. Segments are
// half-open: a segment owns the first sample past its starting crossing and stops
// before the sample that completes its ending crossing. The leading NULL before
// the first transition and the trailing NULL after bit 32 belong to no segment.
inline WordSegments segment_word(const Trace& trace, std::size_t word_start,
                                 const Thresholds& th = {}) {
  validate(th);
  const auto& s = trace.samples;
  if (word_start >= s.size()) throw MalformedSignal("word start beyond end of trace", word_start);

  const double spb = trace.samples_per_bit();
  const auto max_len = static_cast<std::size_t>(std::ceil(spb));
  const std::size_t limit = std::min(s.size(), word_start + static_cast<std::size_t>(33.0 * spb));

  enum class State { Null, UpFromNull, Hi, DownFromHi, DownFromNull, Lo, UpFromLo };
  enum class Last { None, High, Low };

  WordSegments segs;
  segs.reserve(kSegmentsPerWord);
  State state = State::Null;
  Last last = Last::None;
  SegmentType cur = SegmentType::HI;
  std::size_t cur_start = word_start;
  bool open = false;
  int bits = 0;

  auto close = [&](std::size_t end) {
    Segment seg;
    seg.seg_type = cur;
    seg.start_index = cur_start - word_start;
    seg.samples.assign(s.begin() + static_cast<std::ptrdiff_t>(cur_start),
                       s.begin() + static_cast<std::ptrdiff_t>(end));
    segs.push_back(std::move(seg));
    open = false;
  };
  auto begin = [&](SegmentType t, std::size_t at) {
    cur = t;
    cur_start = at;
    open = true;
  };

  if (std::abs(s[word_start]) >= th.v_l1)
    throw MalformedSignal("word does not start in NULL", word_start);

  for (std::size_t i = word_start; i < limit; ++i) {
    const double v = s[i];
    if (open && i - cur_start > max_len)
      throw MalformedSignal(std::string(to_string(cur)) + " segment longer than a bit period", i);
    switch (state) {
      case State::Null:
        if (v > th.v_l2) {
          if (open) cur = last == Last::High ? SegmentType::NULL_HH : SegmentType::NULL_LH;
          if (open) close(i);
          begin(SegmentType::UP_FROM_NULL, i);
          state = State::UpFromNull;
        } else if (v < -th.v_l2) {
          if (open) cur = last == Last::High ? SegmentType::NULL_HL : SegmentType::NULL_LL;
          if (open) close(i);
          begin(SegmentType::DOWN_FROM_NULL, i);
          state = State::DownFromNull;
        }
        break;
      case State::UpFromNull:
        if (v > th.v_h1) {
          close(i);
          begin(SegmentType::HI, i);
          state = State::Hi;
        } else if (v < th.v_l1) {
          throw MalformedSignal("rising transition from NULL aborted", i);
        }
        break;
      case State::Hi:
        if (v < th.v_h2) {
          close(i);
          begin(SegmentType::DOWN_FROM_HI, i);
          state = State::DownFromHi;
        }
        break;
      case State::DownFromHi:
        if (v < th.v_l1) {
          close(i);
          if (++bits == 32) return segs;
          begin(SegmentType::NULL_HH, i);  // variant settled by the next transition
          last = Last::High;
          state = State::Null;
        } else if (v > th.v_h1) {
          throw MalformedSignal("falling transition from HI aborted", i);
        }
        break;
      case State::DownFromNull:
        if (v < -th.v_h1) {
          close(i);
          begin(SegmentType::LO, i);
          state = State::Lo;
        } else if (v > -th.v_l1) {
          throw MalformedSignal("falling transition from NULL aborted", i);
        }
        break;
      case State::Lo:
        if (v > -th.v_h2) {
          close(i);
          begin(SegmentType::UP_FROM_LO, i);
          state = State::UpFromLo;
        }
        break;
      case State::UpFromLo:
        if (v > -th.v_l1) {
          close(i);
          if (++bits == 32) return segs;
          begin(SegmentType::NULL_LL, i);
          last = Last::Low;
          state = State::Null;
        } else if (v < -th.v_h1) {
          throw MalformedSignal("rising transition from LO aborted", i);
        }
        break;
    }
  }
  throw MalformedSignal("word ended after " + std::to_string(bits) + " of 32 bits", limit);
}

// Segments every word of a trace; errors carry the 0-based word index.
inline std::vector<WordSegments> segment_stream(const Trace& trace, const Thresholds& th = {}) {
  std::vector<WordSegments> out;
  out.reserve(trace.word_starts.size());
  for (std::size_t w = 0; w < trace.word_starts.size(); ++w) {
    try {
      out.push_back(segment_word(trace, trace.word_starts[w], th));
    } catch (const MalformedSignal& e) {
      throw e.with_word(w);
    }
  }
  return out;
}

}  // namespace afp
