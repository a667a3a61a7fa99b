#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "afp/errors.hpp"

namespace afp {

inline constexpr double kDefaultBitRate = 100'000.0;
inline constexpr int kDefaultSamplesPerBit = 50;

// Uniformly sampled differential bus voltage with word-boundary markers.
struct Trace {
  double sample_rate = kDefaultBitRate * kDefaultSamplesPerBit;
  double bit_rate = kDefaultBitRate;
  std::vector<double> samples;
  std::vector<std::size_t> word_starts;

  double samples_per_bit() const { return sample_rate / bit_rate; }
  double sample_interval() const { return 1.0 / sample_rate; }
};

inline void validate(const Trace& t) {
  if (!(t.sample_rate > 0.0) || !(t.bit_rate > 0.0))
    throw InvalidArgument("trace rates must be positive");
  for (std::size_t i = 0; i < t.word_starts.size(); ++i) {
    if (t.word_starts[i] >= t.samples.size())
      throw InvalidArgument("word start " + std::to_string(i) + " out of bounds");
    if (i > 0 && t.word_starts[i] <= t.word_starts[i - 1])
      throw InvalidArgument("word starts must be strictly increasing");
  }
}

enum class TraceEncoding { f32le, csv };

inline const char* to_string(TraceEncoding e) { return e == TraceEncoding::f32le ? "f32le" : "csv"; }

inline TraceEncoding parse_trace_encoding(const std::string& s) {
  if (s == "f32le") return TraceEncoding::f32le;
  if (s == "csv") return TraceEncoding::csv;
  throw ConfigError("unknown trace encoding '" + s + "'");
}

// Trace file layout: one line holding the JSON header, then the body.
//   header: {sample_rate, bit_rate, word_starts, sample_count, encoding}
//   f32le body: sample_count little-endian IEEE-754 binary32 values
//   csv body:   "index,volts" lines
inline void write_trace(std::ostream& os, const Trace& t, TraceEncoding enc = TraceEncoding::f32le) {
  nlohmann::json header = {
      {"sample_rate", t.sample_rate},   {"bit_rate", t.bit_rate},
      {"word_starts", t.word_starts},   {"sample_count", t.samples.size()},
      {"encoding", to_string(enc)},
  };
  os << header.dump() << '\n';
  if (enc == TraceEncoding::csv) {
    std::ostringstream body;
    body.precision(17);
    for (std::size_t i = 0; i < t.samples.size(); ++i) body << i << ',' << t.samples[i] << '\n';
    os << body.str();
  } else {
    std::vector<unsigned char> bytes(t.samples.size() * 4);
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(t.samples[i]));
      for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!os) throw Error("failed writing trace");
}

inline Trace read_trace(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("trace file has no header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("trace header is not valid JSON: ") + e.what());
  }
  static const char* required[] = {"sample_rate", "bit_rate", "word_starts", "sample_count",
                                   "encoding"};
  for (const char* key : required)
    if (!header.contains(key)) throw ConfigError(std::string("trace header missing '") + key + "'");
  for (auto it = header.begin(); it != header.end(); ++it) {
    bool known = false;
    for (const char* key : required) known = known || it.key() == key;
    if (!known) throw ConfigError("unknown trace header key '" + it.key() + "'");
  }

  Trace t;
  try {
    t.sample_rate = header.at("sample_rate").get<double>();
    t.bit_rate = header.at("bit_rate").get<double>();
    t.word_starts = header.at("word_starts").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad trace header field: ") + e.what());
  }
  const auto count = header.at("sample_count").get<std::size_t>();
  const auto enc = parse_trace_encoding(header.at("encoding").get<std::string>());
  t.samples.resize(count);

  if (enc == TraceEncoding::csv) {
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(is, line)) throw ConfigError("trace body truncated");
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ConfigError("bad csv trace line " + std::to_string(i));
      if (std::stoull(line.substr(0, comma)) != i)
        throw ConfigError("csv trace index mismatch at line " + std::to_string(i));
      t.samples[i] = std::stod(line.substr(comma + 1));
    }
  } else {
    std::vector<unsigned char> bytes(count * 4);
    is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(is.gcount()) != bytes.size()) throw ConfigError("trace body truncated");
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
      t.samples[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  try {
    validate(t);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return t;
}

inline void save_trace(const std::string& path, const Trace& t,
                       TraceEncoding enc = TraceEncoding::f32le) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_trace(os, t, enc);
}

inline Trace load_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open trace '" + path + "'");
  return read_trace(is);
}

}  // namespace afp
