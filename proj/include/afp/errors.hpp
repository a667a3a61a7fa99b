#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace afp {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied a parameter outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A configuration document failed schema validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The threshold-crossing sequence of a word is not produced by any legal bit pattern.
class MalformedSignal : public Error {
 public:
  MalformedSignal(std::string what, std::size_t sample_index,
                  std::optional<std::size_t> word_index = std::nullopt)
      : Error(format(what, sample_index, word_index)),
        reason_(std::move(what)),
        sample_index_(sample_index),
        word_index_(word_index) {}

  std::size_t sample_index() const noexcept { return sample_index_; }
  std::optional<std::size_t> word_index() const noexcept { return word_index_; }
  const std::string& reason() const noexcept { return reason_; }

  MalformedSignal with_word(std::size_t word) const {
    return MalformedSignal(reason_, sample_index_, word);
  }

 private:
  static std::string format(const std::string& what, std::size_t sample,
                            std::optional<std::size_t> word) {
    std::string msg = "malformed signal at sample " + std::to_string(sample);
    if (word) msg += " of word " + std::to_string(*word);
    return msg + ": " + what;
  }

  std::string reason_;
  std::size_t sample_index_;
  std::optional<std::size_t> word_index_;
};

class SegmentTooShort : public Error {
 public:
  SegmentTooShort(std::size_t have, std::size_t need)
      : Error("segment has " + std::to_string(have) + " samples, " + std::to_string(need) +
              " required"),
        have_(have),
        need_(need) {}
  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

 private:
  std::size_t have_;
  std::size_t need_;
};

class ExcludedSegmentType : public Error {
 public:
  using Error::Error;
};

}  // namespace afp
