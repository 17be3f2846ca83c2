#pragma once

#include <exception>
#include <optional>
#include <string>

namespace helmscale {

/// Base of every error raised by the library. A rank program failure is
/// annotated with the failing rank id before it leaves run_ranks.
class Error : public std::exception {
public:
  explicit Error(std::string message) : message_(std::move(message)) { compose(); }

  const char* what() const noexcept override { return what_.c_str(); }
  const std::string& message() const noexcept { return message_; }

  std::optional<int> rank() const noexcept { return rank_; }
  void set_rank(int rank) {
    rank_ = rank;
    compose();
  }

private:
  void compose() {
    what_ = rank_ ? "rank " + std::to_string(*rank_) + ": " + message_ : message_;
  }

  std::string message_;
  std::string what_;
  std::optional<int> rank_;
};

#define HELMSCALE_DEFINE_ERROR(Name)      \
  class Name : public Error {             \
  public:                                 \
    using Error::Error;                   \
  }

HELMSCALE_DEFINE_ERROR(GridError);
HELMSCALE_DEFINE_ERROR(DecompositionError);
HELMSCALE_DEFINE_ERROR(RankError);
HELMSCALE_DEFINE_ERROR(ProtocolError);
HELMSCALE_DEFINE_ERROR(ShapeError);
HELMSCALE_DEFINE_ERROR(InstrumentationError);
HELMSCALE_DEFINE_ERROR(ConfigError);
HELMSCALE_DEFINE_ERROR(NumericalError);
HELMSCALE_DEFINE_ERROR(IoError);
HELMSCALE_DEFINE_ERROR(FormatError);
HELMSCALE_DEFINE_ERROR(MetricsError);

#undef HELMSCALE_DEFINE_ERROR

/// Wraps a non-library exception thrown inside a rank program.
class RankFailure : public Error {
public:
  RankFailure(int rank, std::string message) : Error(std::move(message)) { set_rank(rank); }
};

}  // namespace helmscale
