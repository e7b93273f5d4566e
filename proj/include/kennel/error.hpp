#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kennel {

/// Every failure raised by the library carries a dotted class name such as
/// `io.missing` or `quat.degenerate`. The prefix before the first dot selects
/// the process exit code used by the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(std::string error_class, const std::string& message)
      : std::runtime_error(message), class_(std::move(error_class)) {}

  const std::string& error_class() const noexcept { return class_; }

  /// 2 for io/format, 3 for config/data, 4 for numeric/quat/shape, 5 for acceptance.
  int exit_code() const noexcept;

 private:
  std::string class_;
};

namespace errc {
inline constexpr std::string_view kIoMissing = "io.missing";
inline constexpr std::string_view kIoWrite = "io.write";
inline constexpr std::string_view kFormat = "format.error";
inline constexpr std::string_view kDimMismatch = "format.dim_mismatch";
inline constexpr std::string_view kConfig = "config.invalid";
inline constexpr std::string_view kDegenerateQuaternion = "quat.degenerate";
inline constexpr std::string_view kDegenerateMean = "quat.degenerate_mean";
inline constexpr std::string_view kOutOfCoverage = "data.out_of_coverage";
inline constexpr std::string_view kNoFramesRetained = "data.no_frames_retained";
inline constexpr std::string_view kTooShort = "data.too_short";
inline constexpr std::string_view kInsufficientData = "data.insufficient";
inline constexpr std::string_view kEmptyInput = "data.empty";
inline constexpr std::string_view kEmptyTrainingSet = "data.empty_training_set";
inline constexpr std::string_view kIndexOutOfRange = "data.index_out_of_range";
inline constexpr std::string_view kZeroFrequency = "numeric.zero_frequency";
inline constexpr std::string_view kZeroProbability = "numeric.zero_probability";
inline constexpr std::string_view kNonFinite = "numeric.non_finite";
inline constexpr std::string_view kShapeMismatch = "numeric.shape_mismatch";
inline constexpr std::string_view kAcceptance = "acceptance.failed";
}  // namespace errc

[[noreturn]] inline void fail(std::string_view error_class, const std::string& message) {
  throw Error(std::string(error_class), message);
}

}  // namespace kennel
