/**
 * Copyright 2026 The hplus Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HPLUS_ERROR_HPP_
#define HPLUS_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace hplus {

// Values are part of the C ABI (see hplus_c.h); append only.
enum class ErrorCode : int {
  kOk = 0,
  kEmptySelection = 1,
  kDimensionMismatch = 2,
  kInvalidRatio = 3,
  kInsufficientClients = 4,
  kInvalidReference = 5,
  kInvalidSelectionSize = 6,
  kMissingReference = 7,
  kInfeasiblePartition = 8,
  kFormatError = 9,
  kConfigError = 10,
  kIoError = 11,
  kEmptyPlot = 12,
  kDivergenceDetected = 13,
  kInvalidArgument = 14,
  kInternal = 15,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message), code_(code), detail_(message) {}
  // `detail` is kept separately from the human-readable reason.
  Error(ErrorCode code, const std::string &detail, const std::string &reason)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail + ": " + reason),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  // Message without the code prefix; for ConfigError this is the field path.
  const std::string &detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace hplus

#endif  // HPLUS_ERROR_HPP_
