// Copyright 2026 The nash-unicast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nash_unicast {

enum class ErrorCode {
  // network
  kUnknownLink,
  kDuplicateLink,
  kNonPositiveCapacity,
  kDuplicateUser,
  kEmptyRoute,
  kMissingUser,
  kUnknownUser,
  // utilities
  kNegativeRate,
  kInvalidUtility,
  // mechanism
  kInvalidParams,
  kUserNotOnLink,
  kWrongGroupSize,
  kNoEligibleRecipient,
  kRateOutOfBounds,
  kPriceOutOfBounds,
  kRouteMismatch,
  // solver
  kNotConverged,
  kNonConcaveUtility,
  kGridTooLarge,
  // equilibrium
  kPriceBoundExceeded,
  kNonUniformPrices,
  kNoZeroTaxPrice,
  // scenario files
  kParseError,
  kValidationError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownLink: return "UnknownLink";
    case ErrorCode::kDuplicateLink: return "DuplicateLink";
    case ErrorCode::kNonPositiveCapacity: return "NonPositiveCapacity";
    case ErrorCode::kDuplicateUser: return "DuplicateUser";
    case ErrorCode::kEmptyRoute: return "EmptyRoute";
    case ErrorCode::kMissingUser: return "MissingUser";
    case ErrorCode::kUnknownUser: return "UnknownUser";
    case ErrorCode::kNegativeRate: return "NegativeRate";
    case ErrorCode::kInvalidUtility: return "InvalidUtility";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kUserNotOnLink: return "UserNotOnLink";
    case ErrorCode::kWrongGroupSize: return "WrongGroupSize";
    case ErrorCode::kNoEligibleRecipient: return "NoEligibleRecipient";
    case ErrorCode::kRateOutOfBounds: return "RateOutOfBounds";
    case ErrorCode::kPriceOutOfBounds: return "PriceOutOfBounds";
    case ErrorCode::kRouteMismatch: return "RouteMismatch";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kNonConcaveUtility: return "NonConcaveUtility";
    case ErrorCode::kGridTooLarge: return "GridTooLarge";
    case ErrorCode::kPriceBoundExceeded: return "PriceBoundExceeded";
    case ErrorCode::kNonUniformPrices: return "NonUniformPrices";
    case ErrorCode::kNoZeroTaxPrice: return "NoZeroTaxPrice";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as this exception; `code()` is the
/// machine-readable part, `what()` carries "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nash_unicast
