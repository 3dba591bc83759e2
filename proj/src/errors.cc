// Copyright (c) 2026 The listalign Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "listalign/errors.h"

namespace listalign {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
      return "VALIDATION";
    case ErrorCode::kParse:
      return "PARSE";
    case ErrorCode::kDimension:
      return "DIMENSION";
    case ErrorCode::kConflict:
      return "CONFLICT";
    case ErrorCode::kNotFound:
      return "NOT_FOUND";
    case ErrorCode::kUndefined:
      return "UNDEFINED";
    case ErrorCode::kState:
      return "STATE";
    case ErrorCode::kIo:
      return "IO";
  }
  return "UNKNOWN";
}

}  // namespace listalign
