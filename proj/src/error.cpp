// Copyright 2026 The ugen Authors.
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

#include "ugen/error.hpp"

namespace ugen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyRecording: return "EmptyRecording";
    case ErrorCode::TextExtractionError: return "TextExtractionError";
    case ErrorCode::NoTargetWidget: return "NoTargetWidget";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InsufficientApps: return "InsufficientApps";
    case ErrorCode::UsageMismatch: return "UsageMismatch";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::ModelParseError: return "ModelParseError";
    case ErrorCode::NoModelForUsage: return "NoModelForUsage";
    case ErrorCode::AdapterError: return "AdapterError";
    case ErrorCode::NoMatchingState: return "NoMatchingState";
    case ErrorCode::NoRecommendation: return "NoRecommendation";
    case ErrorCode::InvalidChoice: return "InvalidChoice";
    case ErrorCode::FixtureError: return "FixtureError";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace ugen
