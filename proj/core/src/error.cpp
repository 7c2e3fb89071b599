/*
 * Copyright (C) 2026 The glyphembed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "glyphembed/error.hpp"

namespace glyphembed {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingGlyph: return "MissingGlyph";
    case ErrorCode::UnreadableFont: return "UnreadableFont";
    case ErrorCode::BlankGlyph: return "BlankGlyph";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::MixedLayout: return "MixedLayout";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::InvalidCharset: return "InvalidCharset";
    case ErrorCode::ImageIo: return "ImageIo";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::Corrupt: return "Corrupt";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::BadBatch: return "BadBatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::SameCharacter: return "SameCharacter";
    case ErrorCode::CharsetTooSmall: return "CharsetTooSmall";
    case ErrorCode::EmptyCharset: return "EmptyCharset";
    case ErrorCode::OverlappingCharsets: return "OverlappingCharsets";
    case ErrorCode::MissingAttributes: return "MissingAttributes";
    case ErrorCode::IncomparableReports: return "IncomparableReports";
    case ErrorCode::ModelUnavailable: return "ModelUnavailable";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::UnknownFont: return "UnknownFont";
    case ErrorCode::UnknownCharacter: return "UnknownCharacter";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace glyphembed
