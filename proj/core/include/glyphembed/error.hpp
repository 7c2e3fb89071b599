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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glyphembed {

// Every failure surfaced by the library carries one of these codes. Callers
// (CLI, HTTP service, tests) branch on the code, never on the message text.
enum class ErrorCode {
  // glyphset
  MissingGlyph,
  UnreadableFont,
  BlankGlyph,
  EmptyDataset,
  MixedLayout,
  InvalidSplit,
  DatasetTooSmall,
  InvalidCharset,
  ImageIo,
  // nncore
  ShapeMismatch,
  ModeMismatch,
  NonFiniteLoss,
  Corrupt,
  VersionMismatch,
  // objectives
  ZeroVector,
  BadBatch,
  LabelOutOfRange,
  // trainer
  NonFiniteGradient,
  ConfigInvalid,
  // evalkit
  SameCharacter,
  CharsetTooSmall,
  EmptyCharset,
  OverlappingCharsets,
  MissingAttributes,
  IncomparableReports,
  // fontindex
  ModelUnavailable,
  EmptyIndex,
  DegenerateData,
  UnknownFont,
  UnknownCharacter,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glyphembed
