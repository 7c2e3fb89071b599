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

#include <ostream>
#include <string>
#include <vector>

#include "glyphembed/error.hpp"

namespace glyphembed::iface {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitValidation = 2 };

// Errors caused by the invocation or its inputs (exit 2) rather than by a
// failure while running (exit 1).
bool is_validation_error(ErrorCode code) noexcept;

// Runs `glyphembed <subcommand> ...`. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glyphembed::iface
