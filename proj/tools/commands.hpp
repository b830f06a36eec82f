/* Copyright 2026 The NCS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef NCS_TOOLS_COMMANDS_HPP_
#define NCS_TOOLS_COMMANDS_HPP_

namespace ncs::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 2;
inline constexpr int kEvaluatorError = 3;
inline constexpr int kInternalError = 4;

// Parses argv, dispatches the subcommand and maps errors to exit codes.
int run(int argc, char** argv);

}  // namespace ncs::cli

#endif  // NCS_TOOLS_COMMANDS_HPP_
