/* Copyright 2026 The qnet Authors. All Rights Reserved.

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

#ifndef QNET_TOOLS_CLI_H_
#define QNET_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace qnet::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 2,
  kInfeasibleTarget = 3,
  kIoError = 4,
};

// Runs one `qnet` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace qnet::cli

#endif  // QNET_TOOLS_CLI_H_
