// Copyright (c) 2026 The plfuse Authors
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

#ifndef PLFUSE_COMMANDS_H_
#define PLFUSE_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

namespace plfuse {

enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitInternal = 3,
};

// Runs the command line `args` (args[0] is the program name) and returns the
// process exit status. Normal output goes to `out`, diagnostics to `err`.
//
// Subcommands: train-lm, decode, eval-wer, select, ppl, run-suite,
// generate-suite. Every command that writes files also writes
// <primary output>.run.json describing the resolved configuration.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace plfuse

#endif  // PLFUSE_COMMANDS_H_
