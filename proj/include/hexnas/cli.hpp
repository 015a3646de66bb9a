// Copyright 2026 The hexnas Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The hexnas command line: gendata, train, eval, nas, gradcheck, report, dot.
//
// Every subcommand accepts `--config FILE` holding `key = value` lines (keys
// are the long flag names, `#` starts a comment). Flags given on the command
// line override the file. Each run writes one JSON manifest next to its
// outputs.

#ifndef HEXNAS_CLI_HPP_
#define HEXNAS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace hexnas::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // gradcheck above threshold
  kUsage = 2,        // bad flags, missing inputs, incompatible files
  kRuntime = 3,      // divergence, failed search, I/O failure while writing
};

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace hexnas::cli

#endif  // HEXNAS_CLI_HPP_
