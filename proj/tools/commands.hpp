// Copyright 2026 The ICDA Authors
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

#ifndef ICDA_TOOLS_COMMANDS_HPP_
#define ICDA_TOOLS_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace icda::cli {

// Each command writes its files under the configured output directory and
// returns the process exit status.
int cmd_beta_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_operators(const RunConfig& cfg, std::ostream& log);
int cmd_fixed_point(const RunConfig& cfg, std::ostream& log);
int cmd_gen_corpus(const RunConfig& cfg, std::ostream& log);
int cmd_icda(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);

// Full command line, args[0] being the program name. Exit status 0 iff all
// outputs were written and all validations passed; 2 for usage or
// configuration errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icda::cli

#endif  // ICDA_TOOLS_COMMANDS_HPP_
