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

#pragma once

#include <string>
#include <sys/types.h>

namespace ugen {

/// Child process driven through line-oriented stdin/stdout pipes. The command
/// runs under /bin/sh -c.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  /// Writes `line` plus a newline. Throws Error(AdapterError) if the pipe is closed.
  void write_line(const std::string& line);

  /// Reads up to the next newline. Throws Error(AdapterError) on EOF.
  std::string read_line();

  bool running() const { return pid_ > 0; }

 private:
  void shutdown();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Runs a shell command to completion and returns its stdout.
/// Throws Error(IoError) when the command cannot start or exits non-zero.
std::string run_command(const std::string& command);

/// Single-quotes `arg` for /bin/sh.
std::string shell_quote(const std::string& arg);

}  // namespace ugen
