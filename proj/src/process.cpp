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

#include "ugen/process.hpp"

#include <array>
#include <cerrno>
#include <csignal>
#include <cstdio>
#include <memory>

#include <sys/wait.h>
#include <unistd.h>

#include "ugen/error.hpp"

namespace ugen {

ChildProcess::ChildProcess(const std::string& command) {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) throw Error(ErrorCode::AdapterError, "pipe() failed");
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw Error(ErrorCode::AdapterError, "pipe() failed");
  }
  pid_ = fork();
  if (pid_ < 0) throw Error(ErrorCode::AdapterError, "fork() failed");
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  std::signal(SIGPIPE, SIG_IGN);
}

ChildProcess::~ChildProcess() { shutdown(); }

void ChildProcess::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ChildProcess::write_line(const std::string& line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = write(to_child_, data.data() + off, data.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::AdapterError, "child process closed its input");
    off += static_cast<std::size_t>(n);
  }
}

std::string ChildProcess::read_line() {
  for (;;) {
    auto pos = buffer_.find('\n');
    if (pos != std::string::npos) {
      std::string line = buffer_.substr(0, pos);
      buffer_.erase(0, pos + 1);
      return line;
    }
    std::array<char, 4096> chunk{};
    ssize_t n = read(from_child_, chunk.data(), chunk.size());
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::AdapterError, "child process closed its output");
    buffer_.append(chunk.data(), static_cast<std::size_t>(n));
  }
}

std::string run_command(const std::string& command) {
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) throw Error(ErrorCode::IoError, "cannot start: " + command);
  std::string out;
  std::array<char, 4096> chunk{};
  std::size_t n;
  while ((n = fread(chunk.data(), 1, chunk.size(), pipe.get())) > 0) out.append(chunk.data(), n);
  int status = pclose(pipe.release());
  if (status != 0) throw Error(ErrorCode::IoError, "command failed (" + std::to_string(status) + "): " + command);
  return out;
}

std::string shell_quote(const std::string& arg) {
  std::string out = "'";
  for (char c : arg) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace ugen
