#pragma once

// Minimal subprocess helper for CLI contract tests (POSIX only).

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace voxbal::testsupport {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& s) {
  std::string quoted = "'";
  for (char c : s) {
    if (c == '\'')
      quoted += "'\\''";
    else
      quoted += c;
  }
  quoted += "'";
  return quoted;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs `argv` through the shell with stdout/stderr captured to temp files in
// `workdir`.
inline CmdResult run_cmd(const std::vector<std::string>& argv, const std::string& workdir) {
  std::string cmd;
  for (const auto& arg : argv) {
    if (!cmd.empty()) cmd += ' ';
    cmd += shell_quote(arg);
  }
  const std::string out_path = workdir + "/cmd_stdout.txt";
  const std::string err_path = workdir + "/cmd_stderr.txt";
  cmd += " > " + shell_quote(out_path) + " 2> " + shell_quote(err_path);
  const int status = std::system(cmd.c_str());
  CmdResult result;
  if (status >= 0 && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

}  // namespace voxbal::testsupport
