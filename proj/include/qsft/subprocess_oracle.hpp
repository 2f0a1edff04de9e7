// Oracle backed by an external command. Each invocation passes a batch of
// digit-string indices as argv and reads one "<re> <im>" line per index from
// stdout, in order. Results are cached so each unique index costs one line of
// subprocess output.

#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "qsft/oracle.hpp"

namespace qsft {

class SubprocessOracle final : public FunctionOracle {
 public:
  SubprocessOracle(const std::string& command, std::uint32_t q, std::size_t n,
                   std::size_t batch_limit = 512)
      : FunctionOracle(q, n, /*cache=*/true), batch_limit_(batch_limit) {
    std::istringstream ss(command);
    std::string tok;
    while (ss >> tok) argv_.push_back(tok);
    if (argv_.empty()) throw std::invalid_argument("subprocess oracle: empty command");
  }

 protected:
  cplx evaluate(const QIndex& m, std::uint64_t repeat) override {
    std::vector<cplx> out(1);
    evaluate_batch({m}, {repeat}, out);
    return out[0];
  }

  void evaluate_batch(const std::vector<QIndex>& ms, const std::vector<std::uint64_t>&,
                      std::vector<cplx>& out) override {
    out.resize(ms.size());
    for (std::size_t start = 0; start < ms.size(); start += batch_limit_) {
      const std::size_t count = std::min(batch_limit_, ms.size() - start);
      run_chunk(ms, start, count, out);
    }
  }

 private:
  void run_chunk(const std::vector<QIndex>& ms, std::size_t start, std::size_t count,
                 std::vector<cplx>& out) {
    std::vector<std::string> args(argv_);
    for (std::size_t i = 0; i < count; ++i) args.push_back(ms[start + i].to_string());

    int fds[2];
    if (pipe(fds) != 0) throw OracleError("subprocess oracle: pipe failed");
    const pid_t pid = fork();
    if (pid < 0) {
      close(fds[0]);
      close(fds[1]);
      throw OracleError("subprocess oracle: fork failed");
    }
    if (pid == 0) {
      // Child: stdout into the pipe, then exec.
      dup2(fds[1], STDOUT_FILENO);
      close(fds[0]);
      close(fds[1]);
      std::vector<char*> argv;
      argv.reserve(args.size() + 1);
      for (auto& a : args) argv.push_back(a.data());
      argv.push_back(nullptr);
      execvp(argv[0], argv.data());
      _exit(127);
    }
    close(fds[1]);
    std::string captured;
    char buf[4096];
    ssize_t got;
    while ((got = read(fds[0], buf, sizeof buf)) > 0) captured.append(buf, got);
    close(fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFSIGNALED(status))
      throw OracleError("subprocess oracle: command killed by signal " +
                        std::to_string(WTERMSIG(status)) + " while evaluating index " +
                        ms[start].to_string());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      throw OracleError("subprocess oracle: command exited with status " +
                        std::to_string(WEXITSTATUS(status)) + " while evaluating index " +
                        ms[start].to_string());

    // One output line per index, in order: "<re> <im>", or a lone real.
    std::istringstream ss(captured);
    std::string line;
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(ss, line))
        throw OracleError("subprocess oracle: missing output for index " +
                          ms[start + i].to_string());
      std::istringstream ls(line);
      double re = 0.0, im = 0.0;
      if (!(ls >> re))
        throw OracleError("subprocess oracle: unparseable output '" + line +
                          "' for index " + ms[start + i].to_string());
      if (!(ls >> im)) im = 0.0;
      out[start + i] = {re, im};
    }
  }

  std::vector<std::string> argv_;
  std::size_t batch_limit_;
};

}  // namespace qsft
