#pragma once

#include <chrono>
#include <string>
#include <sys/types.h>
#include <vector>

namespace ppv::smt {

/// Child process speaking over its standard streams. Standard error is
/// collected in the background of every read so the child never blocks on it.
class Process {
 public:
  using Clock = std::chrono::steady_clock;

  /// Throws SolverError(NotFound) if exec fails.
  Process(const std::string& path, const std::vector<std::string>& args);
  ~Process();
  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  /// Writes everything, draining the child's output meanwhile.
  /// Returns false if the deadline passed.
  bool write(const std::string& data, Clock::time_point deadline);
  /// Next complete top-level S-expression or atom on stdout. Returns false on
  /// deadline; throws SolverError(Crashed) on EOF.
  bool read_expr(std::string& out, Clock::time_point deadline);

  void kill();
  bool alive() const { return pid_ > 0; }
  const std::string& stderr_text() const { return err_; }

 private:
  bool pump(Clock::time_point deadline, bool want_write);
  bool extract(std::string& out);

  pid_t pid_ = -1;
  int in_ = -1, out_ = -1, errfd_ = -1;
  std::string outbuf_, err_, pending_;
  std::size_t pending_off_ = 0;
  bool eof_ = false;
};

}  // namespace ppv::smt
