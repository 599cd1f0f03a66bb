#include "process.hpp"

#include <cctype>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ppv/smt.hpp"

namespace ppv::smt {

namespace {

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int remaining_ms(Process::Clock::time_point deadline) {
  if (deadline == Process::Clock::time_point::max()) return -1;
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Process::Clock::now()).count();
  return left < 0 ? 0 : int(std::min<long long>(left, 1000 * 60 * 60));
}

}  // namespace

Process::Process(const std::string& path, const std::vector<std::string>& args) {
  static const bool sigpipe_ignored = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;

  int in[2], out[2], err[2], status[2];
  if (::pipe(in) || ::pipe(out) || ::pipe(err) || ::pipe2(status, O_CLOEXEC))
    throw SolverError(SolverError::Kind::Crashed, std::string("pipe: ") + std::strerror(errno));

  std::vector<std::string> argv_store{path};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw SolverError(SolverError::Kind::Crashed, std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    ::dup2(in[0], 0);
    ::dup2(out[1], 1);
    ::dup2(err[1], 2);
    for (int fd : {in[0], in[1], out[0], out[1], err[0], err[1], status[0]}) ::close(fd);
    ::execvp(argv[0], argv.data());
    int e = errno;
    [[maybe_unused]] auto n = ::write(status[1], &e, sizeof e);
    ::_exit(127);
  }
  ::close(in[0]);
  ::close(out[1]);
  ::close(err[1]);
  ::close(status[1]);
  int e = 0;
  ssize_t n = ::read(status[0], &e, sizeof e);
  ::close(status[0]);
  in_ = in[1];
  out_ = out[0];
  errfd_ = err[0];
  if (n == sizeof e) {
    kill();
    throw SolverError(SolverError::Kind::NotFound, "cannot execute solver '" + path + "': " + std::strerror(e));
  }
  set_nonblocking(in_);
  set_nonblocking(out_);
  set_nonblocking(errfd_);
}

Process::~Process() { kill(); }

void Process::kill() {
  close_fd(in_);
  close_fd(out_);
  close_fd(errfd_);
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    int st = 0;
    ::waitpid(pid_, &st, 0);
  }
  pid_ = -1;
}

bool Process::pump(Clock::time_point deadline, bool want_write) {
  pollfd fds[3];
  int n = 0;
  int out_slot = -1, err_slot = -1, in_slot = -1;
  if (out_ >= 0 && !eof_) {
    fds[n] = {out_, POLLIN, 0};
    out_slot = n++;
  }
  if (errfd_ >= 0) {
    fds[n] = {errfd_, POLLIN, 0};
    err_slot = n++;
  }
  if (want_write && in_ >= 0) {
    fds[n] = {in_, POLLOUT, 0};
    in_slot = n++;
  }
  if (n == 0) return true;
  int r = ::poll(fds, n, remaining_ms(deadline));
  if (r < 0 && errno == EINTR) return true;
  if (r == 0) return Clock::now() < deadline;

  char buf[65536];
  if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
    ssize_t k = ::read(out_, buf, sizeof buf);
    if (k > 0) outbuf_.append(buf, std::size_t(k));
    else if (k == 0) eof_ = true;
  }
  if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
    ssize_t k = ::read(errfd_, buf, sizeof buf);
    if (k > 0) err_.append(buf, std::size_t(k));
    else if (k == 0) close_fd(errfd_);
  }
  if (in_slot >= 0 && (fds[in_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
    if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
      pending_.clear();
      pending_off_ = 0;
      eof_ = true;
      return true;
    }
    ssize_t k = ::write(in_, pending_.data() + pending_off_, pending_.size() - pending_off_);
    if (k > 0) pending_off_ += std::size_t(k);
    else if (k < 0 && errno == EPIPE) {
      pending_.clear();
      pending_off_ = 0;
      eof_ = true;
    }
    if (pending_off_ == pending_.size()) {
      pending_.clear();
      pending_off_ = 0;
    }
  }
  return true;
}

bool Process::write(const std::string& data, Clock::time_point deadline) {
  pending_ += data;
  while (!pending_.empty()) {
    if (eof_)
      throw SolverError(SolverError::Kind::Crashed, "solver closed its input", err_);
    if (!pump(deadline, true)) return false;
  }
  return true;
}

bool Process::extract(std::string& out) {
  std::size_t i = 0;
  while (i < outbuf_.size() && std::isspace(static_cast<unsigned char>(outbuf_[i]))) ++i;
  if (i == outbuf_.size()) return false;
  std::size_t j = i;
  if (outbuf_[i] == '(') {
    int depth = 0;
    bool in_string = false, in_bar = false;
    for (; j < outbuf_.size(); ++j) {
      char ch = outbuf_[j];
      if (in_string) {
        if (ch == '"') in_string = false;
      } else if (in_bar) {
        if (ch == '|') in_bar = false;
      } else if (ch == '"') {
        in_string = true;
      } else if (ch == '|') {
        in_bar = true;
      } else if (ch == '(') {
        ++depth;
      } else if (ch == ')' && --depth == 0) {
        ++j;
        out = outbuf_.substr(i, j - i);
        outbuf_.erase(0, j);
        return true;
      }
    }
    return false;
  }
  while (j < outbuf_.size() && !std::isspace(static_cast<unsigned char>(outbuf_[j]))) ++j;
  if (j == outbuf_.size() && !eof_) return false;
  out = outbuf_.substr(i, j - i);
  outbuf_.erase(0, j);
  return true;
}

bool Process::read_expr(std::string& out, Clock::time_point deadline) {
  for (;;) {
    if (extract(out)) return true;
    if (eof_) throw SolverError(SolverError::Kind::Crashed, "solver exited unexpectedly", err_);
    if (!pump(deadline, !pending_.empty())) return false;
  }
}

}  // namespace ppv::smt
