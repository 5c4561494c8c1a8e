#include "prospero/protocol.hpp"

#include "prospero/error.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

namespace prospero {

namespace {

[[noreturn]] void unavailable(const std::string& message) {
  throw Error(ErrorKind::ExternalPriorUnavailable, message);
}

void write_all(int fd, const std::string& data, int flags, bool socket) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = socket ? ::send(fd, data.data() + off, data.size() - off, flags)
                             : ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      unavailable(std::string("write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string read_line_from(int fd, std::string& buffer, std::chrono::milliseconds timeout) {
  while (true) {
    const auto nl = buffer.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    pollfd p{fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      unavailable(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) unavailable("timed out waiting for the prior server");
    char chunk[4096];
    const ssize_t n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      unavailable(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) unavailable("prior server closed the connection");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

ChildProcessChannel::ChildProcessChannel(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (command.empty()) unavailable("empty prior command");
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) unavailable("pipe failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    unavailable("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) unavailable("fork failed");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

ChildProcessChannel::~ChildProcessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, &status, 0);
  }
}

void ChildProcessChannel::send_line(const std::string& line) { write_all(to_child_, line + "\n", 0, false); }

std::string ChildProcessChannel::read_line() { return read_line_from(from_child_, buffer_, timeout_); }

TcpChannel::TcpChannel(const std::string& endpoint, std::chrono::milliseconds timeout) : timeout_(timeout) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) unavailable("TCP endpoint must be host:port, got '" + endpoint + "'");
  const std::string host = endpoint.substr(0, colon);
  const std::string port = endpoint.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0) unavailable("cannot resolve '" + endpoint + "'");
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (fd_ < 0) unavailable("cannot connect to '" + endpoint + "'");
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send_line(const std::string& line) { write_all(fd_, line + "\n", MSG_NOSIGNAL, true); }

std::string TcpChannel::read_line() { return read_line_from(fd_, buffer_, timeout_); }

nlohmann::json hello_request() {
  return {{"op", "hello"}, {"version", kProtocolVersion}, {"alphabet", std::string(kAlphabet)}};
}

nlohmann::json logprobs_request(const MaskedSequence& context, std::size_t pos) {
  return {{"op", "logprobs"}, {"tokens", context.tokens()}, {"position", pos + 1}};
}

std::optional<std::string> check_logprobs_response(const nlohmann::json& response) {
  if (!response.is_object()) return "response is not an object";
  if (!response.contains("op") || !response["op"].is_string()) return "missing op";
  if (response["op"] != "logprobs_ok") return "unexpected op " + response["op"].dump();
  if (!response.contains("values") || !response["values"].is_array()) return "missing values";
  const auto& values = response["values"];
  if (values.size() != kAlphabetSize) return "expected 20 values, got " + std::to_string(values.size());
  std::array<double, kAlphabetSize> v{};
  for (std::size_t i = 0; i < kAlphabetSize; ++i) {
    if (!values[i].is_number()) return "value " + std::to_string(i) + " is not a number";
    v[i] = values[i].get<double>();
    if (std::isnan(v[i]) || v[i] == std::numeric_limits<double>::infinity()) {
      return "value " + std::to_string(i) + " is not a log-probability";
    }
  }
  const double lse = logsumexp(v);
  if (!(std::abs(lse) <= kLogsumexpTolerance)) return "values not normalized (logsumexp " + std::to_string(lse) + ")";
  return std::nullopt;
}

ExternalPrior::ExternalPrior(std::unique_ptr<LineChannel> channel) : channel_(std::move(channel)) {
  channel_->send_line(hello_request().dump());
  const std::string line = channel_->read_line();
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    unavailable("handshake reply is not JSON: " + line);
  }
  if (reply.is_object() && reply.value("op", "") == "error") {
    unavailable("prior server refused handshake: " + reply.value("message", std::string{}));
  }
  if (!reply.is_object() || reply.value("op", "") != "hello_ok" || !reply.contains("model") ||
      !reply["model"].is_string()) {
    unavailable("bad handshake reply: " + line);
  }
  model_ = reply["model"].get<std::string>();
}

ProtocolStats ExternalPrior::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

LogProbs ExternalPrior::compute_logprobs(const MaskedSequence& context, std::size_t pos) const {
  std::lock_guard lock(mutex_);
  ++stats_.queries;
  channel_->send_line(logprobs_request(context, pos).dump());
  const std::string line = channel_->read_line();
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    ++stats_.malformed;
    throw Error(ErrorKind::ProtocolError, "response is not JSON: " + line.substr(0, 200));
  }
  if (reply.is_object() && reply.value("op", "") == "error") {
    ++stats_.error_responses;
    throw Error(ErrorKind::ProtocolError, "prior server error: " + reply.value("message", std::string{}));
  }
  if (const auto problem = check_logprobs_response(reply)) {
    ++stats_.malformed;
    throw Error(ErrorKind::ProtocolError, *problem);
  }
  LogProbs out{};
  for (std::size_t i = 0; i < kAlphabetSize; ++i) out[i] = reply["values"][i].get<double>();
  // Remove the residual normalization error the tolerance allows.
  const double lse = logsumexp(out);
  for (auto& v : out) v -= lse;
  return out;
}

std::unique_ptr<ExternalPrior> ExternalPrior::spawn(const std::string& command) {
  return std::make_unique<ExternalPrior>(std::make_unique<ChildProcessChannel>(command));
}

std::unique_ptr<ExternalPrior> ExternalPrior::connect(const std::string& endpoint) {
  return std::make_unique<ExternalPrior>(std::make_unique<TcpChannel>(endpoint));
}

}  // namespace prospero
