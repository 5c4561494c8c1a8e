#pragma once

// Client side of the external-prior wire protocol: newline-delimited JSON
// over a child process's stdio or a TCP connection.
//
//   -> {"op":"hello","version":1,"alphabet":"ACDEFGHIKLMNPQRSTVWY"}
//   <- {"op":"hello_ok","model":"<name>"}
//   -> {"op":"logprobs","tokens":[0..19 or -1 per position],"position":<1-based>}
//   <- {"op":"logprobs_ok","values":[20 numbers]}   logsumexp within 1e-6 of 0
//   <- {"op":"error","message":"..."}                for any failed request

#include "prospero/prior.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace prospero {

inline constexpr int kProtocolVersion = 1;
inline constexpr double kLogsumexpTolerance = 1e-6;

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// Throws ExternalPriorUnavailable when the peer is gone.
  virtual void send_line(const std::string& line) = 0;
  /// Throws ExternalPriorUnavailable on EOF or timeout.
  virtual std::string read_line() = 0;
};

/// Runs `command` through /bin/sh -c and talks to its stdin/stdout.
class ChildProcessChannel final : public LineChannel {
 public:
  explicit ChildProcessChannel(const std::string& command,
                               std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ChildProcessChannel() override;
  ChildProcessChannel(const ChildProcessChannel&) = delete;
  ChildProcessChannel& operator=(const ChildProcessChannel&) = delete;

  void send_line(const std::string& line) override;
  std::string read_line() override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

/// Connects to "host:port".
class TcpChannel final : public LineChannel {
 public:
  explicit TcpChannel(const std::string& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send_line(const std::string& line) override;
  std::string read_line() override;

 private:
  int fd_ = -1;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

nlohmann::json hello_request();
nlohmann::json logprobs_request(const MaskedSequence& context, std::size_t pos);

/// Error description for a malformed logprobs response, or nullopt when valid.
std::optional<std::string> check_logprobs_response(const nlohmann::json& response);

struct ProtocolStats {
  std::size_t queries = 0;
  std::size_t malformed = 0;        ///< unparseable, wrong shape, or unnormalized
  std::size_t error_responses = 0;  ///< {"op":"error"} replies
};

/// Prior served over a LineChannel. Requests are serialized per connection.
/// Malformed or error responses throw ProtocolError and are counted.
class ExternalPrior final : public SequencePrior {
 public:
  /// Performs the handshake; throws ExternalPriorUnavailable on failure.
  explicit ExternalPrior(std::unique_ptr<LineChannel> channel);

  std::string name() const override { return "external:" + model_; }
  const std::string& model() const { return model_; }
  ProtocolStats stats() const;

  static std::unique_ptr<ExternalPrior> spawn(const std::string& command);
  static std::unique_ptr<ExternalPrior> connect(const std::string& endpoint);

 protected:
  LogProbs compute_logprobs(const MaskedSequence& context, std::size_t pos) const override;

 private:
  std::unique_ptr<LineChannel> channel_;
  std::string model_;
  mutable std::mutex mutex_;
  mutable ProtocolStats stats_;
};

}  // namespace prospero
