// Reference server for the external-prior protocol, used by the tests.
//
//   mock_prior_server [--mode M] [--every N] [--tcp PORT]
//
// Modes:
//   peaked       log-softmax of logits with +2 on residue (position - 1 + masked count) mod 20
//   unnormalized the same logits without normalization
//   malformed    every N-th logprobs reply is not JSON (default N = 1)
//   short        19 values
//   error        every logprobs request gets an error reply
//   refuse       the handshake gets an error reply
//   exit         exits after the handshake
// With --tcp the server listens on 127.0.0.1:PORT (0 picks a free port),
// prints "port <n>" on stdout and serves connections one at a time.

#include <nlohmann/json.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr const char* kAlphabet = "ACDEFGHIKLMNPQRSTVWY";

struct Options {
  std::string mode = "peaked";
  long every = 1;
  long tcp_port = -1;
};

std::vector<double> peaked_logits(const nlohmann::json& tokens, long position) {
  long masked = 0;
  for (const auto& t : tokens) masked += t.get<int>() < 0;
  std::vector<double> v(20, 0.0);
  v[static_cast<std::size_t>((position - 1 + masked) % 20)] = 2.0;
  return v;
}

std::string reply_to(const std::string& line, const Options& opt, long& served) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return nlohmann::json{{"op", "error"}, {"message", "request is not JSON"}}.dump();
  }
  const std::string op = req.value("op", "");
  if (op == "hello") {
    if (opt.mode == "refuse") return nlohmann::json{{"op", "error"}, {"message", "refused"}}.dump();
    if (req.value("alphabet", "") != kAlphabet || req.value("version", 0) != 1) {
      return nlohmann::json{{"op", "error"}, {"message", "alphabet or version mismatch"}}.dump();
    }
    return nlohmann::json{{"op", "hello_ok"}, {"model", "mock-" + opt.mode}}.dump();
  }
  if (op != "logprobs") return nlohmann::json{{"op", "error"}, {"message", "unknown op"}}.dump();
  ++served;
  if (opt.mode == "error") return nlohmann::json{{"op", "error"}, {"message", "backend failure"}}.dump();
  if (opt.mode == "malformed" && served % opt.every == 0) return "{\"op\": \"logprobs_ok\", \"values\": [";
  const auto& tokens = req.at("tokens");
  const long position = req.at("position").get<long>();
  if (position < 1 || position > static_cast<long>(tokens.size()) ||
      tokens[static_cast<std::size_t>(position - 1)].get<int>() != -1) {
    return nlohmann::json{{"op", "error"}, {"message", "position is not masked"}}.dump();
  }
  auto v = peaked_logits(tokens, position);
  if (opt.mode != "unnormalized") {
    double z = 0.0;
    for (const double x : v) z += std::exp(x);
    for (auto& x : v) x -= std::log(z);
  }
  if (opt.mode == "short") v.pop_back();
  return nlohmann::json{{"op", "logprobs_ok"}, {"values", v}}.dump();
}

template <typename ReadLine, typename WriteLine>
void serve(const Options& opt, ReadLine read_line, WriteLine write_line) {
  std::string line;
  long served = 0;
  bool greeted = false;
  while (read_line(line)) {
    if (line.empty()) continue;
    write_line(reply_to(line, opt, served));
    if (!greeted && opt.mode == "exit") return;
    greeted = true;
  }
}

int serve_tcp(const Options& opt) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(opt.tcp_port));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd, 4) != 0) {
    std::perror("bind");
    return 1;
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  std::cout << "port " << ntohs(addr.sin_port) << std::endl;
  while (true) {
    const int c = ::accept(fd, nullptr, nullptr);
    if (c < 0) continue;
    std::string buffer;
    auto read_line = [&](std::string& out) {
      while (true) {
        const auto nl = buffer.find('\n');
        if (nl != std::string::npos) {
          out = buffer.substr(0, nl);
          buffer.erase(0, nl + 1);
          return true;
        }
        char chunk[4096];
        const auto n = ::read(c, chunk, sizeof chunk);
        if (n <= 0) return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
      }
    };
    auto write_line = [&](const std::string& s) {
      const std::string msg = s + "\n";
      std::size_t off = 0;
      while (off < msg.size()) {
        const auto n = ::send(c, msg.data() + off, msg.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return;
        off += static_cast<std::size_t>(n);
      }
    };
    serve(opt, read_line, write_line);
    ::close(c);
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << a << " needs a value\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "--mode") {
      opt.mode = next();
    } else if (a == "--every") {
      opt.every = std::stol(next());
    } else if (a == "--tcp") {
      opt.tcp_port = std::stol(next());
    } else {
      std::cerr << "unknown argument " << a << "\n";
      return 2;
    }
  }
  if (opt.tcp_port >= 0) return serve_tcp(opt);
  serve(
      opt, [](std::string& out) { return static_cast<bool>(std::getline(std::cin, out)); },
      [](const std::string& s) { std::cout << s << std::endl; });
  return 0;
}
