#include "cexgen/verification.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "cexgen/lean_surface.hpp"
#include "cexgen/lexer.hpp"

namespace cexgen {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

const char* to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Verified: return "verified";
    case VerifyStatus::Failed: return "failed";
    case VerifyStatus::Timeout: return "timeout";
    case VerifyStatus::ResourceExhausted: return "resource-exhausted";
    case VerifyStatus::ProtocolError: return "protocol-error";
  }
  return "protocol-error";
}

VerifyStatus parse_verify_status(const std::string& s) {
  for (auto st : {VerifyStatus::Verified, VerifyStatus::Failed, VerifyStatus::Timeout,
                  VerifyStatus::ResourceExhausted, VerifyStatus::ProtocolError})
    if (s == to_string(st)) return st;
  throw Error(fmt::format("unknown verification status '{}'", s));
}

json to_json(const VerificationResult& r) {
  json msgs = json::array();
  for (const auto& d : r.diagnostics) msgs.push_back({{"severity", d.severity}, {"text", d.text}});
  return json{{"id", r.id},
              {"status", to_string(r.status)},
              {"messages", msgs},
              {"elapsed_s", r.elapsed},
              {"contains_sorry", r.contains_sorry}};
}

VerificationResult result_from_json(const json& j) {
  VerificationResult r;
  r.id = j.at("id").get<std::string>();
  r.status = parse_verify_status(j.at("status").get<std::string>());
  for (const auto& m : j.value("messages", json::array()))
    r.diagnostics.push_back({m.value("severity", "info"), m.value("text", "")});
  r.elapsed = j.value("elapsed_s", 0.0);
  r.contains_sorry = j.value("contains_sorry", false);
  return r;
}

bool proof_contains_sorry(const std::string& proof) {
  std::vector<Token> toks;
  try {
    toks = tokenize(strip_comments(proof));
  } catch (const SyntaxError&) {
    toks = tokenize(proof);
  }
  for (const auto& t : toks)
    if (t.kind != TokenKind::String && (t.text == "sorry" || t.text == "admit")) return true;
  return false;
}

namespace {

bool mentions_memory(const std::string& text) {
  return text.find("out of memory") != std::string::npos ||
         text.find("memory limit") != std::string::npos ||
         text.find("resource-exhausted") != std::string::npos;
}

}  // namespace

VerificationResult check_proof(const ProofJob& job, Backend& backend) {
  const auto start = Clock::now();
  VerificationResult r;
  try {
    r = backend.check(job);
  } catch (const std::exception& e) {
    r = VerificationResult{};
    r.status = VerifyStatus::ProtocolError;
    r.diagnostics.push_back({"error", e.what()});
  }
  r.id = job.id;
  if (r.elapsed <= 0.0) r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();

  bool sorry = proof_contains_sorry(job.proof);
  bool has_error = false;
  bool memory = false;
  for (const auto& d : r.diagnostics) {
    if (d.text.find("declaration uses 'sorry'") != std::string::npos) sorry = true;
    if (d.severity == "error") has_error = true;
    if (mentions_memory(d.text)) memory = true;
  }
  r.contains_sorry = sorry;
  if (r.status == VerifyStatus::Failed && memory) r.status = VerifyStatus::ResourceExhausted;
  if (r.status == VerifyStatus::Verified && (sorry || has_error)) {
    r.status = VerifyStatus::Failed;
    if (sorry) r.diagnostics.push_back({"error", "proof contains sorry"});
  }
  return r;
}

// ---------------------------------------------------------------------------
// toy backend

std::optional<std::string> witness_from_proof(const std::string& proof, std::size_t arity) {
  std::string text;
  try {
    text = strip_comments(proof);
  } catch (const SyntaxError&) {
    return std::nullopt;
  }
  const auto toks = tokenize(text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::string_view rest;
    if (toks[i].is("use") || toks[i].is("exists") || toks[i].is("refine'")) {
      if (i + 1 >= toks.size()) return std::nullopt;
      const std::size_t begin = toks[i + 1].begin;
      std::size_t end = text.find('\n', begin);
      if (end == std::string::npos) end = text.size();
      rest = std::string_view(text).substr(begin, end - begin);
      if (const auto semi = rest.find("<;>"); semi != std::string_view::npos) rest = rest.substr(0, semi);
      if (const auto semi = rest.find(';'); semi != std::string_view::npos) rest = rest.substr(0, semi);
    } else if (toks[i].is("⟨")) {
      int depth = 0;
      std::size_t j = i;
      for (; j < toks.size(); ++j) {
        if (toks[j].is("⟨")) ++depth;
        if (toks[j].is("⟩") && --depth == 0) break;
      }
      if (j >= toks.size()) return std::nullopt;
      rest = std::string_view(text).substr(toks[i].end, toks[j].begin - toks[i].end);
    } else {
      continue;
    }
    Witness w = parse_witness(std::string(rest));
    if (w.positional.size() < arity) return std::nullopt;
    std::string out;
    for (std::size_t k = 0; k < arity; ++k) out += (k ? ", " : "") + w.positional[k];
    return out;
  }
  return std::nullopt;
}

VerificationResult ToyBackend::check(const ProofJob& job) {
  const auto start = Clock::now();
  if (delay_s_ > 0) std::this_thread::sleep_for(std::chrono::duration<double>(delay_s_));
  VerificationResult r;
  r.id = job.id;
  try {
    const auto problem = parse_problem(job.statement);
    const auto witness_text = witness_from_proof(job.proof, problem.binders.size());
    if (!witness_text && !problem.binders.empty()) throw OutsideFragment("no witness in proof");
    r = toy_check(problem, witness_text ? parse_witness(*witness_text) : Witness{}, opts_);
    r.id = job.id;
  } catch (const OutsideFragment& e) {
    r.status = VerifyStatus::Failed;
    r.diagnostics = {{"error", fmt::format("outside toy fragment: {}", e.what())}};
  } catch (const SyntaxError& e) {
    r.status = VerifyStatus::Failed;
    r.diagnostics = {{"error", fmt::format("parse error: {}", e.what())}};
  }
  r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  if (job.limits.timeout_s > 0 && r.elapsed > job.limits.timeout_s) {
    r.status = VerifyStatus::Timeout;
    r.diagnostics.push_back({"error", "timeout"});
  }
  return r;
}

// ---------------------------------------------------------------------------
// NDJSON channel pool shared by the subprocess and TCP clients

namespace {

struct Channel {
  pid_t pid = -1;
  int rfd = -1;
  int wfd = -1;
  std::string buffer;

  bool open() const { return rfd >= 0; }
  void close() {
    if (pid > 0) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      pid = -1;
    }
    if (rfd >= 0) ::close(rfd);
    if (wfd >= 0 && wfd != rfd) ::close(wfd);
    rfd = wfd = -1;
    buffer.clear();
  }
};

enum class IoResult { Ok, Timeout, Broken };

int remaining_ms(Clock::time_point deadline) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return ms < 0 ? 0 : static_cast<int>(std::min<long long>(ms, 1 << 30));
}

IoResult write_all(Channel& ch, const std::string& data, Clock::time_point deadline) {
  std::size_t off = 0;
  while (off < data.size()) {
    pollfd p{ch.wfd, POLLOUT, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc == 0) return IoResult::Timeout;
    if (rc < 0) {
      if (errno == EINTR) continue;
      return IoResult::Broken;
    }
    const ssize_t n = ::write(ch.wfd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return IoResult::Broken;
    }
    off += static_cast<std::size_t>(n);
  }
  return IoResult::Ok;
}

IoResult read_line(Channel& ch, std::string& line, Clock::time_point deadline) {
  for (;;) {
    if (const auto nl = ch.buffer.find('\n'); nl != std::string::npos) {
      line = ch.buffer.substr(0, nl);
      ch.buffer.erase(0, nl + 1);
      return IoResult::Ok;
    }
    pollfd p{ch.rfd, POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc == 0) return IoResult::Timeout;
    if (rc < 0) {
      if (errno == EINTR) continue;
      return IoResult::Broken;
    }
    char buf[8192];
    const ssize_t n = ::read(ch.rfd, buf, sizeof buf);
    if (n == 0) return IoResult::Broken;
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return IoResult::Broken;
    }
    ch.buffer.append(buf, static_cast<std::size_t>(n));
  }
}

Channel spawn_process(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error("pipe failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  Channel ch;
  ch.pid = pid;
  ch.rfd = from_child[0];
  ch.wfd = to_child[1];
  return ch;
}

Channel connect_tcp(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ConfigError(fmt::format("VERIFIER_ADDR '{}' is not host:port", address));
  const std::string host = address.substr(0, colon), port = address.substr(colon + 1);
  addrinfo hints{};
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0)
    throw Error(fmt::format("cannot resolve {}", address));
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(fmt::format("cannot connect to {}", address));
  Channel ch;
  ch.rfd = ch.wfd = fd;
  return ch;
}

VerificationResult parse_reply(const ProofJob& job, const std::string& line) {
  VerificationResult r;
  r.id = job.id;
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    r.status = VerifyStatus::ProtocolError;
    r.diagnostics.push_back({"error", "malformed reply from checker"});
    return r;
  }
  try {
    if (!j.is_object()) throw Error("reply is not an object");
    if (j.at("id").get<std::string>() != job.id) throw Error("reply id does not match request");
    r.status = parse_verify_status(j.at("status").get<std::string>());
    for (const auto& m : j.value("messages", json::array())) {
      if (m.is_string()) {
        r.diagnostics.push_back({"info", m.get<std::string>()});
      } else {
        std::string text = m.contains("data") ? m.at("data").get<std::string>() : m.value("text", "");
        r.diagnostics.push_back({m.value("severity", "info"), std::move(text)});
      }
    }
    r.elapsed = j.value("elapsed_s", 0.0);
  } catch (const std::exception& e) {
    r = VerificationResult{};
    r.id = job.id;
    r.status = VerifyStatus::ProtocolError;
    r.diagnostics.push_back({"error", fmt::format("invalid reply from checker: {}", e.what())});
  }
  return r;
}

class ChannelPool {
 public:
  ChannelPool(std::function<Channel()> connect, ProcessOptions opts)
      : connect_(std::move(connect)), opts_(opts) {
    ::signal(SIGPIPE, SIG_IGN);
  }
  ~ChannelPool() {
    for (auto& ch : idle_) ch->close();
  }

  VerificationResult check(const ProofJob& job) {
    auto ch = acquire();
    VerificationResult r;
    try {
      r = exchange(*ch, job);
    } catch (...) {
      ch->close();
      release(std::move(ch));
      throw;
    }
    release(std::move(ch));
    return r;
  }

 private:
  std::function<Channel()> connect_;
  ProcessOptions opts_;
  std::mutex m_;
  std::condition_variable cv_;
  std::vector<std::unique_ptr<Channel>> idle_;
  std::size_t created_ = 0;

  std::unique_ptr<Channel> acquire() {
    std::unique_lock lock(m_);
    cv_.wait(lock, [&] { return !idle_.empty() || created_ < std::max<std::size_t>(1, opts_.workers); });
    if (!idle_.empty()) {
      auto ch = std::move(idle_.back());
      idle_.pop_back();
      return ch;
    }
    ++created_;
    return std::make_unique<Channel>();
  }

  void release(std::unique_ptr<Channel> ch) {
    {
      std::lock_guard lock(m_);
      idle_.push_back(std::move(ch));
    }
    cv_.notify_one();
  }

  VerificationResult exchange(Channel& ch, const ProofJob& job) {
    const auto start = Clock::now();
    if (!ch.open()) ch = connect_();
    const json request{{"id", job.id},
                       {"cmd", "check"},
                       {"statement", job.statement},
                       {"proof", job.proof},
                       {"timeout_s", job.limits.timeout_s},
                       {"memory_bytes", job.limits.memory_bytes}};
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(job.limits.timeout_s + opts_.grace_s));
    VerificationResult r;
    r.id = job.id;
    std::string line;
    IoResult io = write_all(ch, request.dump() + "\n", deadline);
    if (io == IoResult::Ok) io = read_line(ch, line, deadline);
    if (io == IoResult::Ok) {
      r = parse_reply(job, line);
      if (r.status == VerifyStatus::ProtocolError) ch.close();
    } else if (io == IoResult::Timeout) {
      ch.close();
      r.status = VerifyStatus::Timeout;
      r.diagnostics.push_back({"error", fmt::format("no reply within {} s", job.limits.timeout_s)});
    } else {
      ch.close();
      r.status = VerifyStatus::ProtocolError;
      r.diagnostics.push_back({"error", "checker connection closed"});
    }
    if (r.elapsed <= 0.0) r.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return r;
  }
};

}  // namespace

struct SubprocessBackend::Pool : ChannelPool {
  using ChannelPool::ChannelPool;
};

SubprocessBackend::SubprocessBackend(std::string command, ProcessOptions opts)
    : pool_(std::make_unique<Pool>([command] { return spawn_process(command); }, opts)) {}
SubprocessBackend::~SubprocessBackend() = default;
VerificationResult SubprocessBackend::check(const ProofJob& job) { return pool_->check(job); }

struct TcpBackend::Pool : ChannelPool {
  using ChannelPool::ChannelPool;
};

TcpBackend::TcpBackend(std::string address, ProcessOptions opts)
    : pool_(std::make_unique<Pool>([address] { return connect_tcp(address); }, opts)) {}
TcpBackend::~TcpBackend() = default;
VerificationResult TcpBackend::check(const ProofJob& job) { return pool_->check(job); }

std::unique_ptr<Backend> backend_from_environment(std::size_t workers, ToyOptions toy) {
  if (const char* cmd = std::getenv("VERIFIER_CMD"); cmd && *cmd)
    return std::make_unique<SubprocessBackend>(cmd, ProcessOptions{workers});
  if (const char* addr = std::getenv("VERIFIER_ADDR"); addr && *addr)
    return std::make_unique<TcpBackend>(addr, ProcessOptions{workers});
  return std::make_unique<ToyBackend>(toy);
}

// ---------------------------------------------------------------------------
// batch

std::vector<VerificationResult> run_batch(const std::vector<ProofJob>& jobs, Backend& backend,
                                          const BatchOptions& opts) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!index.emplace(jobs[i].id, i).second) throw ConfigError(fmt::format("duplicate job id '{}'", jobs[i].id));

  std::vector<std::optional<VerificationResult>> results(jobs.size());
  if (opts.checkpoint && std::filesystem::exists(*opts.checkpoint)) {
    std::ifstream in(*opts.checkpoint);
    std::string line;
    while (std::getline(in, line)) {
      try {
        auto r = result_from_json(json::parse(line));
        auto it = index.find(r.id);
        if (it == index.end() || r.status == VerifyStatus::ProtocolError) continue;
        results[it->second] = std::move(r);
      } catch (const std::exception&) {
        // a torn final line from an interrupted run
      }
    }
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!results[i]) pending.push_back(i);

  std::ofstream checkpoint;
  if (opts.checkpoint && !pending.empty()) {
    if (opts.checkpoint->has_parent_path()) std::filesystem::create_directories(opts.checkpoint->parent_path());
    checkpoint.open(*opts.checkpoint, std::ios::app);
    if (!checkpoint) throw Error(fmt::format("cannot open checkpoint {}", opts.checkpoint->string()));
  }

  std::mutex m;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr interrupted;
  auto worker = [&] {
    for (;;) {
      if (stop) return;
      const std::size_t k = next++;
      if (k >= pending.size()) return;
      const std::size_t i = pending[k];
      VerificationResult r = check_proof(jobs[i], backend);
      {
        std::lock_guard lock(m);
        if (checkpoint.is_open()) {
          checkpoint << to_json(r).dump() << '\n';
          checkpoint.flush();
        }
        results[i] = r;
      }
      if (opts.on_result) {
        try {
          opts.on_result(r);
        } catch (const BatchInterrupted&) {
          std::lock_guard lock(m);
          if (!interrupted) interrupted = std::current_exception();
          stop = true;
          return;
        }
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(1, opts.parallelism), pending.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  if (threads > 0) worker();
  for (auto& t : pool) t.join();
  if (interrupted) std::rethrow_exception(interrupted);

  std::vector<VerificationResult> out;
  out.reserve(jobs.size());
  for (auto& r : results) out.push_back(std::move(*r));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace cexgen
