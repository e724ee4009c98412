#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "beqh/prover.hpp"

namespace beqh {

namespace detail {

inline bool is_executable(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

inline std::optional<std::filesystem::path> find_in_path(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    return is_executable(name) ? std::optional<std::filesystem::path>(name) : std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    auto candidate = std::filesystem::path(dir) / name;
    if (is_executable(candidate)) return candidate;
  }
  return std::nullopt;
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

/// A child process with its stdin/stdout connected to pipes.
class ChildProcess {
 public:
  ChildProcess(const std::vector<std::string>& argv, const std::filesystem::path& cwd) {
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe2(err_pipe, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::ToolchainMissing, std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorCode::ToolchainMissing, std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(in_pipe[0], STDIN_FILENO);
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::close(err_pipe[0]);
      if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) {
        int e = errno;
        if (::write(err_pipe[1], &e, sizeof e) < 0) ::_exit(126);
        ::_exit(127);
      }
      std::vector<char*> args;
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      ::execvp(args[0], args.data());
      int e = errno;
      if (::write(err_pipe[1], &e, sizeof e) < 0) ::_exit(126);
      ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[1]);
    stdin_ = in_pipe[1];
    stdout_ = out_pipe[0];
    int child_errno = 0;
    ssize_t n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
    ::close(err_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof child_errno)) {
      kill();
      throw Error(ErrorCode::ToolchainMissing,
                  "cannot execute '" + argv[0] + "': " + std::strerror(child_errno));
    }
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() { kill(); }

  bool alive() const { return pid_ > 0; }

  void write_all(std::string_view data) {
    while (!data.empty()) {
      ssize_t n = ::write(stdin_, data.data(), data.size());
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::SessionDead, std::string("write to REPL failed: ") + std::strerror(errno));
      }
      data.remove_prefix(static_cast<std::size_t>(n));
    }
  }

  /// Reads until a blank line terminates a non-empty payload.
  std::string read_block(Millis timeout) {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      if (auto block = take_block()) return *block;
      auto remaining = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw Error(ErrorCode::CommandTimeout, "REPL did not answer in time");
      pollfd pfd{stdout_, POLLIN, 0};
      int rc = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining.count(), 1 << 30)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::SessionDead, std::string("poll: ") + std::strerror(errno));
      }
      if (rc == 0) continue;
      char chunk[65536];
      ssize_t n = ::read(stdout_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::SessionDead, "REPL closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void kill() {
    if (stdin_ >= 0) ::close(stdin_);
    if (stdout_ >= 0) ::close(stdout_);
    stdin_ = stdout_ = -1;
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

 private:
  std::optional<std::string> take_block() {
    std::size_t start = buffer_.find_first_not_of(" \t\r\n");
    if (start == std::string::npos) return std::nullopt;
    std::size_t sep = buffer_.find("\n\n", start);
    std::size_t sep_crlf = buffer_.find("\r\n\r\n", start);
    std::size_t len = 2;
    if (sep_crlf != std::string::npos && (sep == std::string::npos || sep_crlf < sep)) {
      sep = sep_crlf;
      len = 4;
    }
    if (sep == std::string::npos) return std::nullopt;
    std::string block = buffer_.substr(start, sep - start);
    buffer_.erase(0, sep + len);
    return block;
  }

  pid_t pid_ = -1;
  int stdin_ = -1;
  int stdout_ = -1;
  std::string buffer_;
};

inline void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &sa, nullptr);
  });
}

}  // namespace detail

/// Toolchain version from `<root>/lean-toolchain`, e.g. "4.16.0-rc2".
inline std::string read_toolchain(const std::filesystem::path& project_root) {
  std::ifstream in(project_root / "lean-toolchain");
  std::string line;
  if (!in || !std::getline(in, line)) return "unknown";
  if (auto colon = line.rfind(':'); colon != std::string::npos) line = line.substr(colon + 1);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
  if (!line.empty() && line.front() == 'v') line.erase(0, 1);
  return line;
}

/// Command line that starts the REPL for a project. Resolution order: an
/// explicit command, $BEQH_REPL, a REPL binary built inside the project, then
/// `lake exe repl`.
inline std::vector<std::string> resolve_repl_command(const std::filesystem::path& project_root,
                                                     const std::vector<std::string>& explicit_command = {}) {
  auto with_program = [](std::vector<std::string> argv) -> std::vector<std::string> {
    if (argv.empty() || !detail::find_in_path(argv[0])) return {};
    return argv;
  };
  if (!explicit_command.empty()) {
    auto argv = with_program(explicit_command);
    if (argv.empty()) throw Error(ErrorCode::ToolchainMissing, "REPL executable not found: " + explicit_command[0]);
    return argv;
  }
  if (const char* env = std::getenv("BEQH_REPL"); env && *env) {
    auto argv = with_program(detail::split_words(env));
    if (argv.empty()) throw Error(ErrorCode::ToolchainMissing, std::string("BEQH_REPL not executable: ") + env);
    return argv;
  }
  bool has_lake = detail::find_in_path("lake").has_value();
  for (auto rel : {".lake/build/bin/repl", ".lake/packages/REPL/.lake/build/bin/repl",
                   ".lake/packages/repl/.lake/build/bin/repl"}) {
    auto bin = project_root / rel;
    if (detail::is_executable(bin)) {
      if (has_lake) return {"lake", "env", std::filesystem::absolute(bin).string()};
      return {std::filesystem::absolute(bin).string()};
    }
  }
  std::error_code ec;
  if (has_lake && (std::filesystem::exists(project_root / "lakefile.lean", ec) ||
                   std::filesystem::exists(project_root / "lakefile.toml", ec))) {
    return {"lake", "exe", "repl"};
  }
  throw Error(ErrorCode::ToolchainMissing,
              "no Lean REPL found for project '" + project_root.string() +
                  "' (set BEQH_REPL or build the REPL inside the project)");
}

struct LeanReplOptions {
  std::vector<std::string> repl_command;  // empty: resolve from the project
  std::string header;                     // run at startup, cached as base_env
};

/// Talks to the community Lean REPL over stdin/stdout. One child process per
/// session; commands on a session are serialized.
class LeanReplBackend final : public ProverBackend {
 public:
  explicit LeanReplBackend(LeanReplOptions options = {}) : options_(std::move(options)) {
    detail::ignore_sigpipe();
  }

  std::string kind() const override { return "lean"; }

  SessionHandle start_session(const std::filesystem::path& project_root, Millis timeout) override {
    auto argv = resolve_repl_command(project_root, options_.repl_command);
    auto state = std::make_shared<State>();
    state->argv = argv;
    state->root = project_root;
    state->startup_timeout = timeout;
    state->child = std::make_unique<detail::ChildProcess>(argv, project_root);

    SessionHandle h;
    {
      std::lock_guard lock(mu_);
      h.session_id = "lean-" + std::to_string(next_session_++);
      sessions_[h.session_id] = state;
    }
    h.toolchain = read_toolchain(project_root);
    if (!options_.header.empty()) {
      try {
        ensure_header(h, options_.header, timeout);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::CommandTimeout) {
          throw Error(ErrorCode::StartupTimeout, "header import did not finish in time");
        }
        throw;
      }
    }
    return h;
  }

  ReplResult run_command(SessionHandle& session, std::string_view src, std::optional<int> env,
                         Millis timeout) override {
    auto st = state(session);
    std::lock_guard lock(st->mu);
    if (!st->child || !st->child->alive()) throw Error(ErrorCode::SessionDead, session.session_id);
    ++st->commands;
    try {
      st->child->write_all(encode_request(src, env));
      std::string payload = st->child->read_block(timeout);
      return parse_response(std::string_view(payload));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CommandTimeout || e.code() == ErrorCode::SessionDead) {
        st->child.reset();
      }
      throw;
    }
  }

  void restart(SessionHandle& session) override {
    auto st = state(session);
    {
      std::lock_guard lock(st->mu);
      st->child.reset();
      st->child = std::make_unique<detail::ChildProcess>(st->argv, st->root);
      st->commands = 0;
    }
    std::string header = std::move(session.header);
    session.header.clear();
    session.base_env.reset();
    ensure_header(session, header, st->startup_timeout);
  }

  void close(SessionHandle& session) override {
    std::shared_ptr<State> st;
    {
      std::lock_guard lock(mu_);
      auto it = sessions_.find(session.session_id);
      if (it == sessions_.end()) return;
      st = it->second;
      sessions_.erase(it);
    }
    std::lock_guard lock(st->mu);
    st->child.reset();
  }

  std::size_t commands_since_start(const SessionHandle& session) const override {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session.session_id);
    return it == sessions_.end() ? 0 : it->second->commands.load();
  }

 private:
  struct State {
    std::mutex mu;
    std::vector<std::string> argv;
    std::filesystem::path root;
    Millis startup_timeout{kDefaultStartupTimeout};
    std::unique_ptr<detail::ChildProcess> child;
    std::atomic<std::size_t> commands{0};
  };

  std::shared_ptr<State> state(const SessionHandle& s) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(s.session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::SessionDead, "unknown session " + s.session_id);
    return it->second;
  }

  LeanReplOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<State>> sessions_;
  int next_session_ = 0;
};

}  // namespace beqh
