#include "semag/executor.hpp"

#include "semag/errors.hpp"
#include "semag/text.hpp"
#include "semag/trace_grammar.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace semag {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Fd& operator=(Fd&& o) noexcept {
        reset();
        fd_ = std::exchange(o.fd_, -1);
        return *this;
    }
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

struct Pipe {
    Fd read;
    Fd write;
};

Pipe make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) {
        throw InfrastructureError(std::string("pipe2 failed: ") + std::strerror(errno));
    }
    return Pipe{Fd(fds[0]), Fd(fds[1])};
}

class TempDir {
public:
    explicit TempDir(const fs::path& root) {
        std::string tmpl = (root / "semag-run-XXXXXX").string();
        if (::mkdtemp(tmpl.data()) == nullptr) {
            throw InfrastructureError("cannot create sandbox directory under " + root.string() + ": " +
                                      std::strerror(errno));
        }
        path_ = tmpl;
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const noexcept { return path_; }

private:
    fs::path path_;
};

std::optional<std::string> resolve_executable(const std::string& name) {
    if (name.find('/') != std::string::npos) {
        if (::access(name.c_str(), X_OK) == 0) return name;
        return std::nullopt;
    }
    const char* path_env = std::getenv("PATH");
    std::string paths = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
    std::stringstream ss(paths);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
        if (dir.empty()) continue;
        auto candidate = (fs::path(dir) / name).string();
        struct stat st {};
        if (::stat(candidate.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(candidate.c_str(), X_OK) == 0) {
            return candidate;
        }
    }
    return std::nullopt;
}

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

std::vector<std::string> extract_trace_lines(const std::string& stderr_text) {
    std::vector<std::string> out;
    for (auto& line : text::split_lines(stderr_text)) {
        if (parse_trace_line(line)) out.push_back(std::move(line));
    }
    return out;
}

} // namespace

void ResourceLimits::validate() const {
    if (wall_time_ms <= 0 || max_output_bytes <= 0 || max_processes <= 0) {
        throw PreconditionError("resource limits must all be positive");
    }
}

std::string_view to_string(ExecStatus s) {
    switch (s) {
    case ExecStatus::ok: return "ok";
    case ExecStatus::nonzero_exit: return "nonzero-exit";
    case ExecStatus::timeout: return "timeout";
    case ExecStatus::output_limit: return "output-limit";
    case ExecStatus::spawn_failure: return "spawn-failure";
    }
    return "unknown";
}

ExecutorConfig ExecutorConfig::defaults() {
    ExecutorConfig cfg;
    cfg.interpreters["python"] = InterpreterSpec{
        "python3 {file}", "main.py",
        "\n\nif __name__ == \"__main__\":\n"
        "    import ast as _semag_ast, sys as _semag_sys\n"
        "    _semag_args = _semag_ast.literal_eval(_semag_sys.stdin.read().strip() or \"()\")\n"
        "    if not isinstance(_semag_args, tuple):\n"
        "        _semag_args = (_semag_args,)\n"
        "    print(repr({entry_point}(*_semag_args)))\n"};
    cfg.interpreters["sh"] = InterpreterSpec{"sh {file}", "main.sh", ""};
    cfg.temp_root = fs::temp_directory_path();
    return cfg;
}

Executor::Executor(ExecutorConfig config)
    : config_(std::move(config)),
      slots_(std::make_unique<std::counting_semaphore<1024>>(std::clamp(config_.max_parallel_executions, 1, 1024))) {
    if (config_.temp_root.empty()) config_.temp_root = fs::temp_directory_path();
    ignore_sigpipe_once();
}

Executor::~Executor() = default;

ExecutionResult Executor::run(const Program& program, std::string_view stdin_text, const ResourceLimits& limits,
                              const std::optional<std::string>& entry_point) const {
    limits.validate();
    auto spec_it = config_.interpreters.find(program.language_tag);
    if (spec_it == config_.interpreters.end()) {
        throw InfrastructureError("no interpreter configured for language '" + program.language_tag + "'");
    }
    const InterpreterSpec& spec = spec_it->second;

    slots_->acquire();
    struct Release {
        std::counting_semaphore<1024>* s;
        ~Release() { s->release(); }
    } release{slots_.get()};

    TempDir dir(config_.temp_root);
    const fs::path file = dir.path() / spec.file_name;
    {
        std::ofstream out(file, std::ios::binary);
        out << program.source;
        if (entry_point && !spec.call_harness.empty()) {
            out << text::replace_all(spec.call_harness, "{entry_point}", *entry_point);
        }
        if (!out) throw InfrastructureError("cannot write program file " + file.string());
    }

    std::vector<std::string> args;
    for (auto& tok : text::split_lines(text::replace_all(spec.command, " ", "\n"))) {
        if (tok.empty()) continue;
        args.push_back(text::replace_all(tok, "{file}", file.string()));
    }
    if (args.empty()) throw InfrastructureError("empty interpreter command for '" + program.language_tag + "'");
    auto exe = resolve_executable(args[0]);
    if (!exe) {
        throw InfrastructureError("spawn failure: interpreter '" + args[0] + "' not found");
    }
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    const std::string workdir = dir.path().string();

    Pipe in = make_pipe();
    Pipe out = make_pipe();
    Pipe err = make_pipe();
    Pipe status = make_pipe();

    const auto start = Clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) throw InfrastructureError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in.read.get(), STDIN_FILENO);
        ::dup2(out.write.get(), STDOUT_FILENO);
        ::dup2(err.write.get(), STDERR_FILENO);
        if (::chdir(workdir.c_str()) != 0) {
            int e = errno;
            (void)!::write(status.write.get(), &e, sizeof e);
            ::_exit(127);
        }
        struct rlimit core {0, 0};
        ::setrlimit(RLIMIT_CORE, &core);
        struct rlimit nproc {static_cast<rlim_t>(limits.max_processes), static_cast<rlim_t>(limits.max_processes)};
        ::setrlimit(RLIMIT_NPROC, &nproc);
        ::execv(exe->c_str(), argv.data());
        int e = errno;
        (void)!::write(status.write.get(), &e, sizeof e);
        ::_exit(127);
    }
    ::setpgid(pid, pid);

    in.read.reset();
    out.write.reset();
    err.write.reset();
    status.write.reset();

    int exec_errno = 0;
    if (::read(status.read.get(), &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
        int ws = 0;
        ::waitpid(pid, &ws, 0);
        throw InfrastructureError("spawn failure: " + std::string(std::strerror(exec_errno)));
    }

    set_nonblocking(in.write.get());
    set_nonblocking(out.read.get());
    set_nonblocking(err.read.get());

    ExecutionResult result;
    const auto deadline = start + std::chrono::milliseconds(limits.wall_time_ms);
    const auto cap = static_cast<std::size_t>(limits.max_output_bytes);
    std::size_t written = 0;
    bool timed_out = false;
    bool over_limit = false;
    bool killed = false;
    if (stdin_text.empty()) in.write.reset();

    auto kill_group = [&] {
        if (!killed) {
            ::kill(-pid, SIGKILL);
            killed = true;
        }
    };

    char buf[65536];
    while (out.read || err.read) {
        const auto now = Clock::now();
        if (now >= deadline) {
            timed_out = true;
            kill_group();
            break;
        }
        pollfd fds[3];
        int n = 0;
        int idx_out = -1, idx_err = -1, idx_in = -1;
        if (out.read) { idx_out = n; fds[n++] = {out.read.get(), POLLIN, 0}; }
        if (err.read) { idx_err = n; fds[n++] = {err.read.get(), POLLIN, 0}; }
        if (in.write) { idx_in = n; fds[n++] = {in.write.get(), POLLOUT, 0}; }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        const int rc = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<std::int64_t>(remaining + 1, 50)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            kill_group();
            break;
        }
        auto drain = [&](int idx, Fd& fd, std::string& sink) {
            if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
            const ssize_t got = ::read(fd.get(), buf, sizeof buf);
            if (got > 0) {
                const std::size_t room = cap > sink.size() ? cap - sink.size() : 0;
                sink.append(buf, std::min<std::size_t>(room, static_cast<std::size_t>(got)));
                if (static_cast<std::size_t>(got) > room) {
                    over_limit = true;
                    result.output_truncated = true;
                }
            } else if (got == 0 || (errno != EAGAIN && errno != EINTR)) {
                fd.reset();
            }
        };
        drain(idx_out, out.read, result.stdout_text);
        drain(idx_err, err.read, result.stderr_text);
        if (over_limit) {
            kill_group();
            break;
        }
        if (idx_in >= 0 && (fds[idx_in].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t put = ::write(in.write.get(), stdin_text.data() + written, stdin_text.size() - written);
            if (put > 0) {
                written += static_cast<std::size_t>(put);
                if (written == stdin_text.size()) in.write.reset();
            } else if (put < 0 && errno != EAGAIN && errno != EINTR) {
                in.write.reset();
            }
        }
    }
    in.write.reset();

    int ws = 0;
    for (;;) {
        const pid_t r = ::waitpid(pid, &ws, WNOHANG);
        if (r == pid) break;
        if (r < 0 && errno != EINTR) break;
        if (Clock::now() >= deadline && !killed) {
            timed_out = true;
            kill_group();
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    // Reap stragglers the candidate may have left in its process group.
    ::kill(-pid, SIGKILL);

    result.wall_time_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    if (WIFEXITED(ws)) {
        result.exit_code = WEXITSTATUS(ws);
    } else if (WIFSIGNALED(ws)) {
        result.exit_code = 128 + WTERMSIG(ws);
    }
    if (over_limit) {
        result.status = ExecStatus::output_limit;
    } else if (timed_out) {
        result.status = ExecStatus::timeout;
        result.wall_time_ms = std::max(result.wall_time_ms, limits.wall_time_ms);
    } else if (result.exit_code == 0) {
        result.status = ExecStatus::ok;
    } else {
        result.status = ExecStatus::nonzero_exit;
    }
    result.trace_lines = extract_trace_lines(result.stderr_text);
    return result;
}

Verdict verdict_for(const IOExample& example, const ExecutionResult& result) {
    switch (result.status) {
    case ExecStatus::ok:
        return outputs_match(example, result.stdout_text) ? Verdict::pass : Verdict::wrong_output;
    case ExecStatus::timeout:
        return Verdict::timeout;
    default:
        return Verdict::runtime_error;
    }
}

std::pair<TestReport, std::vector<ExecutionResult>>
Executor::run_examples(const Program& program, std::span<const IOExample> examples, const ResourceLimits& limits,
                       const std::optional<std::string>& entry_point) const {
    if (examples.empty()) throw PreconditionError("run_examples requires at least one example");
    TestReport report;
    std::vector<ExecutionResult> runs;
    runs.reserve(examples.size());
    report.all_passed = true;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        auto res = run(program, examples[i].input, limits, entry_point);
        const Verdict v = verdict_for(examples[i], res);
        report.per_example.push_back(ExampleVerdict{i, v, res.stdout_text, res.stderr_text});
        report.all_passed = report.all_passed && v == Verdict::pass;
        report.wall_time_ms += res.wall_time_ms;
        runs.push_back(std::move(res));
    }
    return {std::move(report), std::move(runs)};
}

TestReport run_tests(const Program& program, std::span<const IOExample> examples, const Executor& executor,
                     const ResourceLimits& limits, const std::optional<std::string>& entry_point) {
    return executor.run_examples(program, examples, limits, entry_point).first;
}

} // namespace semag
