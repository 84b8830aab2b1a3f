#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "mfuq/errors.hpp"
#include "mfuq/oracle.hpp"

namespace mfuq {

using nlohmann::json;

struct ExternalProcessBackend::Child {
    pid_t pid = -1;
    int to_child = -1;
    int from_child = -1;
    std::string buffer;
    bool alive = true;

    ~Child() { terminate(); }

    void terminate() {
        if (to_child >= 0) {
            ::close(to_child);
            to_child = -1;
        }
        if (from_child >= 0) {
            ::close(from_child);
            from_child = -1;
        }
        if (pid > 0) {
            // Closed stdin asks the child to exit; escalate if it lingers.
            for (int i = 0; i < 50; ++i) {
                if (::waitpid(pid, nullptr, WNOHANG) == pid) {
                    pid = -1;
                    return;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(10));
            }
            ::kill(-pid, SIGKILL);  // whole process group: the shell and whatever it started
            ::waitpid(pid, nullptr, 0);
            pid = -1;
        }
    }

    // Reaps the child if it has exited and describes its status.
    std::string exit_status() {
        if (pid <= 0) return "already reaped";
        int status = 0;
        pid_t r = 0;
        for (int i = 0; i < 100 && r == 0; ++i) {
            r = ::waitpid(pid, &status, WNOHANG);
            if (r == 0) std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (r != pid) return "still running";
        pid = -1;
        if (WIFEXITED(status)) return "exit code " + std::to_string(WEXITSTATUS(status));
        if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
        return "unknown status";
    }

    void write_line(const std::string& line) {
        std::string data = line + "\n";
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t n = ::write(to_child, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("write to oracle process failed: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    // Returns false on timeout; throws on EOF.
    bool read_line(std::string& line, double timeout_s) {
        const auto deadline = std::chrono::steady_clock::now() +
                              std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(timeout_s));
        for (;;) {
            auto nl = buffer.find('\n');
            if (nl != std::string::npos) {
                line = buffer.substr(0, nl);
                buffer.erase(0, nl + 1);
                return true;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) return false;
            pollfd pfd{from_child, POLLIN, 0};
            int pr = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
            if (pr < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("poll failed: ") + std::strerror(errno));
            }
            if (pr == 0) continue;
            char chunk[4096];
            ssize_t n = ::read(from_child, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                throw OracleError(std::string("read from oracle process failed: ") + std::strerror(errno));
            }
            if (n == 0) {
                throw OracleError("oracle process closed its output (" + exit_status() + ")");
            }
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

ExternalProcessBackend::ExternalProcessBackend(Options options) : options_(std::move(options)) {
    if (options_.command.empty()) {
        throw ConfigError("external oracle command is empty");
    }
    if (!(options_.timeout_s > 0.0)) {
        throw ConfigError("external oracle timeout must be positive");
    }
    // A dead child must surface as EPIPE, not terminate us.
    ::signal(SIGPIPE, SIG_IGN);
}

ExternalProcessBackend::~ExternalProcessBackend() = default;

std::unique_ptr<ExternalProcessBackend::Child> ExternalProcessBackend::spawn() const {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
        throw OracleError(std::string("pipe failed: ") + std::strerror(errno));
    }
    pid_t pid = ::fork();
    if (pid < 0) {
        throw OracleError(std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        if (::chdir(options_.workdir.c_str()) != 0) {
            ::_exit(126);
        }
        ::execl("/bin/sh", "sh", "-c", options_.command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    auto child = std::make_unique<Child>();
    child->pid = pid;
    child->to_child = in_pipe[1];
    child->from_child = out_pipe[0];
    return child;
}

std::string encode_request(std::int64_t id, const EvalRequest& req) {
    json j;
    j["id"] = id;
    j["fidelity"] = req.alpha;
    j["params"] = req.params;
    j["qois"] = req.qois;
    return j.dump();
}

std::vector<EvalResult> ExternalProcessBackend::evaluate(std::span<const EvalRequest> requests, int lanes) {
    std::vector<EvalResult> results(requests.size());
    if (requests.empty()) return results;

    const std::size_t n_lanes = std::min<std::size_t>(static_cast<std::size_t>(std::max(lanes, 1)), requests.size());
    while (children_.size() < n_lanes) {
        children_.push_back(spawn());
    }
    const std::int64_t base_id = next_id_;
    next_id_ += static_cast<std::int64_t>(requests.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex error_mutex;
    std::string first_error;

    auto lane = [&](Child& child) {
        for (;;) {
            if (abort.load()) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            const std::int64_t id = base_id + static_cast<std::int64_t>(i);
            const std::string line = encode_request(id, requests[i]);
            try {
                child.write_line(line);
                std::string reply;
                if (!child.read_line(reply, options_.timeout_s)) {
                    throw OracleError("timed out after " + std::to_string(options_.timeout_s) + " s");
                }
                json j;
                try {
                    j = json::parse(reply);
                } catch (const json::exception&) {
                    throw OracleError("malformed response line: " + reply);
                }
                if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() ||
                    j["id"].get<std::int64_t>() != id) {
                    throw OracleError("response id mismatch: " + reply);
                }
                if (j.contains("error")) {
                    results[i].error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
                } else if (j.contains("values") && j["values"].is_array()) {
                    std::vector<double> vals;
                    for (const auto& x : j["values"]) {
                        if (!x.is_number()) throw OracleError("non-numeric value in response: " + reply);
                        vals.push_back(x.get<double>());
                    }
                    if (vals.size() != requests[i].qois.size()) {
                        throw OracleError("response has " + std::to_string(vals.size()) + " values for " +
                                          std::to_string(requests[i].qois.size()) + " qois: " + reply);
                    }
                    results[i].values = std::move(vals);
                } else {
                    throw OracleError("response lacks 'values' or 'error': " + reply);
                }
            } catch (const OracleError& e) {
                child.alive = false;
                std::lock_guard lock(error_mutex);
                if (first_error.empty()) {
                    first_error = std::string(e.what()) + "; request: " + line;
                }
                abort.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(n_lanes);
    for (std::size_t l = 0; l < n_lanes; ++l) {
        threads.emplace_back(lane, std::ref(*children_[l]));
    }
    for (auto& t : threads) t.join();

    std::erase_if(children_, [](const std::unique_ptr<Child>& c) { return !c->alive; });
    if (!first_error.empty()) {
        throw OracleError("external oracle '" + options_.command + "': " + first_error);
    }
    return results;
}

}  // namespace mfuq
