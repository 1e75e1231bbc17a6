#include "parsrec/external_parser.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <iostream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace parsrec {

using ordered_json = nlohmann::ordered_json;

ExternalParserProcess::ExternalParserProcess(std::vector<std::string> command, int timeout_ms)
    : command_(std::move(command)), timeout_ms_(timeout_ms > 0 ? timeout_ms : 10000) {}

ExternalParserProcess::~ExternalParserProcess() { shutdown(); }

bool ExternalParserProcess::spawn() {
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0) return false;
    if (pipe(from_child) != 0) {
        close(to_child[0]);
        close(to_child[1]);
        return false;
    }
    const pid_t pid = fork();
    if (pid < 0) {
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        return false;
    }
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> argv;
        argv.reserve(command_.size() + 1);
        for (auto& arg : command_) argv.push_back(arg.data());
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    pid_ = pid;
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
    buffer_.clear();
    // Writes to a dead child must surface as errors, not kill the parent.
    signal(SIGPIPE, SIG_IGN);
    return true;
}

void ExternalParserProcess::shutdown() {
    if (stdin_fd_ >= 0) close(stdin_fd_);
    if (stdout_fd_ >= 0) close(stdout_fd_);
    stdin_fd_ = stdout_fd_ = -1;
    if (pid_ > 0) {
        kill(static_cast<pid_t>(pid_), SIGKILL);
        int status = 0;
        waitpid(static_cast<pid_t>(pid_), &status, 0);
    }
    pid_ = -1;
    buffer_.clear();
}

bool ExternalParserProcess::write_line(const std::string& line) {
    std::size_t written = 0;
    while (written < line.size()) {
        const ssize_t n = write(stdin_fd_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        written += static_cast<std::size_t>(n);
    }
    return true;
}

bool ExternalParserProcess::read_line(std::string& line, int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (true) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return true;
        }
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) return false;
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd pfd{stdout_fd_, POLLIN, 0};
        const int pr = poll(&pfd, 1, static_cast<int>(left));
        if (pr <= 0) {
            if (pr < 0 && errno == EINTR) continue;
            return false;  // timeout or poll failure
        }
        char chunk[4096];
        const ssize_t n = read(stdout_fd_, chunk, sizeof(chunk));
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        if (n == 0) return false;  // EOF: child exited
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

ParseOutcome ExternalParserProcess::request(const std::string& ref_id, const std::string& raw) {
    ParseOutcome out;
    if (pid_ <= 0 && !spawn()) {
        out.failed = true;
        return out;
    }

    ordered_json req;
    req["id"] = ref_id;
    req["ref"] = raw;
    if (!write_line(req.dump() + "\n")) {
        shutdown();
        out.failed = true;
        return out;
    }

    // Lines with a non-matching id are discarded; a response is only
    // accepted when its id echoes the request.
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    while (true) {
        const auto now = std::chrono::steady_clock::now();
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        if (left <= 0) {
            shutdown();
            out.failed = true;
            return out;
        }
        std::string line;
        if (!read_line(line, static_cast<int>(left))) {
            shutdown();
            out.failed = true;
            return out;
        }
        ordered_json resp;
        try {
            resp = ordered_json::parse(line);
        } catch (const std::exception&) {
            shutdown();
            out.failed = true;
            return out;
        }
        if (!resp.is_object() || resp.value("id", "") != ref_id) {
            std::cerr << "external parser: discarding response with unexpected id\n";
            continue;
        }
        if (!resp.contains("fields") || !resp["fields"].is_array()) {
            shutdown();
            out.failed = true;
            return out;
        }
        for (const auto& fj : resp["fields"]) {
            const std::string type = fj.value("type", "");
            const std::string value = fj.value("value", "");
            if (type.empty() || value.empty()) {
                std::cerr << "external parser: dropping malformed field entry\n";
                continue;
            }
            out.fields.add(type, value);
        }
        return out;
    }
}

}  // namespace parsrec
