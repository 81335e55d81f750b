#pragma once

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "sbalc/benchmarks.hpp"

namespace sbalc {

/// Line protocol to an external log-likelihood process.
///
/// Handshake: engine sends "SBALC/1 <d>\n", the model echoes it back.
/// Per call: engine sends d space-separated decimals on one line, the
/// model replies either a single decimal log-likelihood or
/// "ERROR <message>". The process is reused across calls.
class ExternalModel {
public:
    ExternalModel(const std::string& command, Eigen::Index dim,
                  double timeout_s = 600.0)
        : command_(command), dim_(dim), timeout_s_(timeout_s) {
        spawn();
        handshake();
    }

    ~ExternalModel() { shutdown(); }

    ExternalModel(const ExternalModel&) = delete;
    ExternalModel& operator=(const ExternalModel&) = delete;

    double evaluate(const Eigen::VectorXd& x) {
        if (x.size() != dim_)
            throw std::invalid_argument("ExternalModel: dimension mismatch");
        std::ostringstream line;
        line.precision(17);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            if (j) line << ' ';
            line << x[j];
        }
        line << '\n';
        write_all(line.str());
        std::string reply = read_line();
        if (reply.rfind("ERROR", 0) == 0)
            throw std::runtime_error("ExternalModel: model error '" + reply +
                                     "' at x = [" + line.str() + "]");
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(reply, &pos);
        } catch (const std::exception&) {
            throw std::runtime_error("ExternalModel: malformed reply '" + reply + "'");
        }
        while (pos < reply.size() && std::isspace(static_cast<unsigned char>(reply[pos])))
            ++pos;
        if (pos != reply.size())
            throw std::runtime_error("ExternalModel: malformed reply '" + reply + "'");
        return v;
    }

    Eigen::Index dim() const { return dim_; }

private:
    void spawn() {
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw std::runtime_error("ExternalModel: pipe() failed");
        pid_ = fork();
        if (pid_ < 0) throw std::runtime_error("ExternalModel: fork() failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]); close(to_child[1]);
            close(from_child[0]); close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
    }

    void handshake() {
        std::string hello = "SBALC/1 " + std::to_string(dim_) + "\n";
        write_all(hello);
        std::string echo = read_line();
        if (echo != "SBALC/1 " + std::to_string(dim_))
            throw std::runtime_error("ExternalModel: handshake mismatch, got '" +
                                     echo + "'");
    }

    void write_all(const std::string& data) {
        std::size_t off = 0;
        while (off < data.size()) {
            ssize_t k = ::write(write_fd_, data.data() + off, data.size() - off);
            if (k < 0) {
                if (errno == EINTR) continue;
                throw std::runtime_error("ExternalModel: write failed (process exited?)");
            }
            off += static_cast<std::size_t>(k);
        }
    }

    std::string read_line() {
        while (true) {
            auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            struct pollfd pfd {read_fd_, POLLIN, 0};
            int pr = ::poll(&pfd, 1, static_cast<int>(timeout_s_ * 1000.0));
            if (pr == 0)
                throw std::runtime_error("ExternalModel: reply timeout");
            if (pr < 0 && errno != EINTR)
                throw std::runtime_error("ExternalModel: poll failed");
            char chunk[4096];
            ssize_t k = ::read(read_fd_, chunk, sizeof(chunk));
            if (k == 0)
                throw std::runtime_error("ExternalModel: process closed its output");
            if (k < 0) {
                if (errno == EINTR) continue;
                throw std::runtime_error("ExternalModel: read failed");
            }
            buffer_.append(chunk, static_cast<std::size_t>(k));
        }
    }

    void shutdown() {
        if (write_fd_ >= 0) close(write_fd_);
        if (read_fd_ >= 0) close(read_fd_);
        if (pid_ > 0) {
            int status = 0;
            if (waitpid(pid_, &status, WNOHANG) == 0) {
                kill(pid_, SIGTERM);
                waitpid(pid_, &status, 0);
            }
        }
        write_fd_ = read_fd_ = -1;
        pid_ = -1;
    }

    std::string command_;
    Eigen::Index dim_;
    double timeout_s_;
    pid_t pid_ = -1;
    int write_fd_ = -1, read_fd_ = -1;
    std::string buffer_;
};

/// Wrap an external process as a LogLikelihoodModel. The process lives
/// as long as any copy of the returned model.
inline LogLikelihoodModel external_model_protocol(const std::string& command,
                                                  Eigen::Index dim,
                                                  double timeout_s = 600.0) {
    auto proc = std::make_shared<ExternalModel>(command, dim, timeout_s);
    LogLikelihoodModel m;
    m.dim = dim;
    m.name = "external: " + command;
    m.eval = [proc](const Eigen::VectorXd& x) { return proc->evaluate(x); };
    return m;
}

} // namespace sbalc
