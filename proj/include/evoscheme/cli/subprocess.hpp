#pragma once

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "evoscheme/core.hpp"

namespace evoscheme {

/// Black-box objective served by a child process.
///
/// Protocol: for each evaluation one line with the phenotype coordinates
/// (whitespace separated, 17 significant digits) is written to the child's
/// standard input, and one line holding the fitness is read back from its
/// standard output. Calls are serialized.
class SubprocessObjective {
public:
    explicit SubprocessObjective(std::vector<std::string> argv) : argv_(std::move(argv)) {
        if (argv_.empty()) throw InvariantError("external objective command is empty");
        // A child that dies must surface as an evaluation error, not SIGPIPE.
        std::signal(SIGPIPE, SIG_IGN);
        int in_pipe[2], out_pipe[2];
        if (::pipe(in_pipe) != 0) throw std::runtime_error("pipe() failed");
        if (::pipe(out_pipe) != 0) {
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            throw std::runtime_error("pipe() failed");
        }
        pid_ = ::fork();
        if (pid_ < 0) throw std::runtime_error("fork() failed");
        if (pid_ == 0) {
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(out_pipe[1]);
            std::vector<char*> args;
            for (auto& a : argv_) args.push_back(a.data());
            args.push_back(nullptr);
            ::execvp(args[0], args.data());
            std::_Exit(127);
        }
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
        ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
        to_child_ = ::fdopen(in_pipe[1], "w");
        from_child_ = ::fdopen(out_pipe[0], "r");
    }

    SubprocessObjective(const SubprocessObjective&) = delete;
    SubprocessObjective& operator=(const SubprocessObjective&) = delete;

    ~SubprocessObjective() {
        if (to_child_) std::fclose(to_child_);
        if (from_child_) std::fclose(from_child_);
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    double operator()(std::span<const double> x) {
        std::lock_guard lock(mutex_);
        std::string line;
        char buf[64];
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x[i]);
            if (i) line += ' ';
            line += buf;
        }
        line += '\n';
        if (std::fputs(line.c_str(), to_child_) == EOF || std::fflush(to_child_) != 0)
            throw EvaluationError("external objective: cannot write to child process", Point(x.begin(), x.end()));
        std::string reply;
        int c;
        while ((c = std::fgetc(from_child_)) != EOF && c != '\n') reply += static_cast<char>(c);
        if (c == EOF && reply.empty())
            throw EvaluationError("external objective: child process closed its output", Point(x.begin(), x.end()));
        char* end = nullptr;
        const double f = std::strtod(reply.c_str(), &end);
        if (end == reply.c_str())
            throw EvaluationError("external objective: cannot parse reply '" + reply + "'", Point(x.begin(), x.end()));
        return f;
    }

    /// Objective callback sharing ownership of the process.
    static Objective::Function function(std::shared_ptr<SubprocessObjective> proc) {
        return [proc = std::move(proc)](std::span<const double> x) { return (*proc)(x); };
    }

private:
    std::vector<std::string> argv_;
    pid_t pid_ = -1;
    std::FILE* to_child_ = nullptr;
    std::FILE* from_child_ = nullptr;
    std::mutex mutex_;
};

}  // namespace evoscheme
