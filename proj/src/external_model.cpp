#include "yieldopt/external_model.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace yieldopt {

namespace {

std::string format_sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

std::string format_roundtrip(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string evaluation_key(const DesignVector& x, std::span<const double> p) {
    std::string key;
    for (double v : x.as_array()) {
        key += format_sig12(v);
        key += ',';
    }
    key += '|';
    for (double v : p) {
        key += format_sig12(v);
        key += ',';
    }
    return key;
}

ExternalModel::ExternalModel(ExternalModelOptions options) : options_(std::move(options)) {
    if (options_.command.empty()) throw std::invalid_argument("external model needs a command");
    if (options_.cache_path) load_cache();
    start_child();
}

ExternalModel::~ExternalModel() {
    if (to_child_ >= 0) ::close(to_child_);
    if (child_pid_ > 0) {
        int status = 0;
        bool exited = false;
        for (int i = 0; i < 200 && !exited; ++i) {
            exited = ::waitpid(child_pid_, &status, WNOHANG) == child_pid_;
            if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        if (!exited) {
            ::kill(child_pid_, SIGKILL);
            ::waitpid(child_pid_, &status, 0);
        }
    }
    if (reader_.joinable()) reader_.join();
    if (from_child_ >= 0) ::close(from_child_);
}

void ExternalModel::start_child() {
    std::signal(SIGPIPE, SIG_IGN);
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0) {
        throw ModelError(std::string("pipe: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw ModelError(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        const std::string cmd = "exec " + options_.command;
        ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    child_pid_ = pid;
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    reader_ = std::thread([this] { reader_loop(); });
}

void ExternalModel::fail_all(std::exception_ptr error) {
    std::lock_guard lock(mutex_);
    if (!fatal_) fatal_ = error;
    for (auto& [id, p] : pending_) {
        if (!p.done) {
            p.done = true;
            p.error = error;
        }
    }
    cv_.notify_all();
}

void ExternalModel::reader_loop() {
    std::string buffer;
    char chunk[4096];
    for (;;) {
        const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) {
            fail_all(std::make_exception_ptr(ChildExitError("external model process exited")));
            return;
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t pos;
        while ((pos = buffer.find('\n')) != std::string::npos) {
            const std::string line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::int64_t id = 0;
            double q = 0.0;
            try {
                const auto j = nlohmann::json::parse(line);
                if (!j.is_object() || !j.contains("id") || !j.contains("q") || !j["id"].is_number_integer() ||
                    !j["q"].is_number()) {
                    throw ProtocolError("malformed reply from external model: " + line);
                }
                id = j["id"].get<std::int64_t>();
                q = j["q"].get<double>();
            } catch (const ProtocolError&) {
                fail_all(std::current_exception());
                continue;
            } catch (const std::exception&) {
                fail_all(std::make_exception_ptr(ProtocolError("malformed reply from external model: " + line)));
                continue;
            }
            std::lock_guard lock(mutex_);
            auto it = pending_.find(id);
            if (it == pending_.end()) {
                if (id > 0 && id < next_id_) continue;  // reply to a request that already timed out
                const auto err = std::make_exception_ptr(ProtocolError("reply with unknown id " + std::to_string(id)));
                if (!fatal_) fatal_ = err;
                for (auto& [pid, p] : pending_) {
                    if (!p.done) {
                        p.done = true;
                        p.error = err;
                    }
                }
                cv_.notify_all();
                continue;
            }
            if (!std::isfinite(q)) {
                it->second.error = std::make_exception_ptr(ProtocolError("non-finite QoI from external model"));
            } else {
                it->second.value = q;
            }
            it->second.done = true;
            cv_.notify_all();
        }
    }
}

double ExternalModel::do_evaluate(const DesignVector& x, std::span<const double> p) {
    if (p.size() != options_.parameter_dim) {
        throw std::invalid_argument("external model expects " + std::to_string(options_.parameter_dim) +
                                    " uncertain parameters, got " + std::to_string(p.size()));
    }
    const std::string key = evaluation_key(x, p);
    std::int64_t id;
    {
        std::lock_guard lock(mutex_);
        if (options_.cache) {
            auto hit = cache_.find(key);
            if (hit != cache_.end()) return hit->second;
        }
        if (fatal_) std::rethrow_exception(fatal_);
        id = next_id_++;
        pending_[id];
        ++child_requests_;
    }

    nlohmann::json req;
    req["id"] = id;
    req["x"] = x.as_array();
    req["p"] = std::vector<double>(p.begin(), p.end());
    const std::string line = req.dump() + "\n";
    {
        std::lock_guard lock(write_mutex_);
        std::size_t off = 0;
        while (off < line.size()) {
            const ssize_t w = ::write(to_child_, line.data() + off, line.size() - off);
            if (w < 0 && errno == EINTR) continue;
            if (w <= 0) {
                std::lock_guard l2(mutex_);
                pending_.erase(id);
                throw ChildExitError("external model process is gone (write failed)");
            }
            off += static_cast<std::size_t>(w);
        }
    }

    std::unique_lock lock(mutex_);
    const bool ready = cv_.wait_for(lock, options_.timeout, [&] { return pending_[id].done; });
    Pending result = pending_[id];
    pending_.erase(id);
    if (!ready) {
        throw TimeoutError("external model did not answer request " + std::to_string(id) + " within " +
                           std::to_string(options_.timeout.count()) + " ms");
    }
    if (result.error) std::rethrow_exception(result.error);
    if (options_.cache) {
        cache_[key] = result.value;
        lock.unlock();
        store_cache(key, result.value);
    }
    return result.value;
}

std::uint64_t ExternalModel::child_requests() const {
    std::lock_guard lock(mutex_);
    return child_requests_;
}

std::size_t ExternalModel::cache_size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

void ExternalModel::load_cache() {
    const auto& path = *options_.cache_path;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            try {
                cache_[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
            } catch (const std::exception&) {
                // truncated trailing line from an interrupted run
            }
        }
    }
    cache_file_.open(path, std::ios::app);
    if (!cache_file_) throw ModelError("cannot open evaluation cache " + path.string());
}

void ExternalModel::store_cache(const std::string& key, double q) {
    if (!cache_file_.is_open()) return;
    std::lock_guard lock(write_mutex_);
    cache_file_ << key << '\t' << format_roundtrip(q) << '\n';
    cache_file_.flush();
}

}  // namespace yieldopt
