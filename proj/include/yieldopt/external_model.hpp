#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>

#include "yieldopt/qoi_model.hpp"

namespace yieldopt {

class TimeoutError : public ModelError {
public:
    using ModelError::ModelError;
};

class ProtocolError : public ModelError {
public:
    using ModelError::ModelError;
};

class ChildExitError : public ModelError {
public:
    using ModelError::ModelError;
};

struct ExternalModelOptions {
    std::string command;  ///< run through /bin/sh -c
    std::size_t parameter_dim = 12;
    std::chrono::milliseconds timeout{60'000};
    std::optional<std::filesystem::path> cache_path;
    bool cache = true;
};

/// Canonical cache key of (x, p): every value at 12 significant digits.
std::string evaluation_key(const DesignVector& x, std::span<const double> p);

/// QoI computed by a child process speaking line-delimited JSON:
///
///   request   {"id": <int>, "x": [4 reals], "p": [n reals]}
///   response  {"id": <int>, "q": <real>}
///
/// Requests from concurrent callers are multiplexed over one child and
/// matched to replies by id, so replies may arrive in any order.
class ExternalModel final : public QoiModel {
public:
    explicit ExternalModel(ExternalModelOptions options);
    ~ExternalModel() override;

    ExternalModel(const ExternalModel&) = delete;
    ExternalModel& operator=(const ExternalModel&) = delete;

    std::size_t parameter_dim() const override { return options_.parameter_dim; }
    std::string name() const override { return "external"; }

    /// Requests actually sent to the child (cache hits excluded).
    std::uint64_t child_requests() const;
    std::size_t cache_size() const;

protected:
    double do_evaluate(const DesignVector& x, std::span<const double> p) override;

private:
    struct Pending {
        bool done = false;
        double value = 0.0;
        std::exception_ptr error;
    };

    void start_child();
    void reader_loop();
    void fail_all(std::exception_ptr error);
    void load_cache();
    void store_cache(const std::string& key, double q);

    ExternalModelOptions options_;
    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::thread reader_;

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::mutex write_mutex_;
    std::map<std::int64_t, Pending> pending_;
    std::int64_t next_id_ = 1;
    std::uint64_t child_requests_ = 0;
    std::exception_ptr fatal_;

    std::unordered_map<std::string, double> cache_;
    std::ofstream cache_file_;
};

}  // namespace yieldopt
