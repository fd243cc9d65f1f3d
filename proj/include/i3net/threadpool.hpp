#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace i3net {

// Persistent worker pool with static index partitioning. Work is assigned by
// contiguous index range, never by completion order, so results are identical
// for any worker count. Nested calls run inline on the calling thread.
class ThreadPool {
public:
    static ThreadPool& instance();

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    // f(i) for i in [begin, end). Runs inline when the range is small or when
    // called from inside a pool task.
    void parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& f,
                      std::int64_t min_per_thread = 1);

    ~ThreadPool();

private:
    explicit ThreadPool(int n_workers);
    void worker_loop(int worker_index);

    struct Job {
        const std::function<void(std::int64_t)>* body = nullptr;
        std::int64_t begin = 0, end = 0;
        std::int64_t chunk = 0;
        int n_parts = 0;
    };

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_start_, cv_done_;
    Job job_;
    std::uint64_t epoch_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

// Threads used by the pool: min(hardware_concurrency, I3NET_THREADS if set).
int configured_thread_count();

} // namespace i3net
