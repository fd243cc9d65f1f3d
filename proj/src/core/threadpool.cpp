#include "i3net/threadpool.hpp"

#include <algorithm>
#include <cstdlib>

namespace i3net {

namespace {
thread_local bool inside_pool_task = false;
}

int configured_thread_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("I3NET_THREADS")) {
        int req = std::atoi(env);
        if (req >= 1) n = req;
    }
    return n;
}

ThreadPool& ThreadPool::instance() {
    static ThreadPool pool(configured_thread_count() - 1);
    return pool;
}

ThreadPool::ThreadPool(int n_workers) {
    workers_.reserve(static_cast<size_t>(std::max(0, n_workers)));
    for (int i = 0; i < n_workers; ++i)
        workers_.emplace_back([this, i] { worker_loop(i); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard<std::mutex> lk(mu_);
        stop_ = true;
    }
    cv_start_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop(int worker_index) {
    inside_pool_task = true;
    std::uint64_t seen = 0;
    for (;;) {
        Job job;
        {
            std::unique_lock<std::mutex> lk(mu_);
            cv_start_.wait(lk, [&] { return stop_ || epoch_ != seen; });
            if (stop_) return;
            seen = epoch_;
            job = job_;
        }
        // Parts are numbered 1..n_workers for workers; part 0 runs on the caller.
        int part = worker_index + 1;
        if (part < job.n_parts) {
            std::int64_t lo = job.begin + part * job.chunk;
            std::int64_t hi = std::min(job.end, lo + job.chunk);
            for (std::int64_t i = lo; i < hi; ++i) (*job.body)(i);
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (--pending_ == 0) cv_done_.notify_all();
        }
    }
}

void ThreadPool::parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& f,
                              std::int64_t min_per_thread) {
    std::int64_t count = end - begin;
    if (count <= 0) return;
    int max_parts = size();
    if (inside_pool_task || workers_.empty() || count < 2 * std::max<std::int64_t>(1, min_per_thread)) {
        for (std::int64_t i = begin; i < end; ++i) f(i);
        return;
    }
    int parts = static_cast<int>(std::min<std::int64_t>(max_parts, (count + min_per_thread - 1) / min_per_thread));
    parts = std::max(parts, 1);
    std::int64_t chunk = (count + parts - 1) / parts;
    {
        std::lock_guard<std::mutex> lk(mu_);
        job_ = Job{&f, begin, end, chunk, parts};
        pending_ = static_cast<int>(workers_.size());
        ++epoch_;
    }
    cv_start_.notify_all();
    // Caller takes part 0.
    std::int64_t hi = std::min(end, begin + chunk);
    bool prev = inside_pool_task;
    inside_pool_task = true;
    for (std::int64_t i = begin; i < hi; ++i) f(i);
    inside_pool_task = prev;
    std::unique_lock<std::mutex> lk(mu_);
    cv_done_.wait(lk, [&] { return pending_ == 0; });
}

} // namespace i3net
