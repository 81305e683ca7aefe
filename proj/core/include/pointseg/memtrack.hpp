#pragma once

#include <cstddef>
#include <vector>

namespace pointseg {

// Thread-local live/peak byte accounting for the sampling benchmark.
// The samplers route their scratch buffers through TrackingAllocator, and an
// AllocScope measures the peak number of live tracked bytes above the
// baseline that existed when the scope was opened.
namespace memtrack {

struct Counters {
    std::size_t live = 0;
    std::size_t peak = 0;
};

inline Counters& counters() {
    thread_local Counters c;
    return c;
}

inline void on_alloc(std::size_t bytes) {
    Counters& c = counters();
    c.live += bytes;
    if (c.live > c.peak) c.peak = c.live;
}

inline void on_free(std::size_t bytes) {
    Counters& c = counters();
    c.live = (bytes > c.live) ? 0 : c.live - bytes;
}

// Record an allocation that is never materialized (used when a cell's
// footprint is estimated instead of measured).
inline void on_virtual_alloc(std::size_t bytes) {
    Counters& c = counters();
    if (c.live + bytes > c.peak) c.peak = c.live + bytes;
}

}  // namespace memtrack

class AllocScope {
public:
    AllocScope() {
        auto& c = memtrack::counters();
        baseline_ = c.live;
        saved_peak_ = c.peak;
        c.peak = c.live;
    }

    // Scopes nest: on close, the inner peak is merged back so an enclosing
    // scope still observes the high-water mark reached inside.
    ~AllocScope() {
        auto& c = memtrack::counters();
        if (saved_peak_ > c.peak) c.peak = saved_peak_;
    }

    AllocScope(const AllocScope&) = delete;
    AllocScope& operator=(const AllocScope&) = delete;

    // Peak tracked bytes allocated above the baseline since construction.
    std::size_t peak_bytes() const {
        const auto& c = memtrack::counters();
        return c.peak > baseline_ ? c.peak - baseline_ : 0;
    }

private:
    std::size_t baseline_ = 0;
    std::size_t saved_peak_ = 0;
};

// Accounts for a buffer held in an untracked container (for example a result
// struct built on plain std::vector) for the lifetime of the scope.
class ScopedTrackedBytes {
public:
    explicit ScopedTrackedBytes(std::size_t bytes) : bytes_(bytes) { memtrack::on_alloc(bytes_); }
    ~ScopedTrackedBytes() { memtrack::on_free(bytes_); }
    ScopedTrackedBytes(const ScopedTrackedBytes&) = delete;
    ScopedTrackedBytes& operator=(const ScopedTrackedBytes&) = delete;

private:
    std::size_t bytes_;
};

template <typename T>
struct TrackingAllocator {
    using value_type = T;

    TrackingAllocator() = default;
    template <typename U>
    TrackingAllocator(const TrackingAllocator<U>&) {}

    T* allocate(std::size_t n) {
        memtrack::on_alloc(n * sizeof(T));
        return static_cast<T*>(::operator new(n * sizeof(T)));
    }

    void deallocate(T* p, std::size_t n) {
        memtrack::on_free(n * sizeof(T));
        ::operator delete(p);
    }

    bool operator==(const TrackingAllocator&) const { return true; }
};

template <typename T>
using tracked_vector = std::vector<T, TrackingAllocator<T>>;

}  // namespace pointseg
