#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace obl {

using RegionId = uint32_t;

enum class AccessKind : uint8_t { Read, Write };

// One element-granular memory touch.  offset is an element index within the
// region, width the element size in bytes.
struct AccessEvent {
    AccessKind kind;
    RegionId region;
    uint64_t offset;
    uint32_t width;

    friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

// Global kill switch for recording.  Benchmarks flip it off so timed regions
// pay only a predictable test per access.
bool trace_recording_enabled() noexcept;
void set_trace_recording_enabled(bool on) noexcept;

// RAII helper for scoping the global switch.
class RecordingGuard {
public:
    explicit RecordingGuard(bool on) : prev_(trace_recording_enabled()) {
        set_trace_recording_enabled(on);
    }
    ~RecordingGuard() { set_trace_recording_enabled(prev_); }
    RecordingGuard(const RecordingGuard&) = delete;
    RecordingGuard& operator=(const RecordingGuard&) = delete;

private:
    bool prev_;
};

// Program-order sequence of events plus the region-id allocator.  Region ids
// are handed out sequentially per trace, so two runs that create their
// buffers in the same order get comparable traces by construction.
class AccessTrace {
public:
    static constexpr size_t kDefaultEventCap = 100'000'000;

    AccessTrace() = default;
    explicit AccessTrace(size_t event_cap) : cap_(event_cap) {}

    void append(AccessEvent ev) {
        if (events_.size() >= cap_) {
            throw std::length_error("AccessTrace: event cap " +
                                    std::to_string(cap_) + " exceeded");
        }
        events_.push_back(ev);
    }

    RegionId new_region() noexcept { return next_region_++; }

    const std::vector<AccessEvent>& events() const noexcept { return events_; }
    size_t size() const noexcept { return events_.size(); }
    bool empty() const noexcept { return events_.empty(); }
    const AccessEvent& operator[](size_t i) const { return events_[i]; }

    // Drops recorded events but keeps region numbering, so buffers created
    // before the clear stay distinguishable afterwards.
    void clear_events() noexcept { events_.clear(); }

private:
    std::vector<AccessEvent> events_;
    size_t cap_ = kDefaultEventCap;
    RegionId next_region_ = 0;
};

bool trace_equal(const AccessTrace& a, const AccessTrace& b);

// Index of the first position where the traces differ (a length mismatch
// diverges at the shorter length).  nullopt when equal.
std::optional<size_t> first_divergence(const AccessTrace& a,
                                       const AccessTrace& b);

// Coarsens element offsets to page indices (byte offset / page_bytes) and
// collapses runs of consecutive duplicate events.  The first event of each
// run survives, width included.
AccessTrace page_project(const AccessTrace& t, uint64_t page_bytes);

// One line per event: "R <region> <offset> <width>" / "W ...".
void dump_trace(const AccessTrace& t, std::ostream& os);
void dump_trace_file(const AccessTrace& t, const std::string& path);

// Instrumented flat array of trivially copyable elements.  Every read/write
// while recording emits exactly one event; out-of-range access throws.
// A null sink means the buffer is untracked (region 0, nothing recorded).
template <typename T>
class ElementBuffer {
    static_assert(std::is_trivially_copyable_v<T>);

public:
    ElementBuffer(AccessTrace* sink, size_t len)
        : sink_(sink), data_(len), region_(sink ? sink->new_region() : 0) {}

    ElementBuffer(AccessTrace* sink, std::span<const T> init)
        : sink_(sink),
          data_(init.begin(), init.end()),
          region_(sink ? sink->new_region() : 0) {}

    T read(size_t i) const {
        check(i);
        record(AccessKind::Read, i);
        return data_[i];
    }

    void write(size_t i, const T& v) {
        check(i);
        record(AccessKind::Write, i);
        data_[i] = v;
    }

    size_t len() const noexcept { return data_.size(); }
    RegionId region() const noexcept { return region_; }
    AccessTrace* sink() const noexcept { return sink_; }

    bool recording() const noexcept { return recording_; }
    void set_recording(bool on) noexcept { recording_ = on; }

    // Unrecorded view for setup and verification only; algorithm code must
    // go through read/write.
    std::span<T> raw() noexcept { return data_; }
    std::span<const T> raw() const noexcept { return data_; }

private:
    void check(size_t i) const {
        if (i >= data_.size()) {
            throw std::out_of_range("ElementBuffer: index " + std::to_string(i) +
                                    " out of range [0," +
                                    std::to_string(data_.size()) + ")");
        }
    }

    void record(AccessKind k, size_t i) const {
        if (recording_ && sink_ && trace_recording_enabled()) {
            sink_->append({k, region_, i, static_cast<uint32_t>(sizeof(T))});
        }
    }

    AccessTrace* sink_;
    std::vector<T> data_;
    RegionId region_;
    bool recording_ = true;
};

// Instrumented byte store with a runtime element width, for structures whose
// slot size is a configuration value (ORAM buckets, disk blocks).
class RawBuffer {
public:
    RawBuffer(AccessTrace* sink, size_t len, uint32_t elem_width)
        : sink_(sink),
          width_(elem_width),
          len_(len),
          data_(len * size_t{elem_width}),
          region_(sink ? sink->new_region() : 0) {
        if (elem_width == 0) throw std::invalid_argument("RawBuffer: zero width");
    }

    void read(size_t i, uint8_t* out) const {
        check(i);
        record(AccessKind::Read, i);
        std::memcpy(out, data_.data() + i * width_, width_);
    }

    void write(size_t i, const uint8_t* in) {
        check(i);
        record(AccessKind::Write, i);
        std::memcpy(data_.data() + i * width_, in, width_);
    }

    size_t len() const noexcept { return len_; }
    uint32_t elem_width() const noexcept { return width_; }
    RegionId region() const noexcept { return region_; }
    AccessTrace* sink() const noexcept { return sink_; }

    bool recording() const noexcept { return recording_; }
    void set_recording(bool on) noexcept { recording_ = on; }

    std::span<uint8_t> raw() noexcept { return data_; }
    std::span<const uint8_t> raw() const noexcept { return data_; }
    const uint8_t* raw_elem(size_t i) const { return data_.data() + i * width_; }

private:
    void check(size_t i) const {
        if (i >= len_) {
            throw std::out_of_range("RawBuffer: index " + std::to_string(i) +
                                    " out of range [0," + std::to_string(len_) +
                                    ")");
        }
    }

    void record(AccessKind k, size_t i) const {
        if (recording_ && sink_ && trace_recording_enabled()) {
            sink_->append({k, region_, i, width_});
        }
    }

    AccessTrace* sink_;
    uint32_t width_;
    size_t len_;
    std::vector<uint8_t> data_;
    RegionId region_;
    bool recording_ = true;
};

}  // namespace obl
