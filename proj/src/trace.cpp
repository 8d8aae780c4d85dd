#include "obl/trace.hpp"

#include <fstream>
#include <ostream>

namespace obl {

namespace {
bool g_recording = true;
}

bool trace_recording_enabled() noexcept { return g_recording; }
void set_trace_recording_enabled(bool on) noexcept { g_recording = on; }

bool trace_equal(const AccessTrace& a, const AccessTrace& b) {
    return a.events() == b.events();
}

std::optional<size_t> first_divergence(const AccessTrace& a,
                                       const AccessTrace& b) {
    const auto& ea = a.events();
    const auto& eb = b.events();
    const size_t n = ea.size() < eb.size() ? ea.size() : eb.size();
    for (size_t i = 0; i < n; ++i) {
        if (!(ea[i] == eb[i])) return i;
    }
    if (ea.size() != eb.size()) return n;
    return std::nullopt;
}

AccessTrace page_project(const AccessTrace& t, uint64_t page_bytes) {
    if (page_bytes == 0) throw std::invalid_argument("page_project: zero page");
    AccessTrace out(t.size() + 1);
    bool have_prev = false;
    AccessEvent prev{};
    for (const AccessEvent& ev : t.events()) {
        AccessEvent proj = ev;
        proj.offset = ev.offset * ev.width / page_bytes;
        if (have_prev && proj.kind == prev.kind && proj.region == prev.region &&
            proj.offset == prev.offset) {
            continue;
        }
        out.append(proj);
        prev = proj;
        have_prev = true;
    }
    return out;
}

void dump_trace(const AccessTrace& t, std::ostream& os) {
    for (const AccessEvent& ev : t.events()) {
        os << (ev.kind == AccessKind::Read ? 'R' : 'W') << ' ' << ev.region
           << ' ' << ev.offset << ' ' << ev.width << '\n';
    }
}

void dump_trace_file(const AccessTrace& t, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("dump_trace_file: cannot open " + path);
    dump_trace(t, os);
}

}  // namespace obl
