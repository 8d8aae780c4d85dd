#include "obl/oalg.hpp"

#include <algorithm>
#include <utility>

namespace obl {

size_t bitonic_sort(ElementBuffer<word>& buf, bool ascending) {
    return detail::bitonic_sort_any(buf, ascending);
}

size_t bitonic_sort(ElementBuffer<SortRecord>& buf, bool ascending) {
    return detail::bitonic_sort_any(buf, ascending);
}

word o_edit_distance(const ElementBuffer<uint8_t>& a,
                     const ElementBuffer<uint8_t>& b) {
    const size_t n1 = a.len();
    const size_t n2 = b.len();
    AccessTrace* sink = a.sink();

    ElementBuffer<word> row0(sink, n2 + 1);
    ElementBuffer<word> row1(sink, n2 + 1);
    ElementBuffer<word>* prev = &row0;
    ElementBuffer<word>* cur = &row1;

    for (size_t j = 0; j <= n2; ++j) prev->write(j, j);
    for (size_t i = 1; i <= n1; ++i) {
        cur->write(0, i);
        const word c1 = a.read(i - 1);
        for (size_t j = 1; j <= n2; ++j) {
            const word c2 = b.read(j - 1);
            const word del = prev->read(j) + 1;
            const word ins = cur->read(j - 1) + 1;
            const word sub = prev->read(j - 1) + o_select(o_equal(c1, c2), 0, 1);
            cur->write(j, o_min(o_min(del, ins), sub));
        }
        std::swap(prev, cur);
    }
    return prev->read(n2);
}

word o_edit_distance_full(const ElementBuffer<uint8_t>& a,
                          const ElementBuffer<uint8_t>& b) {
    const size_t n1 = a.len();
    const size_t n2 = b.len();
    const size_t w = n2 + 1;
    ElementBuffer<word> m(a.sink(), (n1 + 1) * w);

    for (size_t j = 0; j <= n2; ++j) m.write(j, j);
    for (size_t i = 1; i <= n1; ++i) {
        m.write(i * w, i);
        const word c1 = a.read(i - 1);
        for (size_t j = 1; j <= n2; ++j) {
            const word c2 = b.read(j - 1);
            const word del = m.read((i - 1) * w + j) + 1;
            const word ins = m.read(i * w + j - 1) + 1;
            const word sub =
                m.read((i - 1) * w + j - 1) + o_select(o_equal(c1, c2), 0, 1);
            m.write(i * w + j, o_min(o_min(del, ins), sub));
        }
    }
    return m.read(n1 * w + n2);
}

void o_floyd_warshall(DistMatrix& m) {
    const size_t n = m.n;
    for (size_t k = 0; k < n; ++k) {
        for (size_t i = 0; i < n; ++i) {
            const word ik = m.entries.read(i * n + k);
            for (size_t j = 0; j < n; ++j) {
                const word kj = m.entries.read(k * n + j);
                const word ij = m.entries.read(i * n + j);
                m.entries.write(i * n + j, o_min(ij, sat_add_distance(ik, kj)));
            }
        }
    }
}

void unprotected_sort(std::vector<word>& v, bool ascending) {
    if (ascending) {
        std::sort(v.begin(), v.end());
    } else {
        std::sort(v.begin(), v.end(), std::greater<>());
    }
}

void unprotected_sort(std::vector<SortRecord>& v, bool ascending) {
    if (ascending) {
        std::sort(v.begin(), v.end(),
                  [](const SortRecord& a, const SortRecord& b) {
                      return a.key < b.key ||
                             (a.key == b.key && a.payload < b.payload);
                  });
    } else {
        std::sort(v.begin(), v.end(),
                  [](const SortRecord& a, const SortRecord& b) {
                      return a.key > b.key ||
                             (a.key == b.key && a.payload > b.payload);
                  });
    }
}

uint64_t unprotected_edit_distance(std::span<const uint8_t> a,
                                   std::span<const uint8_t> b) {
    const size_t n1 = a.size();
    const size_t n2 = b.size();
    std::vector<uint64_t> prev(n2 + 1), cur(n2 + 1);
    for (size_t j = 0; j <= n2; ++j) prev[j] = j;
    for (size_t i = 1; i <= n1; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= n2; ++j) {
            if (a[i - 1] == b[j - 1]) {
                cur[j] = prev[j - 1];
            } else {
                cur[j] = 1 + std::min({prev[j], cur[j - 1], prev[j - 1]});
            }
        }
        std::swap(prev, cur);
    }
    return prev[n2];
}

void unprotected_floyd_warshall(std::vector<word>& dist, size_t n) {
    for (size_t k = 0; k < n; ++k) {
        for (size_t i = 0; i < n; ++i) {
            const word ik = dist[i * n + k];
            if (ik >= kInfDistance) continue;
            for (size_t j = 0; j < n; ++j) {
                const word cand = ik + dist[k * n + j];
                if (cand < dist[i * n + j]) dist[i * n + j] = cand;
            }
        }
    }
}

}  // namespace obl
