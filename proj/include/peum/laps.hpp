#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "peum/error.hpp"
#include "peum/family.hpp"

namespace peum {

/// Monotonicity interval of f^depth: f^depth maps [a,b] monotonically onto the
/// interval between u = f^depth(a) and w = f^depth(b).
struct Lap {
    double a, b, u, w;
    int depth;
};

// f^k(x) by direct iteration.
inline double iterate(const MapSlice& f, double x, int k) {
    for (int i = 0; i < k; ++i) x = f(x);
    return x;
}

/// Depth-first enumeration of the laps of f^k on [a,b] for k = 0..n, calling
/// visit(lap) for each. Throws BudgetError once more than `budget` laps were visited.
template <class Visit>
std::uint64_t walk_laps(const MapSlice& f, double a, double b, int n, std::uint64_t budget, Visit&& visit) {
    const double c = f.c();
    std::vector<Lap> stack{{a, b, a, b, 0}};
    std::uint64_t count = 0;
    while (!stack.empty()) {
        Lap lap = stack.back();
        stack.pop_back();
        if (++count > budget) throw BudgetError("lap budget exhausted");
        visit(lap);
        if (lap.depth >= n) continue;
        const double lo = std::min(lap.u, lap.w), hi = std::max(lap.u, lap.w);
        auto child = [&](double xa, double xb, double ua, double wb) {
            if (!(xb > xa)) return;
            Symbol s = f.symbol(0.5 * (ua + wb));
            stack.push_back({xa, xb, f.value(s, ua), f.value(s, wb), lap.depth + 1});
        };
        if (lo < c && c < hi) {
            double xs;
            if (f.affine()) {
                xs = lap.a + (c - lap.u) / (lap.w - lap.u) * (lap.b - lap.a);
            } else {
                double p = lap.a, q = lap.b;
                const bool inc = lap.w > lap.u;
                for (int it = 0; it < 80 && q - p > 1e-16; ++it) {
                    double m = 0.5 * (p + q);
                    double y = iterate(f, m, lap.depth);
                    if ((y < c) == inc) p = m;
                    else q = m;
                }
                xs = 0.5 * (p + q);
            }
            xs = std::clamp(xs, lap.a, lap.b);
            // push right piece first so the left piece is visited first
            child(xs, lap.b, c, lap.w);
            child(lap.a, xs, lap.u, c);
        } else {
            child(lap.a, lap.b, lap.u, lap.w);
        }
    }
    return count;
}

}  // namespace peum
