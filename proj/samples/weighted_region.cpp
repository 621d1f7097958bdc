// Traces support points of an aligned 2x2 channel under both encoding orders and prints
// them next to each other.

#include "mimobc/region.hpp"

#include <cstdio>

int main() {
    using namespace mimobc;
    Matrix s1(2, 2), s2(2, 2), s(2, 2);
    s1 << 1.0, 0.3, 0.3, 2.0;
    s2 << 2.5, -0.4, -0.4, 0.8;
    s << 1.5, 0.2, 0.2, 1.0;
    const auto model = make_aligned(s1, s2, s);

    const auto grid = default_weight_grid(4);
    const auto a = trace_boundary(model, Scheme::SDPC, Order::O12, grid);
    const auto b = trace_boundary(model, Scheme::SDPC, Order::O21, grid);
    std::printf("%6s %6s | %8s %8s %8s | %8s %8s %8s | %9s\n", "mu1", "mu2", "R0", "R1", "R2", "R0",
                "R1", "R2", "gap");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& x = a[i].triple;
        const auto& y = b[i].triple;
        std::printf("%6.3f %6.3f | %8.5f %8.5f %8.5f | %8.5f %8.5f %8.5f | %9.2e\n", grid[i].mu1,
                    grid[i].mu2, x.r0, x.r1, x.r2, y.r0, y.r1, y.r2,
                    std::abs(a[i].objective - b[i].objective));
    }
}
