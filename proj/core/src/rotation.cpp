#include "napavq/model/rotation.hpp"

#include "napavq/error.hpp"

#include <string>

namespace napavq::model {

GridSample rotate_clockwise(const GridSample& g, int quarter_turns) {
    if (g.height != g.width) throw ContractViolation("rotation needs a square grid");
    if (g.channels <= 0 ||
        g.pixels.size() != static_cast<std::size_t>(g.height) * g.width * g.channels)
        throw ContractViolation("grid pixel count does not match its shape");
    const int n = g.height;
    const int c = g.channels;
    GridSample out = g;
    int k = ((quarter_turns % 4) + 4) % 4;
    GridSample cur = g;
    // one clockwise turn: out[r][col] = in[n-1-col][r]
    for (; k > 0; --k) {
        for (int r = 0; r < n; ++r)
            for (int col = 0; col < n; ++col)
                for (int ch = 0; ch < c; ++ch)
                    out.pixels[(static_cast<std::size_t>(r) * n + col) * c + ch] =
                        cur.pixels[(static_cast<std::size_t>(n - 1 - col) * n + r) * c + ch];
        cur = out;
    }
    return cur;
}

std::vector<GridSample> rotate_augment(std::span<const GridSample> batch, int num_original_classes) {
    std::vector<GridSample> out;
    out.reserve(batch.size() * 4);
    for (const GridSample& g : batch) {
        if (g.label < 0 || g.label >= num_original_classes)
            throw ContractViolation("label " + std::to_string(g.label) + " outside the " +
                                    std::to_string(num_original_classes) + " original classes");
        for (int k = 0; k < 4; ++k) {
            GridSample r = rotate_clockwise(g, k);
            r.label = pseudo_label(g.label, k);
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace napavq::model
