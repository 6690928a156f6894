#include "hwpc/trace.hpp"

#include <stdexcept>

namespace hwpc {

std::int64_t trace_eval(std::int64_t latency, Rat rate, std::int64_t start, std::int64_t t) {
    if (latency < 0 || start < 0) throw std::invalid_argument("trace_eval: negative latency or start");
    if (rate <= Rat(0) || rate > Rat(1)) throw std::invalid_argument("trace_eval: rate must be in (0,1]");
    const std::int64_t shifted = t - start - latency + 1;
    const std::int64_t count = rat_ceil(rate * shifted);
    return count > 0 ? count : 0;
}

std::int64_t excess_over_model(const std::vector<std::int64_t>& cumulative, std::int64_t latency, Rat rate) {
    std::int64_t worst = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t t = 0; t < (std::int64_t)cumulative.size(); ++t) {
        const std::int64_t gap = cumulative[t] - trace_eval(latency, rate, 0, t);
        worst = std::max(worst, gap);
    }
    return worst;
}

TraceFit fit_trace(const std::vector<std::int64_t>& cumulative, Rat rate) {
    if (cumulative.empty() || cumulative.back() == 0)
        throw std::invalid_argument("fit_trace: stimulus too short, no tokens produced");
    // The model lower-bounds the measurement iff it does at every point;
    // raising L only delays the model, so scan L upward to the first fit.
    for (std::int64_t lat = 0; lat <= (std::int64_t)cumulative.size(); ++lat) {
        bool below = true;
        for (std::int64_t t = 0; below && t < (std::int64_t)cumulative.size(); ++t)
            below = trace_eval(lat, rate, 0, t) <= cumulative[t];
        if (below) return {lat, excess_over_model(cumulative, lat, rate)};
    }
    throw std::invalid_argument("fit_trace: no latency makes the model a lower bound");
}

} // namespace hwpc
