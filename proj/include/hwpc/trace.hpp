#pragma once

#include <cstdint>
#include <vector>

#include "hwpc/rational.hpp"

namespace hwpc {

// The scheduling model restricts every module's cumulative token count to
//   F(t) = max( ceil((t - s - L + 1) * R), 0 )
// with rate 0 < R <= 1, latency L >= 0 and start delay s >= 0. The first
// token appears exactly at t = s + L.
std::int64_t trace_eval(std::int64_t latency, Rat rate, std::int64_t start, std::int64_t t);

// Fit of a measured cumulative trace against the model at a known rate:
// the smallest latency whose model trace lower-bounds the measurement, and
// the burstiness, the maximum excess of the measurement over that model.
struct TraceFit {
    std::int64_t latency = 0;
    std::int64_t burst = 0;
};

// `cumulative[t]` counts tokens produced in cycles 0..t. Fitting needs at
// least one produced token.
TraceFit fit_trace(const std::vector<std::int64_t>& cumulative, Rat rate);

// Maximum excess of a measured trace over the model with a fixed latency;
// negative when the model overtakes the measurement somewhere (the model is
// then not a valid lower bound).
std::int64_t excess_over_model(const std::vector<std::int64_t>& cumulative, std::int64_t latency, Rat rate);

} // namespace hwpc
