#include "rllfbc/io.hpp"

#include <cstdio>
#include <limits>
#include <string>

namespace rllfbc::io {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

CapacityRow capacity_row(ErasureProb eps) {
    const auto cap = feedback_capacity(eps);
    CapacityRow row{eps.value(), cap.p_star, cap.capacity_bits, 0.0, 0.0};
    if (!cap.degenerate) {
        row.capacity_alt = capacity_alt_form(eps);
        row.noncausal_max = noncausal_max(eps);
    }
    return row;
}

void write_capacity_csv(std::ostream& out, const std::vector<CapacityRow>& rows) {
    out << kCapacityHeader << '\n';
    for (const auto& r : rows) {
        out << num(r.epsilon) << ',' << num(r.p_star) << ',' << num(r.capacity) << ',' << num(r.capacity_alt) << ','
            << num(r.noncausal_max) << '\n';
    }
}

void write_value_function_csv(std::ostream& out, const ValueFunction& h) {
    out << kValueFunctionHeader << '\n';
    for (std::size_t i = 0; i < h.grid_size(); ++i) {
        out << num(h.z_at(i)) << ',' << num(h.values[i]) << ',' << num(h.policy[i]) << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const std::map<double, std::uint64_t>& histogram) {
    out << kHistogramHeader << '\n';
    for (const auto& [state, count] : histogram) out << num(state) << ',' << count << '\n';
}

nlohmann::json step_json(const StepRecord& step) {
    nlohmann::json j;
    j["t"] = step.t;
    j["x"] = step.x;
    j["y"] = std::string(1, to_char(step.y));
    j["theta"] = step.theta ? 1 : 0;
    j["phase"] = step.phase;
    const BigUint size(step.set_size);
    if (size <= std::numeric_limits<std::uint64_t>::max()) {
        j["set_size"] = size.convert_to<std::uint64_t>();
    } else {
        j["set_size"] = step.set_size;
    }
    return j;
}

void write_transcript_jsonl(std::ostream& out, const Transcript& transcript) {
    for (const auto& step : transcript.steps) out << step_json(step).dump() << '\n';
}

}  // namespace rllfbc::io
