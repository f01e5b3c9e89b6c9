// CSV and JSON export of results. Header strings and JSON keys are fixed.
#pragma once

#include "rllfbc/coding.hpp"
#include "rllfbc/dp.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

namespace rllfbc::io {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCapacityHeader = "epsilon,p_star,capacity,capacity_alt,noncausal_max";
inline constexpr const char* kValueFunctionHeader = "z,h,delta_star";
inline constexpr const char* kHistogramHeader = "state,count";

struct CapacityRow {
    double epsilon = 0.0;
    double p_star = 0.0;
    double capacity = 0.0;
    double capacity_alt = 0.0;
    double noncausal_max = 0.0;
};

/// One row of the capacity table; the alternative and non-causal columns
/// take their limiting value 0 at eps = 1.
CapacityRow capacity_row(ErasureProb eps);

void write_capacity_csv(std::ostream& out, const std::vector<CapacityRow>& rows);
void write_value_function_csv(std::ostream& out, const ValueFunction& h);
void write_histogram_csv(std::ostream& out, const std::map<double, std::uint64_t>& histogram);

/// One JSON object per step: {t, x, y, theta, phase, set_size}. set_size is a
/// number when it fits in 64 bits and a decimal string otherwise.
void write_transcript_jsonl(std::ostream& out, const Transcript& transcript);

nlohmann::json step_json(const StepRecord& step);

}  // namespace rllfbc::io
