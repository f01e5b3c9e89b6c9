#include "commands.hpp"

#include "rllfbc/capacity.hpp"
#include "rllfbc/coding.hpp"
#include "rllfbc/dp.hpp"
#include "rllfbc/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>

namespace rllfbc::cli {

using nlohmann::json;

namespace {

ErasureProb checked_eps(double value) {
    if (!(value >= 0.0 && value <= 1.0)) throw UsageError("--eps must lie in [0,1]");
    return ErasureProb(value);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream file(path);
    if (!file) throw UsageError("cannot open output file " + path);
    return file;
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError("not a number: '" + text + "'");
    }
    if (used != text.size()) throw UsageError("not a number: '" + text + "'");
    return v;
}

BigUint random_message(std::uint64_t seed, std::uint64_t bits) {
    std::mt19937_64 rng(seed);
    BigUint m = 0;
    for (std::uint64_t filled = 0; filled < bits; filled += 64) m = (m << 64) | rng();
    const std::uint64_t spare = (bits + 63) / 64 * 64 - bits;
    return m >> static_cast<unsigned>(spare);
}

struct CapacityArgs {
    std::optional<double> eps;
    std::string sweep;
    std::string format = "csv";
    std::string output;
};

struct ValueIterArgs {
    double eps = 0.5;
    std::size_t grid = 5000;
    std::size_t iterations = 20;
    std::string csv;
};

struct DpSimArgs {
    double eps = 0.5;
    std::size_t steps = 1000000;
    std::uint64_t seed = 0;
    std::string csv;
};

struct TransmitArgs {
    double eps = 0.5;
    std::uint64_t bits = 20000;
    unsigned lambda = 20;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    std::optional<std::uint64_t> max_uses;
    std::string transcript;
};

int cmd_capacity(const CapacityArgs& a, std::ostream& out) {
    if (a.eps.has_value() == !a.sweep.empty()) throw UsageError("capacity needs exactly one of --eps or --sweep");
    const std::vector<double> points = a.eps ? std::vector<double>{*a.eps} : parse_sweep(a.sweep);
    std::vector<io::CapacityRow> rows;
    rows.reserve(points.size());
    for (double e : points) rows.push_back(io::capacity_row(checked_eps(e)));

    std::ofstream file;
    std::ostream* sink = &out;
    if (!a.output.empty()) {
        file = open_output(a.output);
        sink = &file;
    }
    if (a.format == "csv") {
        io::write_capacity_csv(*sink, rows);
    } else {
        json doc{{"schema_version", io::kSchemaVersion}, {"rows", json::array()}};
        for (const auto& r : rows) {
            doc["rows"].push_back({{"epsilon", r.epsilon},
                                   {"p_star", r.p_star},
                                   {"capacity", r.capacity},
                                   {"capacity_alt", r.capacity_alt},
                                   {"noncausal_max", r.noncausal_max}});
        }
        *sink << doc.dump() << '\n';
    }
    return kOk;
}

int cmd_value_iter(const ValueIterArgs& a, std::ostream& out) {
    const auto eps = checked_eps(a.eps);
    if (a.grid < 2) throw UsageError("--grid must be at least 2");
    if (a.iterations < 1) throw UsageError("--iters must be at least 1");
    const auto result = value_iteration(eps, a.grid, a.iterations);
    if (!a.csv.empty()) {
        auto file = open_output(a.csv);
        io::write_value_function_csv(file, result.h);
    }
    const json summary{{"schema_version", io::kSchemaVersion},
                       {"epsilon", eps.value()},
                       {"grid_size", a.grid},
                       {"iterations", a.iterations},
                       {"rho_estimate", result.rho_estimate},
                       {"increment_min", result.increment_min},
                       {"increment_max", result.increment_max},
                       {"capacity", feedback_capacity(eps).capacity_bits}};
    out << summary.dump() << '\n';
    return kOk;
}

int cmd_dp_sim(const DpSimArgs& a, std::ostream& out) {
    const auto eps = checked_eps(a.eps);
    if (a.steps < 1) throw UsageError("--steps must be at least 1");
    const auto sim = simulate_dp(eps, a.steps, a.seed);
    if (!a.csv.empty()) {
        auto file = open_output(a.csv);
        io::write_histogram_csv(file, sim.histogram);
    }
    json support = json::array();
    for (const auto& [state, count] : sim.histogram) support.push_back(state);
    const json summary{{"schema_version", io::kSchemaVersion},
                       {"epsilon", eps.value()},
                       {"steps", a.steps},
                       {"seed", a.seed},
                       {"average_reward", sim.average_reward},
                       {"capacity", feedback_capacity(eps).capacity_bits},
                       {"burn_in", sim.burn_in},
                       {"support", support},
                       {"off_support_visits", sim.off_support_visits}};
    out << summary.dump() << '\n';
    return kOk;
}

int cmd_transmit(const TransmitArgs& a, std::ostream& out) {
    const auto eps = checked_eps(a.eps);
    if (a.bits < 1) throw UsageError("--bits must be at least 1");
    if (a.trials < 1) throw UsageError("--trials must be at least 1");
    if (a.lambda < min_lambda(eps)) {
        throw UsageError("--lambda " + std::to_string(a.lambda) + " is below the minimum " +
                         std::to_string(min_lambda(eps)) + " for this erasure probability");
    }
    const auto capacity = feedback_capacity(eps).capacity_bits;
    if (capacity <= 0.0 && !a.max_uses) throw UsageError("--max-uses is required when the capacity is 0");

    const BigUint total = BigUint(1) << a.bits;
    TransmitOptions options;
    options.max_uses = a.max_uses;

    std::size_t errors = 0;
    std::size_t exhausted = 0;
    std::uint64_t total_uses = 0;
    for (std::size_t trial = 0; trial < a.trials; ++trial) {
        const std::uint64_t trial_seed = mix_seed(a.seed, trial);
        const BigUint message = random_message(mix_seed(trial_seed, 1), a.bits);
        options.record_steps = trial == 0 && !a.transcript.empty();
        const auto r = transmit_message(eps, message, total, a.lambda, mix_seed(trial_seed, 2), options);
        const bool ok = r.decoded && *r.decoded == message;
        const bool ran_out = r.status == SessionStatus::Exhausted;
        if (ran_out) {
            ++exhausted;
        } else if (!ok) {
            ++errors;
        }
        total_uses += r.transcript.channel_uses;
        if (options.record_steps) {
            auto file = open_output(a.transcript);
            io::write_transcript_jsonl(file, r.transcript);
        }
        out << json{{"schema_version", io::kSchemaVersion},
                    {"trial", trial},
                    {"seed", trial_seed},
                    {"status", ran_out ? "exhausted" : "completed"},
                    {"decoded_ok", ok},
                    {"channel_uses", r.transcript.channel_uses},
                    {"rate", r.rate}}
                   .dump()
            << '\n';
    }
    const double rate = total_uses > 0 ? static_cast<double>(a.bits) * static_cast<double>(a.trials) /
                                             static_cast<double>(total_uses)
                                       : 0.0;
    json summary{{"schema_version", io::kSchemaVersion},
                 {"epsilon", eps.value()},
                 {"nR", a.bits},
                 {"lambda", a.lambda},
                 {"trials", a.trials},
                 {"channel_uses", total_uses},
                 {"rate", rate},
                 {"capacity", capacity},
                 {"ratio", capacity > 0.0 ? json(rate / capacity) : json(nullptr)},
                 {"errors", errors},
                 {"exhausted", exhausted}};
    out << summary.dump() << '\n';
    return exhausted > 0 ? kExhausted : kOk;
}

}  // namespace

std::vector<double> parse_sweep(const std::string& spec) {
    const auto first = spec.find(':');
    const auto second = first == std::string::npos ? std::string::npos : spec.find(':', first + 1);
    if (second == std::string::npos || spec.find(':', second + 1) != std::string::npos) {
        throw UsageError("sweep must look like start:end:step");
    }
    const double start = parse_double(spec.substr(0, first));
    const double end = parse_double(spec.substr(first + 1, second - first - 1));
    const double step = parse_double(spec.substr(second + 1));
    if (!(step > 0.0)) throw UsageError("sweep step must be positive");
    if (!(start >= 0.0 && end <= 1.0 && start <= end)) throw UsageError("sweep range must satisfy 0 <= start <= end <= 1");
    // Endpoints are inclusive within half a step.
    const auto intervals = static_cast<std::size_t>(std::floor((end - start) / step + 0.5));
    std::vector<double> points;
    points.reserve(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) points.push_back(std::min(1.0, start + static_cast<double>(i) * step));
    if (std::abs(points.back() - end) <= 0.5 * step) points.back() = end;
    return points;
}

std::uint64_t seed_from_env() {
    const char* raw = std::getenv("RLLFBC_SEED");
    if (raw == nullptr || *raw == '\0') return 0;
    const std::string text(raw);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        throw UsageError("RLLFBC_SEED is not an unsigned integer");
    }
    if (used != text.size()) throw UsageError("RLLFBC_SEED is not an unsigned integer");
    return v;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Feedback capacity and zero-error coding for the (1,inf)-RLL erasure channel", "rllfbc"};
    app.require_subcommand(1);

    std::uint64_t env_seed = 0;
    try {
        env_seed = seed_from_env();
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidArguments;
    }

    CapacityArgs cap;
    auto* cap_cmd = app.add_subcommand("capacity", "Capacity table for one erasure probability or a sweep");
    cap_cmd->add_option("--eps", cap.eps, "Erasure probability");
    cap_cmd->add_option("--sweep", cap.sweep, "Range start:end:step (inclusive)");
    cap_cmd->add_option("--format", cap.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cap_cmd->add_option("--output", cap.output, "Write the table to this file instead of stdout");

    ValueIterArgs vi;
    auto* vi_cmd = app.add_subcommand("value-iter", "Value iteration of the capacity DP");
    vi_cmd->add_option("--eps", vi.eps, "Erasure probability")->required();
    vi_cmd->add_option("--grid", vi.grid, "Grid points for state and action")->capture_default_str();
    vi_cmd->add_option("--iters", vi.iterations, "Number of operator applications")->capture_default_str();
    vi_cmd->add_option("--csv", vi.csv, "Write z,h,delta_star to this file");

    DpSimArgs ds;
    ds.seed = env_seed;
    auto* ds_cmd = app.add_subcommand("dp-sim", "Closed-loop simulation of the DP under the optimal policy");
    ds_cmd->add_option("--eps", ds.eps, "Erasure probability")->required();
    ds_cmd->add_option("--steps", ds.steps, "Number of steps")->capture_default_str();
    ds_cmd->add_option("--seed", ds.seed, "RNG seed (default: RLLFBC_SEED or 0)");
    ds_cmd->add_option("--csv", ds.csv, "Write state,count histogram to this file");

    TransmitArgs tx;
    tx.seed = env_seed;
    auto* tx_cmd = app.add_subcommand("transmit", "Send random messages with the zero-error feedback scheme");
    tx_cmd->add_option("--eps", tx.eps, "Erasure probability")->required();
    tx_cmd->add_option("--bits", tx.bits, "Message bits nR")->capture_default_str();
    tx_cmd->add_option("--lambda", tx.lambda, "Residual bits sent with the repetition code")->capture_default_str();
    tx_cmd->add_option("--seed", tx.seed, "RNG seed (default: RLLFBC_SEED or 0)");
    tx_cmd->add_option("--trials", tx.trials, "Independent sessions")->capture_default_str();
    tx_cmd->add_option("--max-uses", tx.max_uses, "Channel-use budget per session");
    tx_cmd->add_option("--transcript", tx.transcript, "Write the first session's steps as JSON lines");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalidArguments;
    }

    try {
        if (*cap_cmd) return cmd_capacity(cap, out);
        if (*vi_cmd) return cmd_value_iter(vi, out);
        if (*ds_cmd) return cmd_dp_sim(ds, out);
        if (*tx_cmd) return cmd_transmit(tx, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidArguments;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidArguments;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidArguments;
    }
    return kInvalidArguments;
}

}  // namespace rllfbc::cli
