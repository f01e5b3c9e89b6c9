// Zero-error feedback coding scheme for the (1,inf)-RLL erasure channel.
//
// Messages are ranks 0..|M|-1 of the still-possible set. At the ground state
// the top floor(p|M|) ranks carry label '1' (labelling L1). Each erasure swaps
// to the other labelling: L2 puts the '1' block immediately below the L1
// block, so a rank labelled '1' in one labelling is '0' in the other and the
// input never carries two consecutive ones. A non-erased output keeps the
// ranks carrying the received label and renumbers them from 0. A received '1'
// is followed by one forced '0' that the decoder ignores.
//
// Once at most 2^lambda messages remain, the residual rank is sent bit by bit
// with a repetition code: the pair (bit, 0) is repeated until its first slot
// arrives unerased.
#pragma once

#include "rllfbc/capacity.hpp"
#include "rllfbc/channel.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rllfbc {

using BigUint = boost::multiprecision::cpp_int;

/// log2 of a positive integer, accurate to double precision for any size.
double log2_big(const BigUint& value);

/// Exact floor(p * n); p is taken as the exact binary value of the double.
BigUint floor_mul(double p, const BigUint& n);

/// Contiguous run of original message indices [first, first + count).
struct Fragment {
    BigUint first;
    BigUint count;

    friend bool operator==(const Fragment&, const Fragment&) = default;
};

/// Half-open range of ranks [begin, end).
struct RankRange {
    BigUint begin;
    BigUint end;
};

/// Ordered set of still-possible messages. Rank r is the r-th smallest member;
/// this rank order is the bijection onto the points r / size of [0, 1).
class MessageSet {
public:
    /// {0, 1, ..., total - 1}; total must be >= 1.
    static MessageSet all(const BigUint& total);

    /// Fragments must be non-empty, ascending and disjoint. Adjacent ones are
    /// merged so that equal sets compare equal.
    explicit MessageSet(std::vector<Fragment> fragments);

    const BigUint& size() const noexcept { return size_; }
    const std::vector<Fragment>& fragments() const noexcept { return fragments_; }

    std::optional<BigUint> rank_of(const BigUint& message) const;
    BigUint member_at(const BigUint& rank) const;
    /// Every member in rank order. Intended for small sets; throws above 2^20.
    std::vector<BigUint> members() const;

    /// Members whose ranks fall in the given ascending, disjoint ranges.
    MessageSet select_ranks(std::span<const RankRange> ranges) const;

    friend bool operator==(const MessageSet&, const MessageSet&) = default;

private:
    std::vector<Fragment> fragments_;
    BigUint size_;
};

enum class LabellingVariant : std::uint8_t { L1, L2 };

/// Partition of ranks into a contiguous '1' block and '0' elsewhere.
struct Labelling {
    BigUint size;
    BigUint ones_count;
    BigUint ones_begin;
    LabellingVariant variant = LabellingVariant::L1;

    BigUint ones_end() const { return ones_begin + ones_count; }
    int label(const BigUint& rank) const { return rank >= ones_begin && rank < ones_end() ? 1 : 0; }

    friend bool operator==(const Labelling&, const Labelling&) = default;
};

/// ones_count = floor(p * size). L1 labels the top ones_count ranks; L2 the
/// ones_count ranks just below them. Throws std::invalid_argument for size 0
/// or when L2 does not fit (size < 2 * ones_count).
Labelling build_labelling(double p, const BigUint& size, LabellingVariant variant);

/// Members whose rank carries `received`, renumbered from 0 in the original
/// order. Throws std::invalid_argument if that label class is empty.
MessageSet filter_and_expand(const MessageSet& set, const Labelling& labelling, int received);

enum class Phase : std::uint8_t { GroundFresh, ErasureAlternating, ForcedZero };

const char* phase_name(Phase phase) noexcept;

/// Everything both ends of the link know after y^{t-1}.
struct SessionState {
    MessageSet message_set;
    Labelling labelling;
    Phase phase = Phase::GroundFresh;
    double p_star = 0.0;
    double epsilon = 0.0;

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

/// Ground state over all `total_messages` messages with p = p_eps (the
/// limiting value at eps = 1).
SessionState initial_state(ErasureProb eps, const BigUint& total_messages);

/// Channel input for `message`: '0' in ForcedZero, otherwise its label.
/// Throws std::invalid_argument if the message is not in the current set.
int encode_step(const SessionState& state, const BigUint& message);

/// Result of feeding one channel output to a session.
struct AdvanceEvent {
    bool successful = false;    ///< message set shrank
    bool procedure_end = false; ///< returned to the ground state
};

/// State transition on output y (identical at encoder and decoder).
AdvanceEvent advance_in_place(SessionState& state, Symbol y);

SessionState advance(const SessionState& state, Symbol y);

/// Smallest lambda with p_eps * 2^lambda >= 1, so every labelling in the
/// main phase has at least one '1'.
unsigned min_lambda(ErasureProb eps);

/// Position inside the repetition-coded fallback; shared by both ends.
struct FallbackProgress {
    std::size_t bit_count = 0;
    std::size_t bits_done = 0;
    bool second_slot = false;
    Symbol first_slot = Symbol::Erasure;

    bool done() const noexcept { return bits_done == bit_count; }
    /// Returns the resolved bit, if this output completed a pair that resolves one.
    std::optional<int> receive(Symbol y);

    friend bool operator==(const FallbackProgress&, const FallbackProgress&) = default;
};

class FallbackEncoder {
public:
    explicit FallbackEncoder(std::vector<std::uint8_t> bits);

    int next_input() const;
    void feedback(Symbol y) { progress_.receive(y); }
    const FallbackProgress& progress() const noexcept { return progress_; }

private:
    std::vector<std::uint8_t> bits_;
    FallbackProgress progress_;
};

class FallbackDecoder {
public:
    explicit FallbackDecoder(std::size_t bit_count);

    void receive(Symbol y);
    bool finished() const noexcept { return progress_.done(); }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
    const FallbackProgress& progress() const noexcept { return progress_; }

private:
    std::vector<std::uint8_t> bits_;
    FallbackProgress progress_;
};

struct FallbackRun {
    std::size_t channel_uses = 0;
    std::vector<std::uint8_t> decoded;
    ChannelLog log;
};

/// Sends `bits` with the repetition code over `channel`.
FallbackRun fallback_transmit(std::span<const std::uint8_t> bits, ErasureChannel& channel);

/// Number of bits the fallback spends on a residual set of `size` messages.
std::size_t fallback_bit_count(const BigUint& size);

struct SchemeParams {
    ErasureProb epsilon{0.0};
    BigUint total_messages = 1;
    unsigned lambda = 1;
};

/// Encoder of the two-phase scheme. Throws std::invalid_argument if lambda is
/// below min_lambda or the message is out of range.
class SchemeEncoder {
public:
    SchemeEncoder(const SchemeParams& params, BigUint message);

    int next_input() const;
    void feedback(Symbol y);

    const SessionState& state() const noexcept { return state_; }
    bool in_fallback() const noexcept { return fallback_.has_value(); }
    const FallbackProgress* fallback_progress() const noexcept {
        return fallback_ ? &fallback_->progress() : nullptr;
    }

private:
    void maybe_enter_fallback();

    BigUint threshold_;
    BigUint message_;
    BigUint rank_;
    SessionState state_;
    std::optional<FallbackEncoder> fallback_;
};

struct SchemeStats {
    std::vector<std::uint32_t> procedure_lengths;
    /// log2(size_before / size_after) for every successful main-phase transmission.
    std::vector<double> shrink_bits;
    std::size_t main_phase_uses = 0;
    std::size_t fallback_uses = 0;
    std::size_t fallback_bits = 0;
};

class SchemeDecoder {
public:
    explicit SchemeDecoder(const SchemeParams& params);

    void receive(Symbol y);
    bool finished() const noexcept;

    const SessionState& state() const noexcept { return state_; }
    bool in_fallback() const noexcept { return fallback_.has_value(); }
    const FallbackProgress* fallback_progress() const noexcept {
        return fallback_ ? &fallback_->progress() : nullptr;
    }
    /// The decoded original message index, once finished.
    std::optional<BigUint> decoded() const;
    const SchemeStats& stats() const noexcept { return stats_; }

private:
    void maybe_enter_fallback();

    BigUint threshold_;
    SessionState state_;
    std::optional<FallbackDecoder> fallback_;
    SchemeStats stats_;
    std::uint32_t procedure_uses_ = 0;
};

/// Field-by-field equality of the public state at both ends.
bool synchronized(const SchemeEncoder& encoder, const SchemeDecoder& decoder);

struct StepRecord {
    std::size_t t = 0;
    int x = 0;
    Symbol y = Symbol::Erasure;
    bool theta = false;
    std::string phase;
    std::string set_size;
};

struct Transcript {
    ChannelLog channel;
    std::size_t channel_uses = 0;
    double delivered_bits = 0.0;
    SchemeStats stats;
    /// Per-step records; filled only when requested.
    std::vector<StepRecord> steps;
};

struct TransmitOptions {
    /// Defaults to 50x the expected session length; required at eps = 1.
    std::optional<std::uint64_t> max_uses;
    bool record_steps = false;
    bool check_synchrony = false;
};

struct TransmitResult {
    SessionStatus status = SessionStatus::Completed;
    std::optional<BigUint> decoded;
    /// Decoder's set when the session stopped; always contains the message.
    MessageSet final_set = MessageSet::all(1);
    Transcript transcript;
    std::uint64_t synchrony_violations = 0;
    bool rll_valid = true;
    /// log2(total_messages) / channel_uses.
    double rate = 0.0;
};

std::uint64_t default_max_uses(ErasureProb eps, const BigUint& total_messages, unsigned lambda);

TransmitResult transmit_message(ErasureProb eps, const BigUint& message, const BigUint& total_messages,
                                unsigned lambda, std::uint64_t seed, const TransmitOptions& options = {});

/// 1/(1-eps) + p_eps: mean channel uses from one ground state to the next.
double expected_procedure_length(ErasureProb eps);

/// Lower bound on the rate of the two-phase scheme for nR message bits.
double rate_lower_bound(double n, double rate_bits, unsigned lambda, ErasureProb eps);

}  // namespace rllfbc
