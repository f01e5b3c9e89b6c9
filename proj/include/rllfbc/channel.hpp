// Seeded binary erasure channel, input-constraint checks and the generic
// feedback session harness.
#pragma once

#include "rllfbc/capacity.hpp"

#include <concepts>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rllfbc {

/// Channel output alphabet {0, ?, 1}. Also the disturbance of the DP.
enum class Symbol : std::uint8_t { Zero, Erasure, One };

char to_char(Symbol s) noexcept;
Symbol symbol_from_bit(int bit);

/// Uniform double in [0,1) from the top 53 bits of one mt19937_64 draw.
/// Avoids std distributions so runs replay bit-exactly across standard
/// libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ChannelConfig {
    ErasureProb epsilon{0.0};
    std::uint64_t seed = 0;
};

/// Memoryless erasure channel: every use consumes exactly one rng draw.
class ErasureChannel {
public:
    explicit ErasureChannel(const ChannelConfig& config);
    ErasureChannel(ErasureProb eps, std::uint64_t seed) : ErasureChannel(ChannelConfig{eps, seed}) {}

    Symbol transmit(int bit);
    ErasureProb epsilon() const noexcept { return eps_; }

private:
    ErasureProb eps_;
    std::mt19937_64 rng_;
};

/// True iff no two adjacent entries are both 1.
bool check_rll(std::span<const std::uint8_t> x);

/// Copy of x with x[i] forced to 0 wherever theta[i] = 1.
std::vector<std::uint8_t> erasure_replace(std::span<const std::uint8_t> x, std::span<const std::uint8_t> theta);

/// Output of the channel for a fixed erasure pattern.
std::vector<Symbol> apply_erasures(std::span<const std::uint8_t> x, std::span<const std::uint8_t> theta);

template <class C>
concept ChannelLike = requires(C c, int bit) {
    { c.transmit(bit) } -> std::same_as<Symbol>;
};

/// Encoder side of a feedback session: emits x_t, then learns y_t.
template <class E>
concept FeedbackEncoder = requires(E e, Symbol y) {
    { e.next_input() } -> std::convertible_to<int>;
    e.feedback(y);
};

template <class D>
concept FeedbackDecoder = requires(D d, const D& cd, Symbol y) {
    d.receive(y);
    { cd.finished() } -> std::convertible_to<bool>;
};

struct ChannelLog {
    std::vector<std::uint8_t> inputs;
    std::vector<Symbol> outputs;
    std::vector<std::uint8_t> erasures;

    std::size_t uses() const noexcept { return inputs.size(); }
};

enum class SessionStatus { Completed, Exhausted };

struct NoStepHook {
    void operator()(std::size_t, int, Symbol) const noexcept {}
};

/// Runs encoder and decoder over the channel until the decoder finishes or
/// max_uses is reached. Unit-delay feedback: the encoder sees y_t only after
/// x_t has been emitted. `hook(t, x, y)` is invoked after both parties have
/// processed step t.
template <FeedbackEncoder Enc, FeedbackDecoder Dec, ChannelLike Chan, class Hook = NoStepHook>
SessionStatus run_session(Enc& encoder, Dec& decoder, Chan& channel, std::uint64_t max_uses, ChannelLog& log,
                          Hook&& hook = {}) {
    std::size_t t = 0;
    while (!decoder.finished()) {
        if (t >= max_uses) return SessionStatus::Exhausted;
        const int x = static_cast<int>(encoder.next_input());
        const Symbol y = channel.transmit(x);
        log.inputs.push_back(static_cast<std::uint8_t>(x));
        log.outputs.push_back(y);
        log.erasures.push_back(y == Symbol::Erasure ? 1 : 0);
        decoder.receive(y);
        encoder.feedback(y);
        hook(t, x, y);
        ++t;
    }
    return SessionStatus::Completed;
}

}  // namespace rllfbc
