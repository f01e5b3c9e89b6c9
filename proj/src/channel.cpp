#include "rllfbc/channel.hpp"

#include <stdexcept>

namespace rllfbc {

char to_char(Symbol s) noexcept {
    switch (s) {
        case Symbol::Zero: return '0';
        case Symbol::One: return '1';
        case Symbol::Erasure: return '?';
    }
    return '?';
}

Symbol symbol_from_bit(int bit) {
    if (bit == 0) return Symbol::Zero;
    if (bit == 1) return Symbol::One;
    throw std::invalid_argument("channel input must be 0 or 1");
}

ErasureChannel::ErasureChannel(const ChannelConfig& config) : eps_(config.epsilon), rng_(config.seed) {}

Symbol ErasureChannel::transmit(int bit) {
    const Symbol clean = symbol_from_bit(bit);
    return uniform01(rng_) < eps_.value() ? Symbol::Erasure : clean;
}

bool check_rll(std::span<const std::uint8_t> x) {
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i - 1] == 1 && x[i] == 1) return false;
    }
    return true;
}

std::vector<std::uint8_t> erasure_replace(std::span<const std::uint8_t> x, std::span<const std::uint8_t> theta) {
    if (x.size() != theta.size()) throw std::invalid_argument("erasure_replace: length mismatch");
    std::vector<std::uint8_t> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (theta[i]) out[i] = 0;
    }
    return out;
}

std::vector<Symbol> apply_erasures(std::span<const std::uint8_t> x, std::span<const std::uint8_t> theta) {
    if (x.size() != theta.size()) throw std::invalid_argument("apply_erasures: length mismatch");
    std::vector<Symbol> y;
    y.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y.push_back(theta[i] ? Symbol::Erasure : symbol_from_bit(x[i]));
    }
    return y;
}

}  // namespace rllfbc
