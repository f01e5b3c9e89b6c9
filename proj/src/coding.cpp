#include "rllfbc/coding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rllfbc {

namespace mp = boost::multiprecision;

double log2_big(const BigUint& value) {
    if (value <= 0) throw std::domain_error("log2_big needs a positive argument");
    const auto top = mp::msb(value);
    if (top < 53) return std::log2(value.convert_to<double>());
    const auto shift = top - 52;
    const auto head = static_cast<std::uint64_t>(value >> shift);
    return std::log2(static_cast<double>(head)) + static_cast<double>(shift);
}

BigUint floor_mul(double p, const BigUint& n) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("floor_mul expects p in [0,1]");
    if (p == 0.0 || n == 0) return 0;
    int exponent = 0;
    const double fraction = std::frexp(p, &exponent);  // p = fraction * 2^exponent
    const auto mantissa = static_cast<std::uint64_t>(std::ldexp(fraction, 53));
    const BigUint product = n * mantissa;
    return product >> static_cast<unsigned>(53 - exponent);
}

// ---------------------------------------------------------------------------
// MessageSet

MessageSet MessageSet::all(const BigUint& total) {
    if (total < 1) throw std::invalid_argument("message set must contain at least one message");
    return MessageSet({Fragment{0, total}});
}

MessageSet::MessageSet(std::vector<Fragment> fragments) {
    if (fragments.empty()) throw std::invalid_argument("message set must contain at least one message");
    for (auto& f : fragments) {
        if (f.count <= 0) throw std::invalid_argument("message fragment must be non-empty");
        if (f.first < 0) throw std::invalid_argument("message indices are non-negative");
        if (!fragments_.empty()) {
            auto& last = fragments_.back();
            const BigUint last_end = last.first + last.count;
            if (f.first < last_end) throw std::invalid_argument("message fragments must be ascending and disjoint");
            if (f.first == last_end) {
                last.count += f.count;
                size_ += f.count;
                continue;
            }
        }
        size_ += f.count;
        fragments_.push_back(std::move(f));
    }
}

std::optional<BigUint> MessageSet::rank_of(const BigUint& message) const {
    BigUint offset = 0;
    for (const auto& f : fragments_) {
        if (message < f.first) return std::nullopt;
        if (message < f.first + f.count) return offset + (message - f.first);
        offset += f.count;
    }
    return std::nullopt;
}

BigUint MessageSet::member_at(const BigUint& rank) const {
    if (rank < 0 || rank >= size_) throw std::out_of_range("rank outside the message set");
    BigUint remaining = rank;
    for (const auto& f : fragments_) {
        if (remaining < f.count) return f.first + remaining;
        remaining -= f.count;
    }
    throw std::logic_error("message set size out of sync with fragments");
}

std::vector<BigUint> MessageSet::members() const {
    if (size_ > (BigUint(1) << 20)) throw std::length_error("message set too large to enumerate");
    std::vector<BigUint> out;
    for (const auto& f : fragments_) {
        for (BigUint i = 0; i < f.count; ++i) out.push_back(f.first + i);
    }
    return out;
}

MessageSet MessageSet::select_ranks(std::span<const RankRange> ranges) const {
    std::vector<Fragment> out;
    std::size_t i = 0;
    BigUint start = 0;  // rank of fragments_[i].first
    for (const auto& range : ranges) {
        if (range.begin >= range.end) continue;
        while (i < fragments_.size() && start + fragments_[i].count <= range.begin) {
            start += fragments_[i].count;
            ++i;
        }
        BigUint frag_start = start;
        for (std::size_t j = i; j < fragments_.size() && frag_start < range.end; ++j) {
            const auto& f = fragments_[j];
            const BigUint frag_end = frag_start + f.count;
            const BigUint lo = mp::max(range.begin, frag_start);
            const BigUint hi = mp::min(range.end, frag_end);
            if (lo < hi) out.push_back(Fragment{f.first + (lo - frag_start), hi - lo});
            frag_start = frag_end;
        }
    }
    return MessageSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Labellings and filtering

Labelling build_labelling(double p, const BigUint& size, LabellingVariant variant) {
    if (size < 1) throw std::invalid_argument("labelling needs a non-empty message set");
    Labelling lab;
    lab.size = size;
    lab.ones_count = floor_mul(p, size);
    lab.variant = variant;
    if (variant == LabellingVariant::L1) {
        lab.ones_begin = size - lab.ones_count;
    } else {
        const BigUint twice = 2 * lab.ones_count;
        if (size < twice) throw std::invalid_argument("labelling L2 needs size >= 2 * floor(p * size)");
        lab.ones_begin = size - twice;
    }
    return lab;
}

MessageSet filter_and_expand(const MessageSet& set, const Labelling& labelling, int received) {
    if (labelling.size != set.size()) throw std::invalid_argument("labelling does not match the message set");
    if (received == 1) {
        if (labelling.ones_count == 0) throw std::invalid_argument("no message carries label '1'");
        const RankRange ones{labelling.ones_begin, labelling.ones_end()};
        return set.select_ranks(std::span(&ones, 1));
    }
    if (received != 0) throw std::invalid_argument("received bit must be 0 or 1");
    if (labelling.ones_count == set.size()) throw std::invalid_argument("no message carries label '0'");
    const RankRange zeros[2] = {{0, labelling.ones_begin}, {labelling.ones_end(), set.size()}};
    return set.select_ranks(zeros);
}

const char* phase_name(Phase phase) noexcept {
    switch (phase) {
        case Phase::GroundFresh: return "GroundFresh";
        case Phase::ErasureAlternating: return "ErasureAlternating";
        case Phase::ForcedZero: return "ForcedZero";
    }
    return "?";
}

SessionState initial_state(ErasureProb eps, const BigUint& total_messages) {
    const double p = feedback_capacity(eps).p_star;
    auto set = MessageSet::all(total_messages);
    auto lab = build_labelling(p, set.size(), LabellingVariant::L1);
    return SessionState{std::move(set), std::move(lab), Phase::GroundFresh, p, eps.value()};
}

int encode_step(const SessionState& state, const BigUint& message) {
    const auto rank = state.message_set.rank_of(message);
    if (!rank) throw std::invalid_argument("message is not in the current message set");
    if (state.phase == Phase::ForcedZero) return 0;
    return state.labelling.label(*rank);
}

AdvanceEvent advance_in_place(SessionState& state, Symbol y) {
    if (state.phase == Phase::ForcedZero) {
        // The forced '0' carries no information, erased or not.
        state.phase = Phase::GroundFresh;
        state.labelling = build_labelling(state.p_star, state.message_set.size(), LabellingVariant::L1);
        return {false, true};
    }
    if (y == Symbol::Erasure) {
        const auto other =
            state.labelling.variant == LabellingVariant::L1 ? LabellingVariant::L2 : LabellingVariant::L1;
        state.labelling = build_labelling(state.p_star, state.message_set.size(), other);
        state.phase = Phase::ErasureAlternating;
        return {false, false};
    }
    const int received = y == Symbol::One ? 1 : 0;
    const BigUint before = state.message_set.size();
    state.message_set = filter_and_expand(state.message_set, state.labelling, received);
    state.labelling = build_labelling(state.p_star, state.message_set.size(), LabellingVariant::L1);
    state.phase = received == 1 ? Phase::ForcedZero : Phase::GroundFresh;
    return {state.message_set.size() < before, received == 0};
}

SessionState advance(const SessionState& state, Symbol y) {
    SessionState next = state;
    advance_in_place(next, y);
    return next;
}

unsigned min_lambda(ErasureProb eps) {
    const double p = feedback_capacity(eps).p_star;
    auto lambda = static_cast<unsigned>(std::max(0.0, std::ceil(-std::log2(p))));
    while (std::ldexp(p, static_cast<int>(lambda)) < 1.0) ++lambda;
    return std::max(lambda, 1u);
}

// ---------------------------------------------------------------------------
// Repetition-coded fallback

std::optional<int> FallbackProgress::receive(Symbol y) {
    if (done()) throw std::logic_error("fallback already finished");
    if (!second_slot) {
        first_slot = y;
        second_slot = true;
        return std::nullopt;
    }
    second_slot = false;
    if (first_slot == Symbol::Erasure) return std::nullopt;
    ++bits_done;
    return first_slot == Symbol::One ? 1 : 0;
}

FallbackEncoder::FallbackEncoder(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
        if (b > 1) throw std::invalid_argument("fallback bits must be 0 or 1");
    }
    progress_.bit_count = bits_.size();
}

int FallbackEncoder::next_input() const {
    if (progress_.done()) throw std::logic_error("fallback encoder has nothing left to send");
    return progress_.second_slot ? 0 : bits_[progress_.bits_done];
}

FallbackDecoder::FallbackDecoder(std::size_t bit_count) { progress_.bit_count = bit_count; }

void FallbackDecoder::receive(Symbol y) {
    if (const auto bit = progress_.receive(y)) bits_.push_back(static_cast<std::uint8_t>(*bit));
}

FallbackRun fallback_transmit(std::span<const std::uint8_t> bits, ErasureChannel& channel) {
    if (!bits.empty() && channel.epsilon().is_total()) {
        throw std::invalid_argument("fallback cannot deliver anything over a channel that erases everything");
    }
    FallbackEncoder encoder(std::vector<std::uint8_t>(bits.begin(), bits.end()));
    FallbackDecoder decoder(bits.size());
    FallbackRun run;
    run_session(encoder, decoder, channel, std::numeric_limits<std::uint64_t>::max(), run.log);
    run.channel_uses = run.log.uses();
    run.decoded = decoder.bits();
    return run;
}

std::size_t fallback_bit_count(const BigUint& size) {
    if (size < 1) throw std::invalid_argument("fallback needs a non-empty set");
    if (size == 1) return 0;
    return static_cast<std::size_t>(mp::msb(BigUint(size - 1))) + 1;
}

namespace {

std::vector<std::uint8_t> rank_bits(const BigUint& rank, std::size_t count) {
    std::vector<std::uint8_t> bits(count);
    for (std::size_t i = 0; i < count; ++i) {
        bits[i] = mp::bit_test(rank, static_cast<unsigned>(count - 1 - i)) ? 1 : 0;
    }
    return bits;
}

BigUint lambda_threshold(const SchemeParams& params) {
    if (params.lambda < min_lambda(params.epsilon)) {
        throw std::invalid_argument("lambda must be at least " + std::to_string(min_lambda(params.epsilon)));
    }
    if (params.total_messages < 1) throw std::invalid_argument("need at least one message");
    return BigUint(1) << params.lambda;
}

void collapse_to(SessionState& state, const BigUint& message) {
    state.message_set = MessageSet({Fragment{message, 1}});
    state.labelling = build_labelling(state.p_star, 1, LabellingVariant::L1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Two-phase scheme

SchemeEncoder::SchemeEncoder(const SchemeParams& params, BigUint message)
    : threshold_(lambda_threshold(params)),
      message_(std::move(message)),
      rank_(message_),
      state_(initial_state(params.epsilon, params.total_messages)) {
    if (message_ < 0 || message_ >= params.total_messages) throw std::invalid_argument("message index out of range");
    maybe_enter_fallback();
}

void SchemeEncoder::maybe_enter_fallback() {
    if (fallback_ || state_.phase != Phase::GroundFresh || state_.message_set.size() > threshold_) return;
    fallback_.emplace(rank_bits(rank_, fallback_bit_count(state_.message_set.size())));
}

int SchemeEncoder::next_input() const {
    if (fallback_) return fallback_->next_input();
    if (state_.phase == Phase::ForcedZero) return 0;
    return state_.labelling.label(rank_);
}

void SchemeEncoder::feedback(Symbol y) {
    if (fallback_) {
        fallback_->feedback(y);
        if (fallback_->progress().done()) collapse_to(state_, message_);
        return;
    }
    const bool filters = state_.phase != Phase::ForcedZero && y != Symbol::Erasure;
    advance_in_place(state_, y);
    if (filters) rank_ = *state_.message_set.rank_of(message_);
    maybe_enter_fallback();
}

SchemeDecoder::SchemeDecoder(const SchemeParams& params)
    : threshold_(lambda_threshold(params)), state_(initial_state(params.epsilon, params.total_messages)) {
    maybe_enter_fallback();
}

void SchemeDecoder::maybe_enter_fallback() {
    if (fallback_ || state_.phase != Phase::GroundFresh || state_.message_set.size() > threshold_) return;
    fallback_.emplace(fallback_bit_count(state_.message_set.size()));
    stats_.fallback_bits = fallback_->progress().bit_count;
    if (fallback_->finished()) collapse_to(state_, state_.message_set.member_at(0));
}

void SchemeDecoder::receive(Symbol y) {
    if (finished()) throw std::logic_error("decoder already finished");
    if (fallback_) {
        ++stats_.fallback_uses;
        fallback_->receive(y);
        if (fallback_->finished()) {
            BigUint rank = 0;
            for (auto b : fallback_->bits()) rank = (rank << 1) | b;
            collapse_to(state_, state_.message_set.member_at(rank));
        }
        return;
    }
    ++stats_.main_phase_uses;
    ++procedure_uses_;
    const bool filters = state_.phase != Phase::ForcedZero && y != Symbol::Erasure;
    const double bits_before = filters ? log2_big(state_.message_set.size()) : 0.0;
    const auto event = advance_in_place(state_, y);
    if (event.successful) stats_.shrink_bits.push_back(bits_before - log2_big(state_.message_set.size()));
    if (event.procedure_end) {
        stats_.procedure_lengths.push_back(procedure_uses_);
        procedure_uses_ = 0;
    }
    maybe_enter_fallback();
}

bool SchemeDecoder::finished() const noexcept { return fallback_ && fallback_->finished(); }

std::optional<BigUint> SchemeDecoder::decoded() const {
    if (!finished()) return std::nullopt;
    return state_.message_set.member_at(0);
}

bool synchronized(const SchemeEncoder& encoder, const SchemeDecoder& decoder) {
    if (!(encoder.state() == decoder.state())) return false;
    const auto* a = encoder.fallback_progress();
    const auto* b = decoder.fallback_progress();
    if ((a == nullptr) != (b == nullptr)) return false;
    return a == nullptr || *a == *b;
}

std::uint64_t default_max_uses(ErasureProb eps, const BigUint& total_messages, unsigned lambda) {
    const double capacity = feedback_capacity(eps).capacity_bits;
    if (capacity <= 0.0) throw std::invalid_argument("an explicit max_uses is required when the capacity is 0");
    const double bits = total_messages > 1 ? log2_big(total_messages) : 0.0;
    const double expected = bits / capacity + 2.0 * lambda * eps.inverse_complement() + 2.0;
    return static_cast<std::uint64_t>(std::ceil(50.0 * expected));
}

TransmitResult transmit_message(ErasureProb eps, const BigUint& message, const BigUint& total_messages,
                                unsigned lambda, std::uint64_t seed, const TransmitOptions& options) {
    const SchemeParams params{eps, total_messages, lambda};
    SchemeEncoder encoder(params, message);
    SchemeDecoder decoder(params);
    ErasureChannel channel(eps, seed);
    const std::uint64_t max_uses = options.max_uses ? *options.max_uses : default_max_uses(eps, total_messages, lambda);

    TransmitResult result;
    if (options.check_synchrony && !synchronized(encoder, decoder)) ++result.synchrony_violations;

    auto describe_phase = [&] { return decoder.in_fallback() ? std::string("Fallback") : phase_name(decoder.state().phase); };
    BigUint recorded_size = decoder.state().message_set.size();
    std::string recorded_size_text = recorded_size.str();
    std::string phase_before = describe_phase();

    auto hook = [&](std::size_t t, int x, Symbol y) {
        if (options.check_synchrony && !synchronized(encoder, decoder)) ++result.synchrony_violations;
        if (!options.record_steps) return;
        result.transcript.steps.push_back(
            StepRecord{t, x, y, y == Symbol::Erasure, phase_before, recorded_size_text});
        phase_before = describe_phase();
        if (decoder.state().message_set.size() != recorded_size) {
            recorded_size = decoder.state().message_set.size();
            recorded_size_text = recorded_size.str();
        }
    };
    result.status = run_session(encoder, decoder, channel, max_uses, result.transcript.channel, hook);

    auto& tr = result.transcript;
    tr.channel_uses = tr.channel.uses();
    tr.stats = decoder.stats();
    result.final_set = decoder.state().message_set;
    result.decoded = decoder.decoded();
    tr.delivered_bits = log2_big(total_messages) - log2_big(result.final_set.size());
    result.rll_valid = check_rll(tr.channel.inputs);
    result.rate = tr.channel_uses > 0 ? log2_big(total_messages) / static_cast<double>(tr.channel_uses) : 0.0;
    return result;
}

double expected_procedure_length(ErasureProb eps) {
    if (eps.is_total()) throw std::domain_error("expected procedure length is infinite at eps = 1");
    return eps.inverse_complement() + optimal_p(eps);
}

double rate_lower_bound(double n, double rate_bits, unsigned lambda, ErasureProb eps) {
    const double nr = n * rate_bits;
    if (lambda < 1 || !(nr > lambda)) throw std::invalid_argument("rate bound needs nR > lambda >= 1");
    if (eps.is_total()) return 0.0;
    const double p = optimal_p(eps);
    const double shifted = std::max(0.0, p - std::ldexp(1.0, -static_cast<int>(lambda)));
    const double main = binary_entropy(shifted) / (eps.inverse_complement() + p);
    return (nr - lambda) / nr * main + lambda / nr * eps.complement() / 2.0;
}

}  // namespace rllfbc
