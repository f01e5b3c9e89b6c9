#include "doctest.h"

#include "rllfbc/coding.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

using namespace rllfbc;

namespace {

std::vector<BigUint> as_big(std::initializer_list<int> values) {
    std::vector<BigUint> out;
    for (int v : values) out.emplace_back(v);
    return out;
}

std::vector<BigUint> range_big(int lo, int hi) {
    std::vector<BigUint> out;
    for (int v = lo; v < hi; ++v) out.emplace_back(v);
    return out;
}

std::vector<int> labels(const Labelling& lab) {
    std::vector<int> out;
    for (BigUint r = 0; r < lab.size; ++r) out.push_back(lab.label(r));
    return out;
}

// Channel whose erasures follow a fixed pattern.
struct PatternChannel {
    std::vector<std::uint8_t> theta;
    std::size_t t = 0;
    Symbol transmit(int x) {
        const bool erased = t < theta.size() ? theta[t] != 0 : false;
        ++t;
        return erased ? Symbol::Erasure : symbol_from_bit(x);
    }
};

}  // namespace

TEST_CASE("log2_big and floor_mul") {
    CHECK(log2_big(1) == 0.0);
    CHECK(log2_big(1024) == 10.0);
    CHECK(log2_big(BigUint(1) << 20000) == 20000.0);
    CHECK(log2_big((BigUint(3) << 500)) == doctest::Approx(500 + std::log2(3.0)).epsilon(1e-15));
    CHECK_THROWS_AS(log2_big(0), std::domain_error);

    CHECK(floor_mul(0.4, 10) == 4);
    CHECK(floor_mul(0.0, 10) == 0);
    CHECK(floor_mul(1.0, 12345) == 12345);
    CHECK(floor_mul(0.5, BigUint(1) << 300) == (BigUint(1) << 299));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    for (int i = 0; i < 20000; ++i) {
        const double p = u(rng);
        const std::uint64_t n = 1 + rng() % 100000;
        const BigUint k = floor_mul(p, n);
        // exact rational check: k <= p n < k + 1, with p n formed in long double (64-bit mantissa)
        const long double pn = static_cast<long double>(p) * static_cast<long double>(n);
        CHECK(static_cast<long double>(k.convert_to<std::uint64_t>()) <= pn);
        CHECK(pn < static_cast<long double>(k.convert_to<std::uint64_t>() + 1));
    }
}

TEST_CASE("MessageSet basics") {
    const auto all = MessageSet::all(10);
    CHECK(all.size() == 10);
    CHECK(all.members() == range_big(0, 10));
    CHECK(*all.rank_of(7) == 7);
    CHECK_FALSE(all.rank_of(10).has_value());
    CHECK(all.member_at(3) == 3);
    CHECK_THROWS_AS(all.member_at(10), std::out_of_range);
    CHECK_THROWS_AS(MessageSet::all(0), std::invalid_argument);

    const MessageSet merged({Fragment{0, 2}, Fragment{2, 3}, Fragment{9, 1}});
    CHECK(merged.fragments().size() == 2);
    CHECK(merged.members() == as_big({0, 1, 2, 3, 4, 9}));
    CHECK(*merged.rank_of(9) == 5);
    CHECK_FALSE(merged.rank_of(6).has_value());
    CHECK(merged.member_at(5) == 9);
    CHECK_THROWS_AS(MessageSet({Fragment{3, 2}, Fragment{4, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(MessageSet({Fragment{3, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(MessageSet({}), std::invalid_argument);
}

TEST_CASE("MessageSet select_ranks keeps order across fragments") {
    const MessageSet set({Fragment{0, 3}, Fragment{10, 4}, Fragment{20, 3}});  // 0 1 2 10 11 12 13 20 21 22
    const RankRange ranges[2] = {{1, 4}, {6, 9}};
    CHECK(set.select_ranks(ranges).members() == as_big({1, 2, 10, 13, 20, 21}));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<Fragment> frags;
        BigUint next = 0;
        for (int f = 0; f < 5; ++f) {
            next += rng() % 4;
            const BigUint len = 1 + rng() % 5;
            frags.push_back({next, len});
            next += len + 1;
        }
        const MessageSet s(frags);
        const auto members = s.members();
        const auto n = members.size();
        std::uint64_t a = rng() % (n + 1), b = rng() % (n + 1), c = rng() % (n + 1), d = rng() % (n + 1);
        std::vector<std::uint64_t> cuts = {a, b, c, d};
        std::sort(cuts.begin(), cuts.end());
        const RankRange rr[2] = {{cuts[0], cuts[1]}, {cuts[2], cuts[3]}};
        std::vector<BigUint> expected;
        for (std::uint64_t r = 0; r < n; ++r) {
            if ((r >= cuts[0] && r < cuts[1]) || (r >= cuts[2] && r < cuts[3])) expected.push_back(members[r]);
        }
        if (expected.empty()) {
            CHECK_THROWS_AS(s.select_ranks(rr), std::invalid_argument);
        } else {
            CHECK(s.select_ranks(rr).members() == expected);
        }
    }
}

TEST_CASE("build_labelling") {
    const auto l1 = build_labelling(0.4, 10, LabellingVariant::L1);
    CHECK(l1.ones_count == 4);
    CHECK(labels(l1) == std::vector<int>{0, 0, 0, 0, 0, 0, 1, 1, 1, 1});

    const auto l2 = build_labelling(0.4, 10, LabellingVariant::L2);
    CHECK(l2.ones_count == 4);
    CHECK(labels(l2) == std::vector<int>{0, 0, 1, 1, 1, 1, 0, 0, 0, 0});

    const auto tiny = build_labelling(0.4, 1, LabellingVariant::L1);
    CHECK(tiny.ones_count == 0);
    CHECK(labels(tiny) == std::vector<int>{0});

    CHECK_THROWS_AS(build_labelling(0.7, 10, LabellingVariant::L2), std::invalid_argument);
    CHECK_THROWS_AS(build_labelling(0.4, 0, LabellingVariant::L1), std::invalid_argument);
}

TEST_CASE("L1 and L2 never both label a rank '1' and carry the same mass") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    for (int i = 0; i < 300; ++i) {
        const double p = u(rng);
        const BigUint size = 1 + rng() % 400;
        const auto a = build_labelling(p, size, LabellingVariant::L1);
        const auto b = build_labelling(p, size, LabellingVariant::L2);
        CHECK(a.ones_count == b.ones_count);
        for (BigUint r = 0; r < size; ++r) CHECK_FALSE((a.label(r) == 1 && b.label(r) == 1));
        const double frac = a.ones_count.convert_to<double>() / size.convert_to<double>();
        CHECK(frac <= p);
        CHECK(frac > p - 1.0 / size.convert_to<double>());
    }
}

TEST_CASE("filter_and_expand") {
    const auto set = MessageSet::all(10);
    const auto l1 = build_labelling(0.4, 10, LabellingVariant::L1);
    const auto l2 = build_labelling(0.4, 10, LabellingVariant::L2);
    CHECK(filter_and_expand(set, l1, 0).members() == range_big(0, 6));
    CHECK(filter_and_expand(set, l1, 1).members() == range_big(6, 10));
    CHECK(filter_and_expand(set, l2, 0).members() == as_big({0, 1, 6, 7, 8, 9}));
    CHECK(filter_and_expand(set, l2, 1).members() == range_big(2, 6));

    const auto single = MessageSet::all(1);
    const auto lab1 = build_labelling(0.4, 1, LabellingVariant::L1);
    CHECK(filter_and_expand(single, lab1, 0) == single);
    CHECK_THROWS_AS(filter_and_expand(single, lab1, 1), std::invalid_argument);
    CHECK_THROWS_AS(filter_and_expand(set, lab1, 0), std::invalid_argument);
}

TEST_CASE("encode_step and advance") {
    auto state = initial_state(ErasureProb(0.0), 10);
    state.p_star = 0.4;  // example partition
    state.labelling = build_labelling(0.4, 10, LabellingVariant::L1);

    CHECK(encode_step(state, 7) == 1);
    CHECK(encode_step(state, 2) == 0);
    CHECK_THROWS_AS(encode_step(state, 11), std::invalid_argument);

    SUBCASE("erasures alternate the labelling and keep the set") {
        const auto s1 = advance(state, Symbol::Erasure);
        CHECK(s1.labelling.variant == LabellingVariant::L2);
        CHECK(s1.phase == Phase::ErasureAlternating);
        CHECK(s1.message_set == state.message_set);
        const auto s2 = advance(s1, Symbol::Erasure);
        CHECK(s2.labelling.variant == LabellingVariant::L1);
        CHECK(s2.labelling == state.labelling);
        CHECK(s2.phase == Phase::ErasureAlternating);
    }
    SUBCASE("a received one shrinks to the ones block and forces a zero") {
        const auto s = advance(state, Symbol::One);
        CHECK(s.message_set.size() == 4);
        CHECK(s.phase == Phase::ForcedZero);
        for (int m : {6, 7, 8, 9}) CHECK(encode_step(s, m) == 0);
        for (Symbol y : {Symbol::Zero, Symbol::Erasure}) {
            const auto back = advance(s, y);
            CHECK(back.phase == Phase::GroundFresh);
            CHECK(back.message_set == s.message_set);
            CHECK(back.labelling.variant == LabellingVariant::L1);
        }
    }
    SUBCASE("a received zero after an erasure keeps both zero blocks") {
        const auto s = advance(advance(state, Symbol::Erasure), Symbol::Zero);
        CHECK(s.message_set.members() == as_big({0, 1, 6, 7, 8, 9}));
        CHECK(s.phase == Phase::GroundFresh);
    }
    SUBCASE("size one always sends zero") {
        const auto one = initial_state(ErasureProb(0.5), 1);
        CHECK(encode_step(one, 0) == 0);
    }
}

TEST_CASE("min_lambda guarantees a non-empty ones block") {
    for (double e : {0.0, 0.1, 0.5, 0.9, 1.0}) {
        const ErasureProb eps(e);
        const unsigned lambda = min_lambda(eps);
        const double p = feedback_capacity(eps).p_star;
        CHECK(std::ldexp(p, static_cast<int>(lambda)) >= 1.0);
        CHECK(floor_mul(p, (BigUint(1) << lambda) + 1) >= 1);
    }
    CHECK(min_lambda(ErasureProb(0.0)) == 2);
}

TEST_CASE("fallback repetition code") {
    ErasureChannel clean(ErasureProb(0.0), 1);
    const std::vector<std::uint8_t> one{1}, zero{0};
    CHECK(fallback_transmit(one, clean).channel_uses == 2);
    CHECK(fallback_transmit(zero, clean).channel_uses == 2);
    CHECK(fallback_transmit(one, clean).log.inputs == std::vector<std::uint8_t>{1, 0});

    std::mt19937_64 rng(77);
    std::vector<std::uint8_t> bits(100000);
    for (auto& b : bits) b = rng() & 1;
    ErasureChannel half(ErasureProb(0.5), 78);
    const auto run = fallback_transmit(bits, half);
    CHECK(run.decoded == bits);
    CHECK(check_rll(run.log.inputs));
    const double rate = bits.size() / static_cast<double>(run.channel_uses);
    CHECK(std::abs(rate - 0.25) <= 0.01);

    ErasureChannel dead(ErasureProb(1.0), 1);
    CHECK_THROWS_AS(fallback_transmit(one, dead), std::invalid_argument);
    CHECK(fallback_transmit(std::vector<std::uint8_t>{}, dead).channel_uses == 0);
}

TEST_CASE("fallback resolution rules") {
    FallbackProgress prog;
    prog.bit_count = 3;
    // '?0' never resolves, '0?' resolves a zero, '10' resolves a one
    CHECK_FALSE(prog.receive(Symbol::Erasure).has_value());
    CHECK_FALSE(prog.receive(Symbol::Zero).has_value());
    CHECK_FALSE(prog.receive(Symbol::Zero).has_value());
    CHECK(prog.receive(Symbol::Erasure) == 0);
    CHECK_FALSE(prog.receive(Symbol::One).has_value());
    CHECK(prog.receive(Symbol::Zero) == 1);
    CHECK(prog.bits_done == 2);
    CHECK(fallback_bit_count(1) == 0);
    CHECK(fallback_bit_count(2) == 1);
    CHECK(fallback_bit_count(16) == 4);
    CHECK(fallback_bit_count(17) == 5);
}

TEST_CASE("expected_procedure_length and rate_lower_bound") {
    CHECK(expected_procedure_length(ErasureProb(0.0)) == doctest::Approx(1.3819660112501051).epsilon(1e-13));
    CHECK(expected_procedure_length(ErasureProb(0.5)) == doctest::Approx(2.4301597090019467).epsilon(1e-13));
    CHECK_THROWS_AS(expected_procedure_length(ErasureProb(1.0)), std::domain_error);

    const ErasureProb half(0.5);
    const double cap = feedback_capacity(half).capacity_bits;
    CHECK(std::abs(rate_lower_bound(1e5, cap, 20, half) - cap) <= 1e-3);
    CHECK(std::abs(rate_lower_bound(1e12, 1.0, 40, half) - cap) <= 1e-9);
    for (unsigned lambda = 1; lambda < 30; ++lambda) {
        for (double n : {50.0, 1e3, 1e6}) {
            for (double e : {0.0, 0.3, 0.5, 0.9}) {
                const ErasureProb eps(e);
                CHECK(rate_lower_bound(n, 1.0, lambda, eps) <= feedback_capacity(eps).capacity_bits + 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(rate_lower_bound(10, 1.0, 10, half), std::invalid_argument);
    CHECK_THROWS_AS(rate_lower_bound(10, 1.0, 0, half), std::invalid_argument);
}

TEST_CASE("transmit_message decodes and keeps transcripts consistent") {
    const BigUint total = BigUint(1) << 16;
    std::mt19937_64 rng(1);
    double uses = 0;
    double main_uses = 0, main_bits = 0;
    const int sessions = 400;
    for (int i = 0; i < sessions; ++i) {
        const BigUint message = rng() % 65536;
        TransmitOptions opts;
        opts.check_synchrony = true;
        const auto r = transmit_message(ErasureProb(0.0), message, total, 4, rng(), opts);
        REQUIRE(r.status == SessionStatus::Completed);
        CHECK(*r.decoded == message);
        CHECK(r.synchrony_violations == 0);
        CHECK(r.rll_valid);
        CHECK(r.transcript.delivered_bits == doctest::Approx(16.0));
        uses += r.transcript.channel_uses;
        main_uses += r.transcript.stats.main_phase_uses;
        for (double b : r.transcript.stats.shrink_bits) main_bits += b;
    }
    const double per_bit = uses / sessions / 16.0;
    // The main phase runs at capacity; the last 4 or fewer bits go at rate 1/2.
    CHECK(std::abs(main_uses / main_bits - 1.0 / 0.6942) <= 0.05 / 0.6942);
    CHECK(per_bit > 1.0 / 0.6942);
    CHECK(per_bit < 1.0 / 0.6942 + 0.25);
    CHECK(std::abs(uses / sessions - 23.0) <= 3.0);
}

TEST_CASE("transcript invariants and determinism") {
    const BigUint total = BigUint(1) << 64;
    const BigUint message = (BigUint(0xdeadbeefULL) << 32) | 12345;
    TransmitOptions opts;
    opts.record_steps = true;
    const auto a = transmit_message(ErasureProb(0.6), message, total, 6, 31, opts);
    const auto b = transmit_message(ErasureProb(0.6), message, total, 6, 31, opts);
    const auto c = transmit_message(ErasureProb(0.6), message, total, 6, 32, opts);
    CHECK(*a.decoded == message);
    CHECK(a.transcript.channel.inputs == b.transcript.channel.inputs);
    CHECK(a.transcript.channel.outputs == b.transcript.channel.outputs);
    CHECK(a.transcript.channel.outputs != c.transcript.channel.outputs);

    const auto& log = a.transcript.channel;
    CHECK(log.uses() == a.transcript.channel_uses);
    CHECK(a.transcript.steps.size() == log.uses());
    for (std::size_t i = 0; i < log.uses(); ++i) {
        if (log.erasures[i]) {
            CHECK(log.outputs[i] == Symbol::Erasure);
        } else {
            CHECK(log.outputs[i] == symbol_from_bit(log.inputs[i]));
        }
    }
    CHECK(a.transcript.steps.front().set_size == total.str());
    CHECK(a.transcript.steps.front().phase == "GroundFresh");
    CHECK(a.transcript.steps.back().phase == "Fallback");
}

TEST_CASE("exhaustive erasure patterns: constraint holds and the true message survives") {
    const int total = 48;
    const unsigned lambda = 2;
    const std::size_t horizon = 11;
    for (int message = 0; message < total; ++message) {
        for (std::uint32_t mask = 0; mask < (1u << horizon); ++mask) {
            PatternChannel channel;
            for (std::size_t t = 0; t < horizon; ++t) channel.theta.push_back((mask >> t) & 1);
            const SchemeParams params{ErasureProb(0.5), total, lambda};
            SchemeEncoder enc(params, message);
            SchemeDecoder dec(params);
            ChannelLog log;
            bool in_sync = true;
            run_session(enc, dec, channel, horizon, log, [&](std::size_t, int, Symbol) {
                in_sync = in_sync && synchronized(enc, dec);
            });
            CHECK(in_sync);
            CHECK(check_rll(log.inputs));
            CHECK(dec.state().message_set.rank_of(message).has_value());
            if (dec.finished()) CHECK(*dec.decoded() == message);
        }
    }
}

TEST_CASE("long erasure runs alternate labellings without violating the constraint") {
    const BigUint total = BigUint(1) << 40;
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        PatternChannel channel;
        for (int t = 0; t < 400; ++t) channel.theta.push_back(rng() % 10 < 8 ? 1 : 0);
        const SchemeParams params{ErasureProb(0.8), total, 8};
        const BigUint message = (BigUint(rng()) << 8) % total;
        SchemeEncoder enc(params, message);
        SchemeDecoder dec(params);
        ChannelLog log;
        std::size_t longest_run = 0, run = 0;
        run_session(enc, dec, channel, 400, log, [&](std::size_t, int, Symbol y) {
            run = y == Symbol::Erasure ? run + 1 : 0;
            longest_run = std::max(longest_run, run);
        });
        CHECK(longest_run > 2);
        CHECK(check_rll(log.inputs));
        CHECK(dec.state().message_set.rank_of(message).has_value());
    }
}

TEST_CASE("one-mass constancy along a session") {
    const ErasureProb eps(0.5);
    const BigUint total = BigUint(1) << 50;
    const BigUint message = BigUint(0x123456789ABCULL);
    auto state = initial_state(eps, total);
    ErasureChannel channel(eps, 5);
    const double p = state.p_star;
    for (int t = 0; t < 60; ++t) {
        if (state.phase != Phase::ForcedZero) {
            const double size = state.message_set.size().convert_to<double>();
            const double frac = state.labelling.ones_count.convert_to<double>() / size;
            CHECK(frac <= p);
            CHECK(frac > p - 1.0 / size);
        }
        const Symbol y = channel.transmit(encode_step(state, message));
        advance_in_place(state, y);
        CHECK(state.message_set.rank_of(message).has_value());
    }
}

TEST_CASE("successful transmissions shrink the set by H_b(p) bits on average") {
    const ErasureProb eps(0.5);
    const BigUint total = BigUint(1) << 20000;
    const auto r = transmit_message(eps, total / 3, total, 20, 404);
    REQUIRE(r.decoded.has_value());
    CHECK(*r.decoded == total / 3);
    const auto& shrink = r.transcript.stats.shrink_bits;
    const double mean = std::accumulate(shrink.begin(), shrink.end(), 0.0) / shrink.size();
    const double hb = binary_entropy(optimal_p(eps));
    CHECK(std::abs(mean - hb) <= 0.02 * hb);
    for (double b : shrink) CHECK(b > 0.0);
}

TEST_CASE("total erasure never shrinks the set") {
    const BigUint total = 1024;
    TransmitOptions opts;
    opts.max_uses = 500;
    const auto r = transmit_message(ErasureProb(1.0), 77, total, 4, 1, opts);
    CHECK(r.status == SessionStatus::Exhausted);
    CHECK_FALSE(r.decoded.has_value());
    CHECK(r.final_set.size() == total);
    CHECK(r.final_set.rank_of(77).has_value());
    CHECK(r.transcript.stats.shrink_bits.empty());
    CHECK(r.transcript.channel_uses == 500);
    CHECK(r.rll_valid);
    CHECK_THROWS_AS(transmit_message(ErasureProb(1.0), 1, total, 4, 1), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(transmit_message(ErasureProb(0.5), 1, 1024, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(transmit_message(ErasureProb(0.5), 1024, 1024, 4, 1), std::invalid_argument);
    const auto single = transmit_message(ErasureProb(0.5), 0, 1, 4, 1);
    CHECK(single.transcript.channel_uses == 0);
    CHECK(*single.decoded == 0);
}
