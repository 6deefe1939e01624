#include <catch_amalgamated.hpp>

#include <numbers>

#include "oracle.hpp"
#include "tcpurify/closed_form.hpp"
#include "tcpurify/protocol.hpp"
#include "tcpurify/random_states.hpp"
#include "tcpurify/verify.hpp"

using namespace tcpurify;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

DensityMatrix product(const char* bits) {
    return DensityMatrix::from_pure(make_named_state(bits, std::strlen(bits)).state);
}

} // namespace

TEST_CASE("run_purification basics", "[protocol]") {
    SECTION("N_max = 0 gives a single initial record") {
        const ProtocolResult r = run_purification(product("100"), conditional_channel(3, 0.5, 1), 0,
                                                  make_named_state("w", 3));
        REQUIRE(r.records.size() == 1);
        CHECK(r.records[0].p_cumulative == 1.0);
        CHECK(r.records[0].fidelity == Approx(1.0 / 3.0));
        CHECK(r.records[0].yield_product == 1.0);
        CHECK(r.records[0].yield_survival == 1.0);
        CHECK_FALSE(r.truncated);
    }

    SECTION("two emitters at sqrt6 gt = pi/2: one step purifies exactly") {
        const ProtocolResult r = run_purification(product("10"),
                                                  conditional_channel(2, pi / (2 * std::sqrt(6.0)), 1), 1,
                                                  make_named_state("singlet", 2));
        REQUIRE(r.records.size() == 2);
        CHECK(std::abs(r.records[1].p_cumulative - 0.5) <= 1e-12);
        CHECK(std::abs(r.records[1].fidelity - 1.0) <= 1e-12);
    }

    SECTION("three emitters at pi/sqrt10 converge to W with P -> 1/3") {
        const ProtocolResult r = run_purification(product("100"), conditional_channel(3, pi / std::sqrt(10.0), 1),
                                                  20, make_named_state("w", 3));
        CHECK(r.records[5].fidelity >= 0.995);
        CHECK(r.records[20].p_cumulative == Approx(1.0 / 3.0).margin(1e-6));
        CHECK(r.records[20].fidelity >= 1.0 - 1e-6);
    }

    SECTION("config echo") {
        const ProtocolResult r = run_purification(product("10"), conditional_channel(2, 0.4, 2), 3,
                                                  make_named_state("singlet", 2), "10");
        CHECK(r.config.n_emitters == 2);
        CHECK(r.config.kept_photons == 2);
        CHECK(r.config.gamma_tau == 0.4);
        CHECK(r.config.initial == "10");
        CHECK(r.config.target == "singlet");
    }

    SECTION("invalid inputs") {
        CHECK_THROWS_AS(run_purification(product("10"), conditional_channel(2, 0.4, 1), -1,
                                         make_named_state("singlet", 2)),
                        InputError);
        CHECK_THROWS_AS(run_purification(product("100"), conditional_channel(2, 0.4, 1), 2,
                                         make_named_state("singlet", 2)),
                        InputError);
    }
}

TEST_CASE("record invariants", "[protocol]") {
    StateSampler sampler(42);
    for (int c = 0; c < 10; ++c) {
        const DensityMatrix rho = sampler.mixed_state(build_space(3, 0), {0, 1, 2, 3, 4, 5, 6, 7});
        const ProtocolResult r = run_purification(rho, conditional_channel(3, sampler.uniform(0.1, 3.0), 1), 15,
                                                  make_named_state("w", 3));
        double product_p = 1.0, yield = 1.0;
        for (std::size_t i = 1; i < r.records.size(); ++i) {
            const StepRecord& rec = r.records[i];
            product_p *= rec.p_step;
            yield *= rec.p_cumulative;
            CHECK(rec.p_cumulative == Approx(product_p).epsilon(1e-12));
            CHECK(rec.yield_product == Approx(yield).epsilon(1e-12));
            CHECK(rec.yield_survival == rec.p_cumulative);
            CHECK(rec.p_cumulative <= r.records[i - 1].p_cumulative);
            CHECK(rec.p_step >= 0.0);
            CHECK(rec.p_step <= 1.0 + 1e-12);
            CHECK(rec.fidelity >= 0.0);
            CHECK(rec.fidelity <= 1.0);
        }
    }
}

TEST_CASE("simulation agrees with the state-vector oracle", "[protocol]") {
    for (double gt : {0.25, 0.9, 1.45, 2.6}) {
        const auto ref = oracle::branch(oracle::channel(3, gt, 1), make_named_state("100", 3).state.amplitudes(),
                                        make_named_state("w", 3).state.amplitudes(), 12);
        const ProtocolResult r = run_purification(product("100"), conditional_channel(3, gt, 1), 12,
                                                  make_named_state("w", 3));
        for (int n = 0; n <= 12; ++n) {
            CHECK(std::abs(r.records[n].p_cumulative - ref[n].probability) <= 1e-12);
            CHECK(std::abs(r.records[n].fidelity - ref[n].fidelity) <= 1e-10);
        }
    }
}

TEST_CASE("three emitters at pi/sqrt6: frozen reference values", "[protocol]") {
    // scipy expm reference, gamma*tau = pi/sqrt6, three emitters from |e g g>.
    const double p_ref[] = {1.0, 0.17808402526953743, 0.050638280321460644, 0.017598964560746937};
    const double f_ref[] = {1.0 / 3.0, 0.6974825525849403, 0.9140267999656286, 0.9800095958813555};
    const ProtocolResult r = run_purification(product("100"), conditional_channel(3, pi / std::sqrt(6.0), 1), 3,
                                              make_named_state("w", 3));
    for (int n = 0; n <= 3; ++n) {
        CHECK(r.records[n].p_cumulative == Approx(p_ref[n]).epsilon(1e-11));
        CHECK(r.records[n].fidelity == Approx(f_ref[n]).epsilon(1e-11));
    }
    const auto y = yield_curve(r);
    CHECK(y[2].product == Approx(p_ref[1] * p_ref[2]).epsilon(1e-11));
    CHECK(y[2].survival == Approx(p_ref[2]).epsilon(1e-11));
    for (std::size_t n = 1; n < y.size(); ++n) {
        CHECK(y[n].product < y[n - 1].product);
        CHECK(y[n].product <= y[n].survival);
    }
}

TEST_CASE("yield curve", "[protocol]") {
    SECTION("trapping initial state never loses yield") {
        const ProtocolResult r = run_purification(DensityMatrix::from_pure(make_named_state("singlet", 2).state),
                                                  conditional_channel(2, 0.8, 1), 8, make_named_state("singlet", 2));
        for (const YieldPoint& y : yield_curve(r)) {
            CHECK(y.product == Approx(1.0).margin(1e-12));
            CHECK(y.survival == Approx(1.0).margin(1e-12));
        }
    }
    SECTION("N = 0") {
        const ProtocolResult r = run_purification(product("10"), conditional_channel(2, 0.8, 1), 0,
                                                  make_named_state("singlet", 2));
        const auto y = yield_curve(r);
        REQUIRE(y.size() == 1);
        CHECK(y[0].product == 1.0);
        CHECK(y[0].survival == 1.0);
    }
}

TEST_CASE("a vanishing branch truncates the run", "[protocol]") {
    const ProtocolResult r = run_purification(product("00"), conditional_channel(2, pi / (2 * std::sqrt(2.0)), 1), 5,
                                              make_named_state("singlet", 2));
    CHECK(r.truncated);
    CHECK(r.records.size() == 1);
    CHECK(r.failed_probability <= 1e-14);
}

TEST_CASE("mixed initial states purify to W except the vacuum", "[protocol]") {
    const CompositeSpace e3 = build_space(3, 0);
    const NamedState w = make_named_state("w", 3);
    const ConditionalChannel ch = conditional_channel(3, pi / std::sqrt(10.0), 1);
    StateSampler sampler(2718);
    int accepted = 0;
    while (accepted < 10) {
        const DensityMatrix rho = sampler.mixed_state(e3, {1, 2, 4});
        if (fidelity(rho, w) < 0.05) continue;
        ++accepted;
        const ProtocolResult r = run_purification(rho, ch, 25, w);
        CHECK(r.records.back().fidelity >= 0.99);
    }
    const ProtocolResult vac = run_purification(product("000"), ch, 25, w);
    for (const StepRecord& rec : vac.records) CHECK(rec.fidelity == 0.0);
}

TEST_CASE("Monte-Carlo survival sampling", "[protocol]") {
    const ProtocolResult r = run_purification(product("100"), conditional_channel(3, pi / std::sqrt(6.0), 1), 4,
                                              make_named_state("w", 3));
    const auto a = sample_survival(r, 20000, 17);
    const auto b = sample_survival(r, 20000, 17);
    CHECK(a == b);
    CHECK(a[0] == 1.0);
    for (std::size_t n = 1; n < a.size(); ++n) {
        CHECK(a[n] <= a[n - 1]);
        // 4 sigma of a binomial estimate.
        const double p = r.records[n].p_cumulative;
        CHECK(std::abs(a[n] - p) <= 4.0 * std::sqrt(p * (1 - p) / 20000.0) + 1e-12);
    }
    CHECK(sample_survival(r, 20000, 18) != a);
}
