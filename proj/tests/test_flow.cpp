#include "corpus.hpp"

#include "nstori/errors.hpp"
#include "nstori/flow.hpp"
#include "nstori/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>

using namespace nstori;
using namespace nstori::testing;

namespace {

double sup_dist(const State& a, const State& b)
{
    return std::max({std::abs(a.phi - b.phi), std::abs(a.x - b.x), std::abs(a.y - b.y)});
}

// Brute-force first sign change of x along the plus branch, step h, then bisection.
double scan_first_zero(const PeriodicForcing& f, const State& s0, double h, double horizon)
{
    double prev = h;
    for (double t = h; t <= horizon; t += h) {
        if (flow_plus(f, t, s0).x <= 0.0) {
            double lo = prev - h;
            double hi = t;
            for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
                const double mid = 0.5 * (lo + hi);
                (flow_plus(f, mid, s0).x > 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = t + h;
    }
    return -1.0;
}

} // namespace

TEST_CASE("flow_plus examples")
{
    const auto z = zero_forcing();
    const State a = flow_plus(z, 1.0, {0.0, 0.0, 1.0});
    CHECK(a.phi == doctest::Approx(1.0));
    CHECK(a.x == doctest::Approx(0.5));
    CHECK(a.y == doctest::Approx(0.0));

    const double phi0 = 0.3;
    const State b = flow_plus(z, 2.0, {phi0, 0.0, 1.0});
    CHECK(b.phi == doctest::Approx(2.0 + phi0));
    CHECK(std::abs(b.x) < 1e-15);
    CHECK(b.y == doctest::Approx(-1.0));

    const State c = flow_plus(square_wave(), 0.5, {0.0, 0.0, 0.6});
    CHECK(c.x == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("flow_minus examples")
{
    const auto z = zero_forcing();
    const State a = flow_minus(z, 1.0, {0.0, 0.0, -1.0});
    CHECK(a.x == doctest::Approx(-0.5));
    CHECK(a.y == doctest::Approx(0.0));

    const State b = flow_minus(z, 2.0, {0.7, 0.0, -1.0});
    CHECK(b.phi == doctest::Approx(2.7));
    CHECK(std::abs(b.x) < 1e-15);
    CHECK(b.y == doctest::Approx(1.0));

    const State c = flow_minus(square_wave(), 0.5, {0.0, 0.0, -0.6});
    CHECK(c.x == doctest::Approx(-0.05).epsilon(1e-13));
}

TEST_CASE("lateral flows satisfy the ODE")
{
    const double h = 1e-6;
    for (const auto& f : corpus()) {
        const State s0{0.17, 0.4, -0.3};
        for (Branch b : {Branch::plus, Branch::minus}) {
            for (double t : {0.1, 0.41, 1.61}) {
                const State m = flow_branch(f, b, t - h, s0);
                const State c = flow_branch(f, b, t, s0);
                const State p = flow_branch(f, b, t + h, s0);
                CHECK((p.x - m.x) / (2 * h) == doctest::Approx(c.y).epsilon(1e-7));
                const double accel = -branch_sign(b) + f.p(c.phi);
                CHECK(std::abs((p.y - m.y) / (2 * h) - accel) < 1e-6);
            }
        }
    }
}

TEST_CASE("semigroup property per branch")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.0, 3.0);
    std::uniform_real_distribution<double> s(-2.0, 2.0);
    for (const auto& f : corpus()) {
        for (Branch b : {Branch::plus, Branch::minus}) {
            for (int i = 0; i < 50; ++i) {
                const State s0{d(rng), s(rng), s(rng)};
                const double t1 = d(rng);
                const double t2 = d(rng);
                const State once = flow_branch(f, b, t1 + t2, s0);
                const State twice = flow_branch(f, b, t2, flow_branch(f, b, t1, s0));
                const double scale = std::max({1.0, std::abs(once.x), std::abs(once.y), std::abs(once.phi)});
                CHECK(sup_dist(once, twice) <= 1e-10 * scale);
            }
        }
    }
}

TEST_CASE("next_crossing examples")
{
    const auto z = zero_forcing();
    auto t1 = next_crossing(z, Branch::plus, {0.0, 0.0, 1.0}, 10.0);
    REQUIRE(t1);
    CHECK(*t1 == doctest::Approx(2.0).epsilon(1e-12));

    auto t3 = next_crossing(z, Branch::plus, {0.2, 0.0, 1.5}, 10.0);
    REQUIRE(t3);
    CHECK(*t3 == doctest::Approx(3.0).epsilon(1e-12));

    CHECK_FALSE(next_crossing(z, Branch::plus, {0.0, 0.0, 1.0}, 1.5));

    // Hand derivation: x = t/4 on [0, 1/2], then x = -t^2 + 5t/4 - 1/4 with root t = 1.
    const auto sq = square_wave();
    const State s0{0.0, 0.0, 0.25};
    auto ts = next_crossing(sq, Branch::plus, s0, 5.0);
    REQUIRE(ts);
    CHECK(*ts == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(*ts == doctest::Approx(scan_first_zero(sq, s0, 1e-5, 5.0)).epsilon(1e-10));
}

TEST_CASE("next_crossing agrees with a dense sign-change scan")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> y(0.05, 1.5);
    std::uniform_real_distribution<double> phi(0.0, 1.0);
    for (const auto& f : corpus()) {
        for (int i = 0; i < 10; ++i) {
            const State s0{phi(rng), 0.0, y(rng)};
            const auto t = next_crossing(f, Branch::plus, s0, 6.0);
            const double ref = scan_first_zero(f, s0, 1e-4, 6.0);
            if (ref < 0) {
                CHECK_FALSE(t);
            } else {
                REQUIRE(t);
                CHECK(std::abs(*t - ref) < 1e-9);
            }
        }
    }
}

TEST_CASE("next_crossing does not step over a close pair of roots")
{
    // p = 3 on [0, 1/2): plus branch has x'' = 2, x = 0.001 - 0.08 t + t^2 dips below zero.
    const auto sq = square_wave(3.0);
    const auto t = next_crossing(sq, Branch::plus, {0.0, 0.001, -0.08}, 2.0);
    REQUIRE(t);
    CHECK(*t == doctest::Approx(0.04 - std::sqrt(0.0006)).epsilon(1e-10));

    // minus branch, p = 0: -0.004 + 0.1 t + t^2 / 2
    const auto z = zero_forcing();
    const auto m = next_crossing(z, Branch::minus, {0.0, -0.004, 0.1}, 1.0);
    REQUIRE(m);
    CHECK(*m == doctest::Approx(-0.1 + std::sqrt(0.018)).epsilon(1e-12));
}

TEST_CASE("next_crossing preconditions")
{
    const auto z = zero_forcing();
    CHECK_THROWS_AS(next_crossing(z, Branch::plus, {0.0, 0.0, 0.0}, 1.0), DegenerateStart);
    CHECK_THROWS_AS(next_crossing(z, Branch::plus, {0.0, 0.0, -1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(next_crossing(z, Branch::minus, {0.0, 0.5, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("evolve on the zero forcing")
{
    const auto z = zero_forcing();
    const auto traj = evolve(z, {0.0, 0.0, 1.0}, 4.0);
    REQUIRE(traj.segments().size() == 2);
    CHECK(traj.segments()[0].branch == Branch::plus);
    CHECK(traj.segments()[1].branch == Branch::minus);
    REQUIRE(traj.events().size() >= 1);
    CHECK(traj.events()[0].time == doctest::Approx(2.0));
    CHECK(traj.events()[0].state.y == doctest::Approx(-1.0));
    const State end = traj.final_state();
    CHECK(end.phi == doctest::Approx(4.0));
    CHECK(std::abs(end.x) < 1e-12);
    CHECK(end.y == doctest::Approx(1.0));

    const State mid = traj.at(1.0);
    CHECK(mid.x == doctest::Approx(0.5));
    CHECK(traj.at(3.0).x == doctest::Approx(-0.5));
}

TEST_CASE("evolve junctions alternate and stay on the plane")
{
    for (const auto& f : corpus()) {
        const auto traj = evolve(f, {0.1, 0.3, 0.2}, 30.0);
        const auto& seg = traj.segments();
        for (std::size_t i = 1; i < seg.size(); ++i) {
            CHECK(seg[i].branch == opposite(seg[i - 1].branch));
            CHECK(std::abs(seg[i].start.x) <= kCrossingTolerance);
            CHECK(sup_dist(seg[i].start, seg[i - 1].end) <= 1e-11);
            CHECK(seg[i].t_start == doctest::Approx(seg[i - 1].t_start + seg[i - 1].duration));
        }
        for (const auto& e : traj.events()) {
            CHECK(std::abs(e.state.y) > kDegenerateVelocity);
        }
        // segment interiors stay on their side
        for (const auto& s : seg) {
            for (int k = 1; k < 16; ++k) {
                const double x = flow_branch(f, s.branch, s.duration * k / 16.0, s.start).x;
                CHECK(branch_sign(s.branch) * x >= -1e-12);
            }
        }
    }
}

TEST_CASE("evolve is deterministic")
{
    const auto f = two_harmonic();
    const auto a = evolve(f, {0.3, -0.2, 0.7}, 40.0);
    const auto b = evolve(f, {0.3, -0.2, 0.7}, 40.0);
    REQUIRE(a.segments().size() == b.segments().size());
    for (std::size_t i = 0; i < a.segments().size(); ++i) {
        const auto& u = a.segments()[i].end;
        const auto& v = b.segments()[i].end;
        CHECK(std::memcmp(&u, &v, sizeof(State)) == 0);
    }
}

TEST_CASE("evolve errors")
{
    CHECK_THROWS_AS(evolve(zero_forcing(), {0.0, 0.0, 0.0}, 1.0), DegenerateStart);
    // x = 0.0025 - 0.1 t + t^2 touches the plane with zero velocity at t = 0.05
    CHECK_THROWS_AS(evolve(square_wave(3.0), {0.0, 0.0025, -0.1}, 1.0), DegenerateCrossing);
}

TEST_CASE("evolve matches the RK4 oracle")
{
    const auto sq = square_wave();
    const State s0{0.0, 0.3, 0.0};
    for (double duration : {10.0, 50.0}) {
        const auto traj = evolve(sq, s0, duration);
        const auto samples = oracle::rk_evolve(sq, s0, duration);
        double worst = 0.0;
        for (const auto& s : samples) {
            worst = std::max(worst, sup_dist(traj.at(s.t), s.state));
        }
        CHECK(worst <= 1e-6);
        CHECK(sup_dist(traj.final_state(), samples.back().state) <= 1e-6);
    }

    const auto z = zero_forcing();
    const auto end = oracle::rk_evolve(z, {0.0, 0.0, 1.0}, 2.0).back().state;
    CHECK(end.phi == doctest::Approx(2.0));
    CHECK(std::abs(end.x) < 1e-8);
    CHECK(std::abs(end.y + 1.0) < 1e-8);
}

TEST_CASE("RK4 oracle converges at fourth order")
{
    // Smooth forcing, no events: plus branch from a high start over one period.
    const auto f = sinusoid();
    const State s0{0.0, 5.0, 0.0};
    const State exact = flow_plus(f, 1.0, s0);
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
        oracle::OracleConfig cfg;
        cfg.rk_step = 0.05 / (1 << k);
        const State s = oracle::rk_evolve(f, s0, 1.0, cfg).back().state;
        const double err = std::abs(s.x - exact.x) + std::abs(s.y - exact.y);
        if (k > 0) {
            CHECK(prev / err > 12.0);
            CHECK(prev / err < 20.0);
        }
        prev = err;
    }
}

TEST_CASE("time_T_map")
{
    const auto z = zero_forcing();
    // point of the n = 1 cylinder at phi = 0: apex (0, 1/8, 0)
    const State apex{0.0, 0.125, 0.0};
    State s = apex;
    for (int k = 0; k < 2; ++k) {
        s = time_T_map(z, {0.0, s.x, s.y});
    }
    CHECK(std::abs(s.x - apex.x) < 1e-8);
    CHECK(std::abs(s.y - apex.y) < 1e-8);

    const State one = time_T_map(z, {0.0, 0.1, 0.0});
    const State ref = oracle::rk_evolve(z, {0.0, 0.1, 0.0}, 1.0).back().state;
    CHECK(sup_dist(one, ref) < 1e-8);

    CHECK_THROWS_AS(time_T_map(z, {0.5, 0.1, 0.0}), std::invalid_argument);
}
