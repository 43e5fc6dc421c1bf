#include <doctest.h>

#include "qfd/error.hpp"
#include "qfd/quadsim/controller.hpp"
#include "qfd/quadsim/dynamics.hpp"
#include "qfd/quadsim/episode.hpp"
#include "qfd/quadsim/unbalance.hpp"

#include <cmath>
#include <vector>

using namespace qfd::quadsim;

namespace {

DomainConfig ideal() {
    DomainConfig d;
    d.perfect_motor = true;
    return d;
}

double energy(const Vec3& w, const QuadParams& p) { return w.dot(p.inertia_diag.cwiseProduct(w)); }

}  // namespace

TEST_CASE("rotor forces follow the quadratic thrust and torque law") {
    QuadParams p;
    const auto healthy = FaultSpec::for_label(1);
    const auto zero = rotor_forces(Vec4::Zero(), p, FaultSpec::for_label(3));
    CHECK(zero.thrust.isZero(0));
    CHECK(zero.torque.isZero(0));
    const auto f = rotor_forces(Vec4(500, 0, 0, 0), p, healthy);
    CHECK(f.thrust[0] == doctest::Approx(2.5));
    const auto broken = rotor_forces(Vec4(500, 0, 0, 0), p, FaultSpec::for_label(2, 0.85, 0.85));
    CHECK(broken.thrust[0] == doctest::Approx(2.125));
    CHECK(broken.torque[0] == doctest::Approx(0.85 * p.k_tau * 250000));
    CHECK_THROWS_AS(rotor_forces(Vec4(-1, 0, 0, 0), p, healthy), qfd::InputDomainError);
    CHECK_THROWS_AS(rotor_forces(Vec4(NAN, 0, 0, 0), p, healthy), qfd::InputDomainError);
}

TEST_CASE("fault labels map to degraded rotors") {
    CHECK_FALSE(FaultSpec::for_label(1).faulty_rotor.has_value());
    for (int k = 1; k <= 4; ++k) CHECK(*FaultSpec::for_label(k + 1).faulty_rotor == k);
    CHECK_THROWS_AS(FaultSpec::for_label(6), qfd::InputDomainError);
    FaultSpec bad;
    bad.label = 2;
    CHECK_THROWS_AS(bad.validate(), qfd::InputDomainError);
}

TEST_CASE("angular dynamics") {
    QuadParams p;
    SUBCASE("balanced hover is exactly still") {
        const Vec4 f = Vec4::Constant(2.45), t = Vec4::Constant(3e-2);
        CHECK(angular_dynamics(Vec3::Zero(), f, t, p) == Vec3::Zero());
    }
    SUBCASE("single rotor 3 thrust rolls positive") {
        const Vec3 a = angular_dynamics(Vec3::Zero(), Vec4(0, 0, 1, 0), Vec4::Zero(), p);
        CHECK(a.x() == doctest::Approx(20.0));
        CHECK(a.y() == 0.0);
    }
    SUBCASE("gyroscopic term matches a hand-expanded cross product") {
        p.inertia_diag = Vec3(0.01, 0.02, 0.03);
        const Vec3 w(1, 2, 3);
        const Vec3 a = angular_dynamics(w, Vec4::Zero(), Vec4::Zero(), p);
        const double Ix = 0.01, Iy = 0.02, Iz = 0.03;
        // w x (I w) expanded by components
        const double gx = w.y() * Iz * w.z() - w.z() * Iy * w.y();
        const double gy = w.z() * Ix * w.x() - w.x() * Iz * w.z();
        const double gz = w.x() * Iy * w.y() - w.y() * Ix * w.x();
        CHECK(a.x() == doctest::Approx(-gx / Ix));
        CHECK(a.y() == doctest::Approx(-gy / Iy));
        CHECK(a.z() == doctest::Approx(-gz / Iz));
    }
    SUBCASE("sign conventions: w3 drives p, w2 drives q") {
        const auto h = FaultSpec::for_label(1);
        const Vec4 base = Vec4::Constant(p.hover_speed());
        auto accel = [&](Vec4 w) {
            const auto f = rotor_forces(w, p, h);
            return angular_dynamics(Vec3::Zero(), f.thrust, f.torque, p);
        };
        Vec4 up3 = base, up2 = base;
        up3[2] += 10;
        up2[1] += 10;
        CHECK(accel(up3).x() > 0);
        CHECK(accel(up2).y() > 0);
    }
}

TEST_CASE("balanced hover keeps the rates at zero for 1000 steps") {
    QuadParams p;
    const auto h = FaultSpec::for_label(1);
    const Vec4 hover = Vec4::Constant(p.hover_speed());
    for (bool perfect : {true, false}) {
        DomainConfig d;
        d.perfect_motor = perfect;
        QuadState s;
        s.rotor = hover;
        for (int k = 0; k < 1000; ++k) {
            s = step(s, hover, 0.01, p, h, d);
            REQUIRE(s.rate.cwiseAbs().maxCoeff() < 1e-12);
            const Vec3 a = angular_dynamics(s.rate, rotor_forces(s.rotor, p, h).thrust, rotor_forces(s.rotor, p, h).torque, p);
            REQUIRE(a.cwiseAbs().maxCoeff() < 1e-12);
        }
        CHECK(std::abs(s.attitude.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("perfect motors reach the command in one step; finite motors lag") {
    QuadParams p;
    const Vec4 cmd(400, 450, 500, 550);
    QuadState s;
    s.rotor = Vec4::Constant(300);
    const auto a = step(s, cmd, 0.01, p, FaultSpec::for_label(1), ideal());
    CHECK(a.rotor == cmd);
    DomainConfig lag;
    const auto b = step(s, cmd, 0.01, p, FaultSpec::for_label(1), lag);
    const Vec4 expected = cmd + (s.rotor - cmd) * std::exp(-p.k_m * 0.01);
    for (int i = 0; i < 4; ++i) CHECK(b.rotor[i] == doctest::Approx(expected[i]).epsilon(1e-5));
}

TEST_CASE("step rejects bad dt and invalid states") {
    QuadParams p;
    QuadState s;
    const auto h = FaultSpec::for_label(1);
    CHECK_THROWS_AS(step(s, Vec4::Zero(), 0.0, p, h, ideal()), qfd::InputDomainError);
    CHECK_THROWS_AS(step(s, Vec4::Zero(), 0.03, p, h, ideal()), qfd::InputDomainError);
    s.rotor[2] = -1;
    CHECK_THROWS_AS(step(s, Vec4::Zero(), 0.01, p, h, ideal()), qfd::InputDomainError);
}

TEST_CASE("RK4 converges with fourth-order slope") {
    QuadParams p;
    const auto fault = FaultSpec::for_label(3);
    DomainConfig d;
    QuadState s0;
    s0.rate = Vec3(0.4, -0.3, 0.2);
    s0.rotor = Vec4(480, 500, 520, 470);
    const Vec4 cmd(520, 470, 490, 510);
    const double horizon = 0.32;
    auto run = [&](double dt) {
        QuadState s = s0;
        const long n = std::lround(horizon / dt);
        for (long k = 0; k < n; ++k) s = step(s, cmd, dt, p, fault, d);
        return s;
    };
    const QuadState ref = run(1e-5);
    std::vector<double> logdt, logerr;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        const QuadState s = run(dt);
        const double err = (s.rate - ref.rate).norm() + (s.attitude.coeffs() - ref.attitude.coeffs()).norm() +
                           (s.rotor - ref.rotor).norm() / 1000.0;
        logdt.push_back(std::log(dt));
        logerr.push_back(std::log(err));
    }
    const double n = double(logdt.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < logdt.size(); ++i) {
        mx += logdt[i] / n;
        my += logerr[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < logdt.size(); ++i) {
        sxy += (logdt[i] - mx) * (logerr[i] - my);
        sxx += (logdt[i] - mx) * (logdt[i] - mx);
    }
    const double slope = sxy / sxx;
    INFO("slope " << slope);
    CHECK(std::abs(slope - 4.0) <= 0.3);
}

TEST_CASE("torque-free rotation conserves w^T I w") {
    QuadParams p;
    p.inertia_diag = Vec3(0.01, 0.02, 0.03);
    QuadState s;
    s.rate = Vec3(1, 2, 3);
    const double e0 = energy(s.rate, p);
    for (int k = 0; k < 1000; ++k) s = step(s, Vec4::Zero(), 0.01, p, FaultSpec::for_label(1), ideal());
    const double drift = std::abs(energy(s.rate, p) - e0) / e0;
    INFO("drift " << drift);
    CHECK(drift < 1e-6);
    CHECK(std::abs(s.attitude.norm() - 1.0) < 1e-9);
}

TEST_CASE("CoG offset torque at level attitude") {
    QuadParams p;
    DomainConfig d;
    d.cog_offset = {0.004, -0.003};
    const Vec3 t = cog_torque(QuadState{}, p, d);
    CHECK(t.x() == doctest::Approx(p.mass * kGravity * -0.003));
    CHECK(t.y() == doctest::Approx(-p.mass * kGravity * 0.004));
    CHECK(t.z() == doctest::Approx(0.0));
}

TEST_CASE("controller commands") {
    QuadParams p;
    QuadState s;
    s.position = Vec3(1, 2, 3);
    SUBCASE("at the waypoint every rotor gets the hover speed") {
        const Vec4 w = controller_update(s, s.position, p);
        for (int i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(std::sqrt(p.mass * kGravity / (4 * p.k_f))));
    }
    SUBCASE("a waypoint above raises all rotors equally") {
        const Vec4 w = controller_update(s, s.position + Vec3(0, 0, 1), p);
        CHECK(w[0] > p.hover_speed());
        for (int i = 1; i < 4; ++i) CHECK(w[i] == doctest::Approx(w[0]));
    }
    SUBCASE("a waypoint ahead in +x pitches forward with w2 > w1") {
        Controller c(p, {});
        QuadState st = s;
        st.rotor = Vec4::Constant(p.hover_speed());
        const Vec3 wp = s.position + Vec3(1, 0, 0);
        Vec4 w = c.update({st.position, st.velocity, st.rate, euler_angles(st.attitude)}, wp, 0.01);
        CHECK(w[1] > w[0]);
        st = step(st, w, 0.01, p, FaultSpec::for_label(1), ideal());
        CHECK(st.rate.y() > 0);
        for (int k = 0; k < 100; ++k) {
            w = c.update({st.position, st.velocity, st.rate, euler_angles(st.attitude)}, wp, 0.01);
            st = step(st, w, 0.01, p, FaultSpec::for_label(1), ideal());
        }
        CHECK(st.velocity.x() > 0);
    }
    SUBCASE("mixer inverts the torque geometry") {
        Controller c(p, {});
        const Vec3 tau(0.02, -0.01, 0.003);
        const Vec4 w = c.mix(p.mass * kGravity, tau);
        const auto f = rotor_forces(w, p, FaultSpec::for_label(1));
        const Vec3 a = angular_dynamics(Vec3::Zero(), f.thrust, f.torque, p);
        CHECK(f.thrust.sum() == doctest::Approx(p.mass * kGravity));
        for (int i = 0; i < 3; ++i) CHECK(a[i] * p.inertia_diag[i] == doctest::Approx(tau[i]));
    }
}

TEST_CASE("adjust_speed follows the interpolated ratio") {
    UnbalanceModel m;
    m.rho = Vec4(1, 1.05, 0.98, 1.0);
    m.omega_ref_max = 1000;
    CHECK(adjust_speed(1000, 2, m) == doctest::Approx(1050));
    CHECK(adjust_speed(0, 3, m) == 0.0);
    CHECK(adjust_speed(500, 2, m) == doctest::Approx(262.5));
    for (double w = 50; w <= 1000; w += 50)
        for (double c : {0.5, 1.5, 2.0}) CHECK(adjust_speed(c * w, 2, m) == doctest::Approx(c * c * adjust_speed(w, 2, m)));
    for (double w : {0.0, 123.0, 480.0, 999.0}) CHECK(unadjust_speed(adjust_speed(w, 3, m), 3, m) == doctest::Approx(w));
    UnbalanceModel zero = m;
    zero.omega_ref_max = 0;
    CHECK_THROWS_AS(adjust_speed(10, 1, zero), qfd::InputDomainError);
}

TEST_CASE("estimate_unbalance on synthetic logs") {
    FlightLog log;
    for (int k = 0; k < 600; ++k) {
        log.gyro.push_back({0, 0, 0});
        log.attitude.push_back({0, 0});
        log.omega_cmd.push_back({1000, 1050, 1000, 990});
    }
    const auto m = estimate_unbalance(log);
    CHECK(m.rho[0] == 1.0);
    CHECK(m.rho[1] == doctest::Approx(1.05));
    CHECK(m.rho[2] == doctest::Approx(1.0));
    CHECK(m.rho[3] == doctest::Approx(0.99));
    CHECK(m.omega_ref_max == 1050);

    for (auto& w : log.omega_cmd) w = {700, 700, 700, 700};
    CHECK(estimate_unbalance(log).rho == Vec4::Ones());

    for (auto& w : log.omega_cmd) w = {0, 700, 700, 700};
    CHECK_THROWS_AS(estimate_unbalance(log), qfd::DegenerateLogError);
    CHECK_THROWS_AS(estimate_unbalance(log.slice(0, 100)), qfd::DegenerateLogError);
}

TEST_CASE("closed-loop unbalance recovery within 0.005") {
    QuadParams p;
    DomainConfig d;
    d.domain = Domain::Target;
    d.gyro_noise_std = 0.005;
    d.motor_gain_scale = Vec4(0.92, 1.08, 1.0, 0.95);
    d.rotor_weakness = Vec4(1, 1.03, 0.98, 1.01);
    FlightPlan plan;
    plan.duration = 60;
    const auto log = fly_episode(p, FaultSpec::for_label(1), d, plan, 11);
    const auto m = estimate_unbalance(log.slice(1000, log.size()));
    for (int i = 0; i < 4; ++i) CHECK(std::abs(m.rho[i] - d.rotor_weakness[i]) <= 0.005);
}

TEST_CASE("the adjusted source reproduces the estimated ratios in its commands") {
    QuadParams p;
    DomainConfig d = ideal();
    UnbalanceModel m;
    m.rho = Vec4(1, 1.03, 0.98, 1.01);
    m.omega_ref_max = 510;
    d.unbalance = m;
    FlightPlan plan;
    plan.duration = 20;
    const auto log = fly_episode(p, FaultSpec::for_label(1), d, plan, 1);
    const auto est = estimate_unbalance(log.slice(500, log.size()));
    for (int i = 0; i < 4; ++i) CHECK(est.rho[i] == doctest::Approx(m.rho[i]).epsilon(1e-6));
}

TEST_CASE("episodes") {
    QuadParams p;
    FlightPlan hover;
    hover.duration = 30;
    SUBCASE("noise-free healthy hover settles to zero rates") {
        const auto log = fly_episode(p, FaultSpec::for_label(1), ideal(), hover, 1);
        CHECK(log.size() == 3000);
        for (std::size_t k = 2000; k < log.size(); ++k)
            for (double g : log.gyro[k]) REQUIRE(std::abs(g) < 1e-6);
    }
    SUBCASE("same seed gives identical logs; a different seed does not") {
        DomainConfig d;
        d.gyro_noise_std = 0.005;
        d.waypoint_jitter = 0.2;
        FlightPlan plan;
        plan.waypoints = {Vec3(0, 0, 2), Vec3(1, 1, 2)};
        plan.duration = 20;
        const auto a = fly_episode(p, FaultSpec::for_label(4), d, plan, 5);
        const auto b = fly_episode(p, FaultSpec::for_label(4), d, plan, 5);
        const auto c = fly_episode(p, FaultSpec::for_label(4), d, plan, 6);
        CHECK(a.gyro == b.gyro);
        CHECK(a.omega_cmd == b.omega_cmd);
        CHECK(a.attitude == b.attitude);
        CHECK_FALSE(a.gyro == c.gyro);
    }
    SUBCASE("a broken rotor 1 is spun faster than a healthy one") {
        const auto healthy = fly_episode(p, FaultSpec::for_label(1), ideal(), hover, 3);
        const auto broken = fly_episode(p, FaultSpec::for_label(2), ideal(), hover, 3);
        auto mean1 = [](const FlightLog& l) {
            double s = 0;
            for (const auto& w : l.omega_cmd) s += w[0];
            return s / l.size();
        };
        CHECK(mean1(broken) > mean1(healthy));
        CHECK(broken.label == 2);
    }
    SUBCASE("an unstable controller raises a divergence error naming the step") {
        ControllerGains g;
        g.rate_p = -g.rate_p;
        DomainConfig d = ideal();
        d.cog_offset = {0.01, 0.0};
        try {
            fly_episode(p, FaultSpec::for_label(1), d, hover, 1, g);
            FAIL("expected divergence");
        } catch (const qfd::EpisodeDivergedError& e) {
            CHECK(e.step() > 0);
            CHECK(std::string(e.what()).find("step " + std::to_string(e.step())) != std::string::npos);
        }
    }
    SUBCASE("bad plans are rejected") {
        FlightPlan empty;
        empty.waypoints.clear();
        CHECK_THROWS_AS(fly_episode(p, FaultSpec::for_label(1), ideal(), empty, 1), qfd::InputDomainError);
    }
}
