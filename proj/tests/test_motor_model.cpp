#include <cmath>
#include <random>

#include <doctest.h>

#include "erldrive/field_orientation.hpp"
#include "erldrive/motor_model.hpp"
#include "test_params.hpp"

using namespace erldrive;

TEST_CASE("leakage factor")
{
    MotorParams p = test_motor();

    SUBCASE("zero coupling gives sigma = 1")
    {
        p.Lm = 0.0;
        CHECK(leakage_factor(p) == doctest::Approx(1.0));
    }
    SUBCASE("test machine value")
    {
        const double expected = 1.0 - (0.16 * 0.16) / (0.17 * 0.17);
        CHECK(leakage_factor(p) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(leakage_factor(p) == doctest::Approx(0.114187).epsilon(1e-4));
    }
    SUBCASE("perfect-coupling limit stays positive")
    {
        p.Lm = std::sqrt(p.Ls * p.Lr - 1e-12);
        CHECK(leakage_factor(p) > 0.0);
        CHECK(leakage_factor(p) < 1e-9);
    }
    SUBCASE("invariants rejected")
    {
        MotorParams bad = test_motor();
        bad.Lm = 0.18;  // Lm^2 > Ls*Lr
        CHECK_THROWS_AS(validate(bad), std::invalid_argument);
        bad = test_motor();
        bad.Rs = 0.0;
        CHECK_THROWS_AS(validate(bad), std::invalid_argument);
        bad = test_motor();
        bad.pole_pairs = 0;
        CHECK_THROWS_AS(validate(bad), std::invalid_argument);
        CHECK_NOTHROW(validate(test_motor()));
    }
}

TEST_CASE("electromagnetic torque")
{
    const MotorParams p = test_motor();

    MotorState s;
    s.psird = 0.99;
    s.isq = 7.0;
    const double expected = 2 * 1.5 * (0.16 / 0.17) * 0.99 * 7.0;
    CHECK(electromagnetic_torque(s, p) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(electromagnetic_torque(s, p) == doctest::Approx(19.57).epsilon(1e-3));

    SUBCASE("no current, no torque")
    {
        MotorState z;
        z.psird = 0.8;
        z.psirq = 0.3;
        CHECK(electromagnetic_torque(z, p) == 0.0);
    }
    SUBCASE("cross-product antisymmetry")
    {
        MotorState z;
        z.psird = z.psirq = 0.5;
        z.isd = z.isq = 3.0;
        CHECK(electromagnetic_torque(z, p) == 0.0);
    }
    SUBCASE("bilinear scaling: currents x c and fluxes x c scale torque by c^2")
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (int i = 0; i < 200; ++i) {
            MotorState a;
            a.isd = u(rng);
            a.isq = u(rng);
            a.psird = u(rng);
            a.psirq = u(rng);
            const double c = std::abs(u(rng)) + 0.1;
            MotorState b = a;
            b.isd *= c;
            b.isq *= c;
            b.psird *= c;
            b.psirq *= c;
            CHECK(electromagnetic_torque(b, p)
                  == doctest::Approx(c * c * electromagnetic_torque(a, p)).epsilon(1e-10));
        }
    }
}

TEST_CASE("derivatives")
{
    const MotorParams p = test_motor();

    SUBCASE("origin with zero inputs is an exact equilibrium")
    {
        const StateDerivative d = derivatives(MotorState{}, PlantInputs{}, p);
        CHECK(d.isd == 0.0);
        CHECK(d.isq == 0.0);
        CHECK(d.psird == 0.0);
        CHECK(d.psirq == 0.0);
        CHECK(d.omega == 0.0);
        CHECK(d.theta == 0.0);
    }
    SUBCASE("single-term flux buildup from isd")
    {
        MotorState s;
        s.isd = 1.0;
        const StateDerivative d = derivatives(s, PlantInputs{}, p);
        const double expected = p.Rr * p.Lm / p.Lr;  // 1.7318 Wb/s
        CHECK(d.psird == doctest::Approx(expected).epsilon(1e-12));
        CHECK(d.psird == doctest::Approx(1.7318).epsilon(1e-4));
    }
    SUBCASE("friction-only mechanical decay")
    {
        MotorState s;
        s.omega = 10.0;
        const StateDerivative d = derivatives(s, PlantInputs{}, p);
        CHECK(d.omega == doctest::Approx(-p.fv * 10.0 / p.J).epsilon(1e-12));
        CHECK(d.theta == doctest::Approx(10.0));
    }
}

TEST_CASE("rk4 step")
{
    SUBCASE("zero state is a fixed point")
    {
        const MotorState out = step_rk4(MotorState{}, PlantInputs{}, test_motor(), 1e-4);
        CHECK(out.isd == 0.0);
        CHECK(out.isq == 0.0);
        CHECK(out.psird == 0.0);
        CHECK(out.psirq == 0.0);
        CHECK(out.omega == 0.0);
        CHECK(out.theta == 0.0);
    }

    SUBCASE("halving dt shrinks the end-of-run error about sixteenfold")
    {
        MotorParams p = test_motor();
        p.fv = 0.77;  // a = 50 1/s
        const double a = p.fv / p.J;
        const double horizon = 0.05;

        auto end_error = [&](double dt) {
            MotorState s;
            s.omega = 100.0;
            const long n = std::lround(horizon / dt);
            for (long i = 0; i < n; ++i) s = step_rk4(s, PlantInputs{}, p, dt);
            return std::fabs(s.omega - 100.0 * std::exp(-a * horizon));
        };

        const double e1 = end_error(2e-3);
        const double e2 = end_error(1e-3);
        CHECK(e1 / e2 > 12.0);
        CHECK(e1 / e2 < 20.0);
    }

    SUBCASE("friction decay matches the closed form to O(dt^5)")
    {
        // stiffen the mechanical pole so the per-step error is measurable
        MotorParams p = test_motor();
        p.fv = 0.77;  // a = fv/J = 50 1/s
        const double a = p.fv / p.J;

        MotorState s;
        s.omega = 100.0;

        auto one_step_error = [&](double dt) {
            const MotorState out = step_rk4(s, PlantInputs{}, p, dt);
            return std::fabs(out.omega - 100.0 * std::exp(-a * dt));
        };

        const double e1 = one_step_error(1e-2);
        const double e2 = one_step_error(5e-3);
        CHECK(e1 < 100.0 * std::pow(a * 1e-2, 5) / 120.0 * 1.5);
        // per-step error should shrink ~32x when dt halves
        CHECK(e1 / e2 > 24.0);
        CHECK(e1 / e2 < 40.0);
    }

    SUBCASE("field-oriented slip balance holds psi_rq at zero")
    {
        // orientation-consistent state: psi_rd = Lm*isd, psi_rq = 0, with the
        // equivalent voltages and slip-consistent frame speed applied.
        const MotorParams p = test_motor();
        const double sigma_ls = leakage_factor(p) * p.Ls;
        const double r_eff = p.Rs + p.Rr * p.Lm * p.Lm / (p.Lr * p.Lr);

        auto make_inputs = [&](const MotorState& s, bool balance_torque) {
            const double omega_s =
                p.pole_pairs * s.omega + slip_frequency(s.isq, s.psird, p, 0.05);
            PlantInputs u;
            u.omega_s = omega_s;
            u.vsd = -sigma_ls * omega_s * s.isq + r_eff * s.isd
                    - (p.Lm * p.Rr / (p.Lr * p.Lr)) * s.psird;
            u.vsq = sigma_ls * omega_s * s.isd + r_eff * s.isq
                    + (p.Lm / p.Lr) * p.pole_pairs * s.omega * s.psird;
            if (balance_torque)
                u.load_torque = electromagnetic_torque(s, p) - p.fv * s.omega;
            return u;
        };

        MotorState s;
        s.isd = 6.1875;
        s.isq = 3.0;
        s.psird = p.Lm * s.isd;
        s.psirq = 0.0;
        s.omega = 50.0;

        SUBCASE("torque-balanced equilibrium is held exactly")
        {
            MotorState st = s;
            for (int i = 0; i < 1000; ++i) st = step_rk4(st, make_inputs(st, true), p, 2e-5);
            CHECK(std::fabs(st.psirq) < 1e-9);
            CHECK(st.psird == doctest::Approx(0.99).epsilon(1e-9));
            CHECK(st.isd == doctest::Approx(6.1875).epsilon(1e-9));
            CHECK(st.isq == doctest::Approx(3.0).epsilon(1e-9));
        }
        SUBCASE("accelerating rotor stays inside a small orientation band")
        {
            // the zero-order hold on omega_s lags the accelerating rotor by
            // one step, so a small quasi-steady psi_rq offset is expected
            MotorState st = s;
            double worst = 0.0;
            for (int i = 0; i < 1000; ++i) {
                st = step_rk4(st, make_inputs(st, false), p, 2e-5);
                worst = std::max(worst, std::fabs(st.psirq));
            }
            CHECK(worst < 5e-3);  // well inside 1% of the 0.99 Wb field
            CHECK(st.psird == doctest::Approx(0.99).epsilon(1e-4));
        }
    }
}

TEST_CASE("blow-up guard")
{
    const BlowUpGuard g{70.0, 1482.0};
    MotorState s;
    CHECK(guard_violation(s, g) == nullptr);
    s.isd = 71.0;
    CHECK(guard_violation(s, g) == std::string("isd"));
    s.isd = 0.0;
    s.isq = -80.0;
    CHECK(guard_violation(s, g) == std::string("isq"));
    s.isq = 0.0;
    s.omega = 1500.0;
    CHECK(guard_violation(s, g) == std::string("omega"));
    s.omega = std::numeric_limits<double>::quiet_NaN();
    CHECK(guard_violation(s, g) == std::string("non-finite"));

    SUBCASE("open-loop overvoltage trips the guard")
    {
        const MotorParams p = test_motor();
        MotorState state;
        PlantInputs u;
        u.vsd = 5000.0;
        bool tripped = false;
        for (int i = 0; i < 100000; ++i) {
            state = step_rk4(state, u, p, 2e-5);
            if (guard_violation(state, BlowUpGuard{70.0, 1482.0})) {
                tripped = true;
                break;
            }
        }
        CHECK(tripped);
    }
}
