#include <doctest.h>

#include <cmath>

#include "cuspscale/escape.hpp"

using namespace cuspscale;

namespace {

const ModelSurface& model() {
    static const ModelSurface m = ModelSurface::parabolic_cylinder();
    return m;
}

const EscapeSet& fields() {
    static const EscapeSet s = build_escape(model());
    return s;
}

const EscapeGrid coarse{161, 61, 0.005, 8, 80};

PhasePoint on_shell(double r, double rho, double p, Chart c) {
    const double e = c == Chart::Funnel ? std::exp(2 * r) : c == Chart::Cusp ? std::exp(-2 * r) : std::exp(-2 * r);
    return {r, rho, std::max(0.0, p - rho * rho) * e, c};
}

}  // namespace

TEST_CASE("profile invariants") {
    const EscapeSet& s = fields();
    const auto& F = s.funnel;
    CHECK(F.chi(1.0).v == 0);
    CHECK(F.chi(2.0).v == doctest::Approx(1.0).epsilon(1e-14));
    for (double r = 2; r <= F.R_F + 5; r += 0.25) CHECK(F.chi(r).d1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(F.chi(F.R_F + 6).v == 0);
    const auto& C = s.cusp;
    CHECK(C.chi(0).v == 1.0);
    for (double r = 0; r <= C.R_C + 5; r += 0.5) CHECK(C.chi(r).d1 == doctest::Approx(-1 / (2 * (C.R_C + 5))).epsilon(1e-14));
    CHECK(F.psi(1.0) == 1.0);
    CHECK(F.psi(1 + F.delta_p) == 1.0);
    CHECK(F.psi(1 + 2 * F.delta_p) == 0.0);
}

TEST_CASE("funnel bracket on the shell") {
    const EscapeSet& s = fields();
    for (double r = 2; r <= s.funnel.R_F + 5; r += 0.5) {
        // rho^2 = p = 1: the bracket is exactly 2 C_F rho^2 chi'
        for (double rho : {-1.0, 1.0})
            CHECK(poisson_derivative(s.funnel, {r, rho, 0, Chart::Funnel}, model()) ==
                  doctest::Approx(2 * s.C_F).epsilon(1e-13));
        for (double rho = -0.95; rho <= 0.96; rho += 0.05)
            CHECK(poisson_derivative(s.funnel, on_shell(r, rho, 1, Chart::Funnel), model()) >= s.C_F * (1 - 1e-12));
    }
}

TEST_CASE("cusp bracket on the shell is positive") {
    const EscapeSet& s = fields();
    double lo = INFINITY;
    for (double r = 0; r <= s.cusp.R_C + 5; r += 0.1)
        for (double rho = -1; rho <= 1.0001; rho += 0.05)
            lo = std::min(lo, poisson_derivative(s.cusp, on_shell(r, std::clamp(rho, -1.0, 1.0), 1, Chart::Cusp), model()));
    CHECK(lo > 0);
}

TEST_CASE("escape value vanishes off the supports") {
    const EscapeSet& s = fields();
    const double far_funnel = -1 - (s.funnel.R_F + 6.5), far_cusp = 1 + s.cusp.R_C + 7.5;
    for (double t : {far_funnel, far_cusp})
        for (double rho : {-0.7, 0.2}) {
            const PhasePoint x = on_shell(t, rho, 1, Chart::Global);
            for (const EscapeField* f : s.all()) {
                CHECK(escape_value(*f, x, model()) == 0.0);
                CHECK(poisson_derivative(*f, x, model()) == 0.0);
            }
        }
    // outside supp psi
    const PhasePoint x = on_shell(0.3, 0.4, 1 + 2.5 * s.funnel.delta_p, Chart::Global);
    for (const EscapeField* f : s.all()) CHECK(poisson_derivative(*f, x, model()) == 0.0);
}

TEST_CASE("bracket is linear in the field") {
    const EscapeSet& s = fields();
    for (double t : {-6.0, -3.2, 0.4, 5.0})
        for (double rho : {-0.6, 0.3, 0.9}) {
            const PhasePoint x = on_shell(t, rho, 1.02, Chart::Global);
            double sum = 0;
            for (const EscapeField* f : s.all()) sum += poisson_derivative(*f, x, model());
            CHECK(poisson_sum(s, x, model()) == sum);
            EscapeField g = s.funnel;
            g.k = 2.5 * s.funnel.k;
            const double a = poisson_derivative(g, x, model()), b = poisson_derivative(s.funnel, x, model());
            CHECK(std::abs(a - 2.5 * b) <= 1e-14 * std::abs(a));
        }
}

TEST_CASE("bracket matches a flow finite difference") {
    const EscapeSet& s = fields();
    double worst = 0;
    for (double t : {-8.0, -6.5, -3.5, -2.2, 0.3, 1.5, 4.0, 9.0, 13.0})
        for (double rho : {-0.9, -0.3, 0.5, 0.95}) {
            const PhasePoint x = on_shell(t, rho, 1, Chart::Global);
            for (const EscapeField* f : s.all())
                worst = std::max(worst, std::abs(poisson_derivative(*f, x, model()) - flow_derivative_fd(*f, x, model())));
        }
    CHECK(worst < 1e-6);
}

TEST_CASE("scaled bracket stays within O(sum |f^(k)|) of the unscaled one") {
    const EscapeSet& s = fields();
    const auto c = build_contour(End::Funnel, s.R, model().theta, 0, model().funnel_profile);
    double worst = 0;
    int used = 0;
    for (double r = c.R_F0 - 0.1; r <= c.R_F0 + 1; r += 0.01) {
        const Jet F = eval_contour(c, r);
        const double size = std::abs(F.v) + std::abs(F.d1) + std::abs(F.d2);
        if (size == 0 || size > 0.05) continue;
        for (double rho : {-0.8, 0.1, 0.99}) {
            const PhasePoint x = on_shell(r, rho, 1, Chart::Funnel);
            const double d = std::abs(poisson_derivative(s.funnel, x, model(), &c) - poisson_derivative(s.funnel, x, model()));
            worst = std::max(worst, d / (s.C_F * size));
            ++used;
        }
    }
    CHECK(used > 10);
    CHECK(worst < 10);
}

TEST_CASE("certified regions pass with a positive margin") {
    const EscapeSet& s = fields();
    const EscapeReport probe = verify_escape(s, model(), 0, 0.05, 0.05, coarse);
    REQUIRE(probe.regions.size() == 3);
    CHECK(probe.empirical_delta0 > 0);
    const EscapeReport r = verify_escape(s, model(), 0.5 * probe.empirical_delta0, 0.05, 0.05, coarse);
    CHECK(r.all_pass());
    for (const char* id : {"unscaled", "collar.funnel", "collar.cusp"}) {
        REQUIRE(r.find(id));
        CHECK(r.find(id)->samples > 0);
    }
}

TEST_CASE("widening the p band past the field plateau produces a boundary failure") {
    const EscapeSet& s = fields();
    const double dp = s.funnel.delta_p;
    const EscapeReport r = verify_escape(s, model(), 1e-3, 2 * dp, 0.05, coarse);
    CHECK_FALSE(r.all_pass());
    const RegionMargin* u = r.find("unscaled");
    REQUIRE(u);
    CHECK_FALSE(u->pass);
    CHECK(std::abs(u->witness_p - 1) > dp);
    CHECK(std::abs(u->witness_p - 1) <= 2 * dp + 1e-12);
}

TEST_CASE("margins are monotone in delta_p and delta_f") {
    const EscapeSet& s = fields();
    double prev_u = INFINITY, prev_f = INFINITY, prev_c = INFINITY;
    for (double dp : {0.01, 0.03, 0.05}) {
        const EscapeReport r = verify_escape(s, model(), 0, dp, 0.05, coarse);
        CHECK(r.find("unscaled")->margin <= prev_u);
        prev_u = r.find("unscaled")->margin;
    }
    for (double df : {0.01, 0.03, 0.05}) {
        const EscapeReport r = verify_escape(s, model(), 0, 0.05, df, coarse);
        CHECK(r.find("collar.funnel")->margin <= prev_f);
        CHECK(r.find("collar.cusp")->margin <= prev_c);
        prev_f = r.find("collar.funnel")->margin;
        prev_c = r.find("collar.cusp")->margin;
    }
}

TEST_CASE("scaling every field scales every margin") {
    const EscapeSet& s = fields();
    EscapeSet t = s;
    const double k = 3.0;
    t.funnel.k *= k;
    t.cusp.k *= k;
    t.core.k *= k;
    const EscapeReport a = verify_escape(s, model(), 0, 0.05, 0.05, coarse);
    const EscapeReport b = verify_escape(t, model(), 0, 0.05, 0.05, coarse);
    for (std::size_t i = 0; i < a.regions.size(); ++i)
        CHECK(b.regions[i].margin == doctest::Approx(k * a.regions[i].margin).epsilon(1e-13));
}

TEST_CASE("escape configuration errors") {
    ModelSurface m = ModelSurface::parabolic_cylinder();
    m.glue = false;
    CHECK_THROWS_AS(build_escape(m), ConfigError);
    const auto c = build_contour(End::Cusp, 5, m.theta, 0, m.cusp_profile);
    CHECK_THROWS_AS(poisson_derivative(fields().core, {0, 0.5, 0.5, Chart::Global}, model(), &c), ConfigError);
    CHECK_THROWS_AS(poisson_derivative(fields().funnel, {3, 0.5, 0.5, Chart::Funnel}, model(), &c), ConfigError);
}
