#include <doctest.h>

#include "nspinn/correction.hpp"
#include "oracles.hpp"

using namespace nspinn;

namespace {

StencilEvaluation steady_base(double h = 0.1, double re = 100.0) {
    StencilEvaluation q;
    q.h = h;
    q.physics.re = re;
    return q;
}

}  // namespace

TEST_CASE("stationary converged state gives zero corrections") {
    StencilEvaluation q = steady_base();
    for (int j = 0; j < 9; ++j) {
        q.u[j] = 0.0;
        q.v[j] = 0.0;
        q.p[j] = 1.3;
    }
    const CorrectionTerms R = correction_terms(q, q);
    CHECK(R.R_p == 0.0);
    CHECK(R.R_u == 0.0);
    CHECK(R.R_v == 0.0);
    const RcPointValues e = rc_point(q, q, 0.9);
    CHECK(e.e_p == 0.0);
    CHECK(e.e_u == 0.0);
    CHECK(e.e_v == 0.0);
}

TEST_CASE("R_p direct substitution: only r_c nonzero") {
    // continuity residual 0.4 with a = 2 and h = 0.1 -> R_p = 0.8 / (-0.4) = -2
    StencilEvaluation q = steady_base(0.1, 2.0);  // a_P = 4/Re = 2 when Re = 2
    q.u[LOC_e] = 0.4;                             // r_c = 0.4
    StencilEvaluation prev = q;                   // stationary otherwise
    const CorrectionTerms R = correction_terms(q, prev);
    CHECK(diag_coefficient(q) == doctest::Approx(2.0));
    CHECK(R.R_p == doctest::Approx(-2.0));
}

TEST_CASE("RC_u direct substitution") {
    // u^n - u^{n-1} = 0.3, alpha = 0.9, R_u = 0.2 -> |0.3 - 0.18| = 0.12
    // build inputs realising R_u = 0.2: only r_u nonzero with r_u = -a*R_u
    StencilEvaluation cur = steady_base(0.1, 4.0);  // a = a_P = 1
    StencilEvaluation prev = cur;
    prev.u[LOC_P] = -0.3;  // u difference 0.3 without touching r_u (P not in prev r_u path)
    // make r_u = -0.2 via the pressure faces only: r_u = a*u_P + b
    // with u zero except u_P: r_u = a*0.3 + (p_e - p_w)*h
    // choose (p_e - p_w)*h = -0.3 - 0.2 + ... solve directly instead:
    // r_u = a*u_P^n + (p_e-p_w)h; want R_u = -[0 + (b^n - b^{n-1}) + r_u]/a = 0.2
    // keep b^n = b^{n-1} by copying face pressures into prev
    cur.u[LOC_P] = 0.0;
    prev.u[LOC_P] = -0.3;
    cur.p[LOC_e] = -2.0;  // b = (p_e - p_w) h = -0.2
    prev.p[LOC_e] = -2.0;
    // now r_u = 0*a + (-0.2) = -0.2; b^n - b^{n-1} = 0; neighbours equal
    // R_u = -(-0.2)/1 = 0.2
    const CorrectionTerms R = correction_terms(cur, prev);
    CHECK(R.R_u == doctest::Approx(0.2));
    const RcPointValues e = rc_point(cur, prev, 0.9);
    CHECK(std::abs(e.e_u) == doctest::Approx(0.12));

    std::vector<StencilEvaluation> curs{cur}, prevs{prev};
    const RcLosses rc = rc_losses(curs, prevs, 0.9);
    CHECK(rc.rc_u == doctest::Approx(0.12));
}

TEST_CASE("extrapolation to the next iterate") {
    CHECK(extrapolate_next(2.0, 1.0) == doctest::Approx(3.0));
    CHECK(extrapolate_next(5.5, 5.5) == doctest::Approx(5.5));
    Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const double a = rng.uniform(-10, 10), d = rng.uniform(-5, 5);
        CHECK(extrapolate_next(a + d, a) == doctest::Approx(a + 2 * d).epsilon(1e-12));
    }
}

TEST_CASE("temperature correction direct substitution") {
    // r_T = 0.5, a_T = 2, alpha = 1, stationary otherwise -> RC_T = 0.25
    StencilEvaluation cur;
    cur.h = 0.1;
    cur.physics.thermal = true;
    // pick pr*ra so that a_T = 4*nu_T = 2 -> nu_T = 0.5 -> pr*ra = 4
    cur.physics.pr = 2.0;
    cur.physics.ra = 2.0;
    CHECK(diag_coefficient_energy(cur) == doctest::Approx(2.0));
    StencilEvaluation prev = cur;
    // r_T = a_T*T_P - nu_T*(sum NB) + conv + b_T; set T_P = 0.25 -> r_T = 0.5
    cur.T[LOC_P] = 0.25;
    prev.T[LOC_P] = 0.25;  // stationary: T^n - T^{n-1} = 0 at P
    // wait: T_P also enters r_T; keep it, R_T = -(0 + 0 + 0.5)/2 = -0.25
    const CorrectionTerms R = correction_terms(cur, prev);
    CHECK(R.R_T == doctest::Approx(-0.25));
    std::vector<StencilEvaluation> curs{cur}, prevs{prev};
    CHECK(temperature_correction(curs, prevs, 1.0) == doctest::Approx(0.25));
    const RcLosses rc = rc_losses(curs, prevs, 1.0);
    CHECK(rc.rc_T == doctest::Approx(0.25));
}

TEST_CASE("randomized corrections match the straight-line oracle") {
    Rng rng(31);
    double max_diff = 0.0;
    for (int rep = 0; rep < 2000; ++rep) {
        const bool unsteady = rep % 2 == 1;
        const bool thermal = rep % 3 == 0;
        StencilEvaluation cur = oracle::random_stencil(rng, unsteady, thermal);
        StencilEvaluation prev = oracle::random_stencil(rng, unsteady, thermal);
        prev.h = cur.h;
        prev.dt = cur.dt;
        prev.physics = cur.physics;
        prev.unsteady = cur.unsteady;
        const CorrectionTerms R = correction_terms(cur, prev);
        const oracle::Corrections Ro = oracle::corrections(cur, prev);
        max_diff = std::max(max_diff, std::abs(R.R_p - Ro.R_p));
        max_diff = std::max(max_diff, std::abs(R.R_u - Ro.R_u));
        max_diff = std::max(max_diff, std::abs(R.R_v - Ro.R_v));
        if (thermal) max_diff = std::max(max_diff, std::abs(R.R_T - Ro.R_T));

        const double alpha = 0.5 + 0.5 * rng.uniform();
        const RcPointValues e = rc_point(cur, prev, alpha);
        const oracle::RcValues eo = oracle::rc_values(cur, prev, alpha);
        max_diff = std::max(max_diff, std::abs(std::abs(e.e_p) - eo.rc_p));
        max_diff = std::max(max_diff, std::abs(std::abs(e.e_u) - eo.rc_u));
        max_diff = std::max(max_diff, std::abs(std::abs(e.e_v) - eo.rc_v));
        if (thermal) max_diff = std::max(max_diff, std::abs(std::abs(e.e_T) - eo.rc_T));
    }
    CHECK(max_diff <= 1e-12);
}

TEST_CASE("halving alpha changes RC_u exactly per the formula") {
    Rng rng(37);
    StencilEvaluation cur = oracle::random_stencil(rng, false, false);
    StencilEvaluation prev = oracle::random_stencil(rng, false, false);
    prev.h = cur.h;
    prev.physics = cur.physics;
    const CorrectionTerms R = correction_terms(cur, prev);
    const double du = cur.u[LOC_P] - prev.u[LOC_P];
    for (double alpha : {1.0, 0.5, 0.25}) {
        std::vector<StencilEvaluation> curs{cur}, prevs{prev};
        const RcLosses rc = rc_losses(curs, prevs, alpha);
        CHECK(rc.rc_u == doctest::Approx(std::abs(du - alpha * R.R_u)).epsilon(1e-13));
    }
}

TEST_CASE("R_u is linear in the difference tuple") {
    // scaling (du_NB, db, r_u) by c scales R_u by c: check via two states
    // whose differences scale exactly
    StencilEvaluation cur = steady_base(0.05, 50.0);
    StencilEvaluation prev = cur;
    Rng rng(41);
    for (int j = 0; j < 9; ++j) {
        cur.u[j] = rng.uniform(-1, 1);
        cur.p[j] = rng.uniform(-1, 1);
        prev.u[j] = cur.u[j];
        prev.p[j] = cur.p[j];
    }
    // construct prev' = cur - c*(cur - prev0) for a fixed difference field
    StencilEvaluation prev_half = cur;
    StencilEvaluation prev_full = cur;
    StencilEvaluation diff = steady_base(0.05, 50.0);
    for (int j = 0; j < 9; ++j) diff.u[j] = rng.uniform(-1, 1);
    for (int j = 0; j < 9; ++j) {
        prev_full.u[j] = cur.u[j] - diff.u[j];
        prev_half.u[j] = cur.u[j] - 0.5 * diff.u[j];
    }
    const double r_u = momentum_residual(cur, Component::U);
    const double Rfull = correction_terms(cur, prev_full).R_u + r_u / diag_coefficient(cur);
    const double Rhalf = correction_terms(cur, prev_half).R_u + r_u / diag_coefficient(cur);
    // with b and r_u contributions removed, the remainder is linear in du_NB
    CHECK(Rfull == doctest::Approx(2.0 * Rhalf).epsilon(1e-12));
}

TEST_CASE("unsteady corrections approach the steady variant as dt grows") {
    Rng rng(43);
    StencilEvaluation cur = oracle::random_stencil(rng, true, false);
    StencilEvaluation prev = oracle::random_stencil(rng, true, false);
    prev.h = cur.h;
    prev.physics = cur.physics;
    cur.dt = prev.dt = 1e12;

    StencilEvaluation cur_s = cur, prev_s = prev;
    cur_s.unsteady = prev_s.unsteady = false;

    const CorrectionTerms Ru = correction_terms(cur, prev);
    const CorrectionTerms Rs = correction_terms(cur_s, prev_s);
    CHECK(Ru.R_u == doctest::Approx(Rs.R_u).epsilon(1e-9));
    CHECK(Ru.R_v == doctest::Approx(Rs.R_v).epsilon(1e-9));
    CHECK(Ru.R_p == doctest::Approx(Rs.R_p).epsilon(1e-9));
}

TEST_CASE("empty batch raises the dedicated error") {
    std::vector<StencilEvaluation> none;
    CHECK_THROWS_AS(rc_losses(none, none, 0.9), EmptyBatchError);
    CHECK_THROWS_AS(temperature_correction(none, none, 0.9), EmptyBatchError);
}

TEST_CASE("invalid coefficients raise configuration errors") {
    StencilEvaluation q = steady_base();
    q.h = 0.0;
    CHECK_THROWS_AS(correction_terms(q, q), ConfigError);
}
