#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "msoc/model.hpp"
#include "msoc/scenario.hpp"
#include "test_support.hpp"

using namespace msoc;
using msoc_test::default_config;

TEST_CASE("scenario: minimal config is valid with defaults") {
    const std::string text =
        "[model]\n"
        "example_id = 1\n"
        "theta_a = 0\ntheta_b = 0\ntheta_c = 0\ntheta_d = 0\ntheta_e = 0\n"
        "sigma_x = 1\nsigma_y = 1\nalpha = 1\nbeta = 1\n"
        "epsilon_list = 0.4\n";
    const ScenarioConfig cfg = load_scenario(text);
    CHECK(cfg.example_id == 1);
    CHECK(cfg.n_slow == 65);
    CHECK(cfg.n_torus == 32);
    CHECK(cfg.d_y == 2);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("scenario: empty control box is rejected") {
    ScenarioConfig cfg = default_config();
    cfg.u_lo = 0.5;
    cfg.u_hi = 0.2;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("empty control box"), ScenarioError);
}

TEST_CASE("scenario: negative control with sqrt(u) diffusion is rejected") {
    ScenarioConfig cfg = default_config(2);
    cfg.u_lo = -1.0;
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         doctest::Contains("negative control with sqrt(u) diffusion"),
                         ScenarioError);
}

TEST_CASE("scenario: unknown keys are errors with line numbers") {
    CHECK_THROWS_AS(load_scenario("[model]\nexample_id = 1\nbogus = 3\n"), ScenarioError);
    CHECK_THROWS_AS(load_scenario("[nope]\n"), ScenarioError);
}

TEST_CASE("scenario: hash is stable under reserialization") {
    const ScenarioConfig cfg = default_config();
    const ScenarioConfig round = load_scenario(scenario_canonical_text(cfg));
    CHECK(scenario_hash(cfg) == scenario_hash(round));
}

TEST_CASE("model fields: semilinear example point values") {
    auto [slow, fast] = build_example(default_config(1));
    VectorXd y(2);
    y << 0.25, 0.25;
    // theta_a * x * sin(pi/2) * sin(pi/2) at x = 0.5
    CHECK(slow.mu_sf(0.5, y) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(slow.sigma_sf(0.5, y) == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(slow.mu_sc(0.5, 0.3) == doctest::Approx(-0.3).epsilon(1e-14));
    CHECK(slow.l_sc(0.5, 0.3) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(slow.h_minus == 0.1);
    CHECK(slow.h_plus == 0.1);
}

TEST_CASE("model fields: fast drift vanishes when theta_c * x = 0") {
    auto [slow1, fast1] = build_example(default_config(1));
    ScenarioConfig c0 = default_config(1);
    c0.theta_c = 0.0;
    auto [slow0, fast0] = build_example(c0);
    for (double y1 : {0.0, 0.3, 0.77}) {
        VectorXd y(2);
        y << y1, 1.0 - y1;
        CHECK(fast1.mu_y(0.0, y).norm() == 0.0);
        CHECK(fast0.mu_y(0.6, y).norm() == 0.0);
    }
}

TEST_CASE("model fields: fully nonlinear example degenerates at u = 0") {
    auto [slow, fast] = build_example(default_config(2));
    CHECK(slow.sigma_sc(0.7, 0.0) == 0.0);
    VectorXd y(2);
    y << 0.1, 0.9;
    CHECK(slow.sigma_sf(0.7, y) == 0.0);
    // sigma_sc carries the sigma_x factor: sigma_x * sqrt(u) * x
    CHECK(slow.sigma_sc(0.5, 0.49) == doctest::Approx(0.3 * 0.7 * 0.5).epsilon(1e-14));
}

TEST_CASE("constraint function values") {
    const double alpha = 1.0;
    auto [v_a, d_a] = constraint_phi(alpha, alpha);
    CHECK(v_a == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d_a == doctest::Approx(1.0).epsilon(1e-14));
    auto [v_ma, d_ma] = constraint_phi(-alpha, alpha);
    CHECK(v_ma == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d_ma == doctest::Approx(-1.0).epsilon(1e-14));
    auto [v_0, d_0] = constraint_phi(0.0, alpha);
    CHECK(v_0 == doctest::Approx(-(alpha / 2.0) * std::exp(alpha * alpha)).epsilon(1e-14));
    CHECK(d_0 == 0.0);
    auto [v_m, d_m] = constraint_phi(std::sqrt(1.0 + alpha * alpha), alpha);
    (void)v_m;
    CHECK(std::abs(d_m) <= 1e-14);
    // negative in the interior
    for (double x : {-0.9, -0.4, 0.2, 0.8})
        CHECK(constraint_phi(x, alpha).first < 0.0);
}

TEST_CASE("structure validation: semilinear diagonal passes everything") {
    auto [slow, fast] = build_example(default_config(1));
    const ValidationReport rep = validate_structure(slow, fast, 200, 7);
    CHECK(rep.all_passed());
    for (const auto& c : rep.checks)
        if (c.name.find("non-correlation") != std::string::npos)
            CHECK(c.worst_violation == 0.0);
}

TEST_CASE("structure validation: rank-one fast diffusion fails ellipticity") {
    ScenarioConfig cfg = default_config(1);
    cfg.fast_diffusion_structure = FastDiffusionStructure::rank_one;
    auto [slow, fast] = build_example(cfg);
    const ValidationReport rep = validate_structure(slow, fast, 200, 7);
    bool found = false;
    for (const auto& c : rep.checks)
        if (c.name.find("ellipticity") != std::string::npos) {
            found = true;
            CHECK_FALSE(c.passed);
        }
    CHECK(found);
    CHECK_FALSE(rep.all_passed());
}

TEST_CASE("structure validation: fully nonlinear example non-correlation residual is zero") {
    auto [slow, fast] = build_example(default_config(2));
    const ValidationReport rep = validate_structure(slow, fast, 200, 7);
    for (const auto& c : rep.checks)
        if (c.name.find("non-correlation") != std::string::npos) {
            CHECK(c.passed);
            CHECK(c.worst_violation == 0.0);
        }
}
