#include <doctest.h>

#include <cmath>

#include "hacfem/verify.hpp"

using namespace hacfem;
using doctest::Approx;

TEST_CASE("diffusion oracle") {
    CHECK(verify::diffusion_1d_oracle(0.0, 1.0, 2.0, 1.0) == Approx(2.0));
    // x = 2 sqrt(D t): erfc(1)
    CHECK(verify::diffusion_1d_oracle(2.0, 1.0, 1.0, 1.0) == Approx(0.157299207050285).epsilon(1e-12));
}

TEST_CASE("steady enrichment oracle") {
    CHECK(verify::steady_enrichment_oracle(100.0, 1.0, default_iron_params()) ==
          Approx(1.08348861204038).epsilon(1e-12));
    CHECK(verify::steady_enrichment_oracle(0.0, 0.7, default_iron_params()) == Approx(0.7));
}

TEST_CASE("report helpers") {
    const auto r = verify::compare("x", 1.001, 1.0, 2e-3);
    CHECK(r.pass);
    CHECK(r.error == Approx(1e-3));
    CHECK_FALSE(verify::compare("x", 1.1, 1.0, 1e-3).pass);
    CHECK(verify::compare("zero", 1e-9, 0.0, 1e-8).pass);
    CHECK_FALSE(verify::bound("b", 2.0, 1.0).pass);
}

TEST_CASE("Gamma functional converges under refinement") {
    const double e5 = std::abs(verify::gamma_strip(0.2) - 1.0);
    const double e10 = std::abs(verify::gamma_strip(0.1) - 1.0);
    const double e20 = std::abs(verify::gamma_strip(0.05) - 1.0);
    CHECK(e10 < 0.02);
    CHECK(e5 > e10);
    CHECK(e10 > e20);
}

TEST_CASE("transport against its oracles") {
    CHECK(verify::transient_bar_error(100, 100) < 0.01);
    CHECK(verify::stressed_bar_error(40, 100.0) < 0.005);
}

TEST_CASE("fast suite passes and formats") {
    const auto reports = verify::run_verification_suite("fast");
    REQUIRE(!reports.empty());
    for (const auto& r : reports) {
        INFO(r.name);
        CHECK(r.pass);
    }
    const std::string csv = verify::format_report_csv(reports);
    CHECK(csv.rfind("name,computed,reference,error,tolerance,pass\n", 0) == 0);
    CHECK(verify::format_report_table(reports).find("PASS") != std::string::npos);
}
