#pragma once

// Closed-form oracles and the drivers that compare the solver against them.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hacfem/scenario.hpp"

namespace hacfem::verify {

struct OracleReport {
    std::string name;
    double computed = 0.0;
    double reference = 0.0;
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Report with error = |computed - reference| / |reference| (absolute when
/// the reference is zero).
OracleReport compare(std::string name, double computed, double reference, double tolerance);
/// Report for a precomputed error measure against a bound.
OracleReport bound(std::string name, double error, double tolerance);

/// Gamma_l = int (phi^2 / (2 l) + l |grad phi|^2 / 2) dA divided by the
/// crack length (the strip height for a strip cut across).
double gamma_functional(const Mesh& mesh, const Eigen::VectorXd& phi, double ell, double crack_length = 1.0);

/// c_b erfc(x / (2 sqrt(D t))).
double diffusion_1d_oracle(double x, double t, double c_boundary, double diffusivity);

/// c_far exp(V_H sigma_h / (R T)).
double steady_enrichment_oracle(double sigma_h, double c_far, const MaterialParams& params);

/// Single element driven in uniaxial strain (nu is forced to 0 so the
/// constrained modulus equals E), lattice concentration held at `c_wtppm`.
struct HomogeneousRun {
    std::vector<double> strain;
    std::vector<double> stress;
    std::vector<IncrementRecord> records;
    double theta = 0.0;
    double gc = 0.0;
    double peak_strain = 0.0; // parabolic fit through the discrete maximum
    double peak_stress = 0.0;
    bool history_monotone = true;
    bool phi_monotone = true;
};

HomogeneousRun homogeneous_run(MaterialParams params, double c_wtppm, int steps, double max_strain_factor,
                               int staggered_passes = 50, double staggered_tol = 1e-8);

/// Largest relative deviation from the closed-form curve for strains up to
/// `strain_limit`.
double homogeneous_curve_error(const HomogeneousRun& run, const MaterialParams& params, double strain_limit);

/// Gamma_l of the exponential profile on a Quad8 strip over [-10 l, 10 l]
/// with element size h = l * h_over_ell.
double gamma_strip(double h_over_ell, double ell = 1.0);

/// Transient bar of length 1 mm with C = c_b at x = 0: max nodal error
/// divided by c_b at the time when 2 sqrt(D t) = 1/3.
double transient_bar_error(int elements, int steps, const MaterialParams& params = {});

/// Steady zero-flux bar with sigma_h rising linearly from 0 to sigma_max:
/// max relative nodal deviation from the enrichment law.
double stressed_bar_error(int elements, double sigma_max, const MaterialParams& params = {});

/// Relative Frobenius error between the analytic and the central-difference
/// Jacobian on a randomly distorted element.
double displacement_tangent_error(ElementKind kind, unsigned seed);
double phase_tangent_error(ElementKind kind, unsigned seed);

/// Linear displacement field imposed on the boundary of a distorted patch:
/// max error of the interior displacements and of the stress.
double patch_test_error(ElementKind kind);

/// Closed domain (zero flux) with a fixed non-uniform sigma_h: largest
/// relative change of the total hydrogen content over one step.
double closed_domain_mass_drift(int steps);

/// Runs the checks; "fast" keeps the refinement ladders short, "full"
/// adds the finer levels. Failures are reported, never thrown.
std::vector<OracleReport> run_verification_suite(std::string_view level);

std::string format_report_table(std::span<const OracleReport> reports);
std::string format_report_csv(std::span<const OracleReport> reports);

} // namespace hacfem::verify
