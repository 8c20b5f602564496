#pragma once

// Pointwise constitutive laws: degradation, hydrogen-dependent fracture
// energy, Langmuir-McLean coverage, plane-strain elasticity and the
// closed-form homogeneous 1D phase-field solution.

#include <Eigen/Core>

#include "hacfem/core.hpp"

namespace hacfem::physics {

using Voigt = Eigen::Vector3d; // (xx, yy, xy), engineering shear for strain

/// g(phi) = (1 - phi)^2 + k
double degradation(double phi, double k);

/// dg/dphi without the k term: -2 (1 - phi)
double degradation_derivative(double phi);

/// Gc(theta) = gc0 (1 - chi theta), floored at floor_fraction * gc0.
/// Throws ParameterError when theta leaves [0, 1] by more than 1e-9.
double gc_degraded(double theta, double gc0, double chi, double floor_fraction = 1e-4);

/// Same, with chi, gc0 and the floor taken from params.
double gc_degraded(double theta, const MaterialParams& params);

/// Exact dilute-mixture conversion from wt ppm to impurity mole fraction.
double wtppm_to_mole_fraction(double c_wtppm, double host_molar_mass,
                              double impurity_molar_mass);

/// Langmuir-McLean isotherm: theta = C / (C + exp(-dg / (R T))).
double surface_coverage(double c_mole_fraction, double delta_g, double gas_constant,
                        double temperature);

/// Coverage for a lattice concentration in wt ppm. Negative values (numerical
/// undershoot) are treated as zero.
double coverage_from_wtppm(double c_wtppm, const MaterialParams& params);

struct PlaneStrainElasticity {
    Eigen::Matrix3d c0;

    Voigt stress(const Voigt& strain) const { return c0 * strain; }
};

/// Plane-strain Voigt stiffness. Throws ParameterError unless E > 0 and
/// 0 <= nu < 0.5.
PlaneStrainElasticity plane_strain_stiffness(double young_modulus, double poisson_ratio);

/// psi_0 = 1/2 eps^T C0 eps
double strain_energy_density(const Voigt& strain, const PlaneStrainElasticity& stiffness);

/// Hydrostatic stress (sxx + syy + szz) / 3 with szz = nu (sxx + syy).
double hydrostatic_stress(const Voigt& stress, double poisson_ratio);

// Homogeneous 1D solution family.

double homogeneous_phi(double strain, double young_modulus, double gc, double ell);
double homogeneous_stress(double strain, double young_modulus, double gc, double ell);
double critical_stress(double young_modulus, double gc, double ell);
double critical_strain(double young_modulus, double gc, double ell);

/// Largest element size resolving a cohesive process zone with 20 elements:
/// (pi / 160) E Gc / sigma_c^2.
double cohesive_mesh_bound(double young_modulus, double gc, double sigma_c);

} // namespace hacfem::physics
