#include "hacfem/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hacfem::physics {

double degradation(double phi, double k) {
    const double a = 1.0 - phi;
    return a * a + k;
}

double degradation_derivative(double phi) {
    return -2.0 * (1.0 - phi);
}

double gc_degraded(double theta, double gc0, double chi, double floor_fraction) {
    constexpr double tol = 1e-9;
    if (!(theta >= -tol && theta <= 1.0 + tol)) {
        std::ostringstream msg;
        msg << "hydrogen coverage " << theta << " outside [0, 1]";
        throw ParameterError(msg.str());
    }
    const double t = std::clamp(theta, 0.0, 1.0);
    return std::max(gc0 * (1.0 - chi * t), floor_fraction * gc0);
}

double gc_degraded(double theta, const MaterialParams& params) {
    return gc_degraded(theta, params.gc0, params.damage_coeff, params.gc_floor_fraction);
}

double wtppm_to_mole_fraction(double c_wtppm, double host_molar_mass,
                              double impurity_molar_mass) {
    const double w = c_wtppm * 1e-6; // mass fraction of impurity
    const double n_imp = w / impurity_molar_mass;
    const double n_host = (1.0 - w) / host_molar_mass;
    const double total = n_imp + n_host;
    return total > 0.0 ? n_imp / total : 0.0;
}

double surface_coverage(double c_mole_fraction, double delta_g, double gas_constant,
                        double temperature) {
    const double b = std::exp(-delta_g / (gas_constant * temperature));
    const double c = std::max(c_mole_fraction, 0.0);
    return c / (c + b);
}

double coverage_from_wtppm(double c_wtppm, const MaterialParams& params) {
    const double x = wtppm_to_mole_fraction(std::max(c_wtppm, 0.0), params.host_molar_mass,
                                            params.impurity_molar_mass);
    return surface_coverage(x, params.binding_energy, params.gas_constant, params.temperature);
}

PlaneStrainElasticity plane_strain_stiffness(double young_modulus, double poisson_ratio) {
    if (!(young_modulus > 0.0)) {
        throw ParameterError("plane_strain_stiffness: young_modulus must be > 0");
    }
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) {
        throw ParameterError("plane_strain_stiffness: poisson_ratio must lie in [0, 0.5)");
    }
    const double e = young_modulus;
    const double nu = poisson_ratio;
    const double f = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
    PlaneStrainElasticity s;
    s.c0 << f * (1.0 - nu), f * nu, 0.0,
            f * nu, f * (1.0 - nu), 0.0,
            0.0, 0.0, e / (2.0 * (1.0 + nu));
    return s;
}

double strain_energy_density(const Voigt& strain, const PlaneStrainElasticity& stiffness) {
    return 0.5 * strain.dot(stiffness.c0 * strain);
}

double hydrostatic_stress(const Voigt& stress, double poisson_ratio) {
    const double in_plane = stress(0) + stress(1);
    return (1.0 + poisson_ratio) * in_plane / 3.0;
}

double homogeneous_phi(double strain, double young_modulus, double gc, double ell) {
    const double drive = young_modulus * strain * strain * ell;
    return drive / (gc + drive);
}

double homogeneous_stress(double strain, double young_modulus, double gc, double ell) {
    const double ratio = gc / (gc + young_modulus * strain * strain * ell);
    return ratio * ratio * young_modulus * strain;
}

double critical_stress(double young_modulus, double gc, double ell) {
    return std::sqrt(27.0 * young_modulus * gc / (256.0 * ell));
}

double critical_strain(double young_modulus, double gc, double ell) {
    return std::sqrt(gc / (3.0 * ell * young_modulus));
}

double cohesive_mesh_bound(double young_modulus, double gc, double sigma_c) {
    return std::numbers::pi / 160.0 * young_modulus * gc / (sigma_c * sigma_c);
}

} // namespace hacfem::physics
