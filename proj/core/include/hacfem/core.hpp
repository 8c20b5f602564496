#pragma once

// Material parameters, unit conventions and solution-state containers.
//
// Units throughout the library: N, mm, MPa (N/mm^2), mol, s, K.
// Gc in N/mm equals kJ/m^2 numerically. Concentrations are wt ppm.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hacfem {

/// Universal gas constant in N*mm/(mol*K).
inline constexpr double kGasConstant = 8314.0;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent mesh (connectivity, Jacobian, missing sets).
class MeshError : public Error {
public:
    using Error::Error;
};

/// Bad physical input (parameter out of range).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Sub-problem nonconvergence, singular systems, concentration undershoot.
class SolverError : public Error {
public:
    using Error::Error;
};

struct MaterialParams {
    double young_modulus = 210000.0;    // MPa
    double poisson_ratio = 0.3;
    double gc0 = 2.7;                   // N/mm
    double length_scale = 0.0075;       // mm
    double stiffness_floor = 1e-7;      // k in g(phi) = (1-phi)^2 + k
    double damage_coeff = 0.89;         // chi
    double diffusivity = 3.8e-5;        // mm^2/s
    double molar_volume = 2000.0;       // mm^3/mol
    double binding_energy = 3.0e7;      // N*mm/mol (30 kJ/mol)
    double temperature = 300.0;         // K
    double gas_constant = kGasConstant; // N*mm/(mol*K)
    double host_molar_mass = 55.85;     // g/mol
    double impurity_molar_mass = 1.008; // g/mol
    /// Gc(theta) is clamped below at gc_floor_fraction * gc0.
    double gc_floor_fraction = 1e-4;

    /// Throws ParameterError naming the first violated bound.
    void validate() const;

    bool operator==(const MaterialParams&) const = default;
};

/// Iron-based steel: the parameter set of the cracked-plate benchmark.
MaterialParams default_iron_params();

/// Dimensionless stress-assisted drift exponent V_H * sigma_h / (R T).
double drift_exponent(const MaterialParams& params, double sigma_h);

/// Nodal fields plus per-Gauss-point history.
///
/// Displacements are interleaved (ux0, uy0, ux1, uy1, ...). The history
/// vector is indexed element-major: element e, point g -> e * n_gauss + g.
struct FieldState {
    Eigen::VectorXd displacement;
    Eigen::VectorXd phase;
    Eigen::VectorXd concentration;
    Eigen::VectorXd sigma_h_nodal;
    std::vector<double> history;
    double time = 0.0;

    static FieldState zeros(std::size_t num_nodes, std::size_t num_gauss_points);

    std::size_t num_nodes() const { return static_cast<std::size_t>(phase.size()); }
};

} // namespace hacfem
