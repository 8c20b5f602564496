#include "hacfem/core.hpp"

#include <cmath>

namespace hacfem {

namespace {

void require(bool ok, const char* what) {
    if (!ok) {
        throw ParameterError(std::string("invalid material parameter: ") + what);
    }
}

} // namespace

void MaterialParams::validate() const {
    require(std::isfinite(young_modulus) && young_modulus > 0.0, "young_modulus must be > 0");
    require(poisson_ratio >= 0.0 && poisson_ratio < 0.5, "poisson_ratio must lie in [0, 0.5)");
    require(std::isfinite(gc0) && gc0 > 0.0, "gc0 must be > 0");
    require(std::isfinite(length_scale) && length_scale > 0.0, "length_scale must be > 0");
    require(stiffness_floor > 0.0 && stiffness_floor < 1e-2, "stiffness_floor must lie in (0, 1e-2)");
    require(damage_coeff >= 0.0 && damage_coeff <= 1.0, "damage_coeff must lie in [0, 1]");
    require(diffusivity >= 0.0, "diffusivity must be >= 0");
    require(molar_volume >= 0.0, "molar_volume must be >= 0");
    require(temperature > 0.0, "temperature must be > 0");
    require(gas_constant == kGasConstant, "gas_constant is fixed at 8314 N*mm/(mol*K)");
    require(host_molar_mass > 0.0, "host_molar_mass must be > 0");
    require(impurity_molar_mass > 0.0, "impurity_molar_mass must be > 0");
    require(gc_floor_fraction > 0.0 && gc_floor_fraction < 1.0, "gc_floor_fraction must lie in (0, 1)");
}

MaterialParams default_iron_params() {
    return MaterialParams{};
}

double drift_exponent(const MaterialParams& params, double sigma_h) {
    return params.molar_volume * sigma_h / (params.gas_constant * params.temperature);
}

FieldState FieldState::zeros(std::size_t num_nodes, std::size_t num_gauss_points) {
    FieldState s;
    const auto n = static_cast<Eigen::Index>(num_nodes);
    s.displacement = Eigen::VectorXd::Zero(2 * n);
    s.phase = Eigen::VectorXd::Zero(n);
    s.concentration = Eigen::VectorXd::Zero(n);
    s.sigma_h_nodal = Eigen::VectorXd::Zero(n);
    s.history.assign(num_gauss_points, 0.0);
    return s;
}

} // namespace hacfem
