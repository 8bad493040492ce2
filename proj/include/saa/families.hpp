#pragma once

#include <memory>
#include <string>
#include <vector>

#include "saa/valid.hpp"

namespace saa {

// Built-in validation families, each with a closed-form oracle:
//   scenario-free     f = (x - 0.3)^2 on [0, 1], fixed set, event near-optimal
//   quadratic-1d      F = (x - 0.3)^2 + xi x, xi ~ t(3), fixed set, event near-optimal
//   disc-exterior     Y = [-1, 1]^2, F_1 = |x|^2 - 0.25 + <xi, x>, xi_k ~ 0.5 t(3),
//                     exterior theorem, event X_hat ⊆ X_{2eps}
//   disc-interior     same program, interior theorem (eps_ring = 0.25), event X_hat ⊆ X
// sigma is a declared population version of each theorem's aggregate (see
// sigma_note); the calibrated C absorbs the remaining constants.
std::vector<std::string> family_names();
CoverageFamily family_by_name(const std::string& name);

// F(x, xi) = <xi, x> on the standard simplex in R^d (l1 norm), xi_k iid from
// `law`; oracle mean <E xi, x>, variance Var(xi) |x|_2^2, modulus declared
// as sqrt(E max_{a,b} |xi_a - xi_b|^2 / 4) estimated by `modulus_budget` draws.
std::shared_ptr<const StochasticProgram> simplex_linear_program(std::size_t d, Distribution law,
                                                                std::size_t modulus_budget = 200000,
                                                                std::uint64_t modulus_seed = 1);

}  // namespace saa
