// Solves the ground-state Bethe equations for N = 8, eta = 1 and compares the
// energy with exact diagonalization and with the string formula.

#include <iomanip>
#include <iostream>

#include "xxztorus/bae.hpp"
#include "xxztorus/eigensolver.hpp"

int main() {
  const xxz::ModelParams p(8, 1.0);

  const xxz::SolveReport rep = xxz::solve(xxz::ground_string_seed(p));
  if (!rep.converged()) {
    std::cerr << "solve failed: " << xxz::to_string(rep.status) << '\n';
    return 1;
  }

  std::cout << std::setprecision(10);
  std::cout << "roots after " << rep.iterations << " Newton steps:\n";
  for (const auto& u : rep.root_set.roots()) {
    std::cout << "  " << u.real() << (u.imag() < 0 ? " - " : " + ") << std::abs(u.imag()) << "i\n";
  }

  const double e_bae = xxz::energy_from_roots(rep.root_set).value;
  const double e_ed = xxz::lowest_eigenvalues(p, 1).energies.front();
  std::cout << "E (Bethe roots)      " << e_bae << '\n'
            << "E (diagonalization)  " << e_ed << '\n'
            << "E (string formula)   " << xxz::ground_energy_formula(p) << '\n';
  return 0;
}
