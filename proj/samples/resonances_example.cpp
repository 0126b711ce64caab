// Resonances of a square well, computed from the Fredholm determinant and
// checked against the closed-form transfer-matrix zeros.

#include <cstdio>
#include <reslab/jost.hpp>
#include <reslab/asymptotics.hpp>

using namespace reslab;

int main() {
  const SquareWell well{-2.0, 1.0};
  const PotentialSpec v(well, "square_well");
  const ContourRegion region{0.0, 6.0, -3.0, -0.05};

  DeterminantOptions opt;
  opt.tol = 1e-10;
  const ResonanceSet fredholm = find_zeros(determinant_function(v, opt), region, 1e-10, {}, ZeroMethod::fredholm);
  const ResonanceSet oracle = transfer_matrix_resonances(well, region);

  std::printf("%zu resonances (winding %d)\n", fredholm.zeros.size(), fredholm.total_winding);
  std::printf("%22s %22s %10s\n", "Re k", "Im k", "|k - k*|");
  for (std::size_t i = 0; i < fredholm.zeros.size(); ++i) {
    const cplx k = fredholm.zeros[i].location;
    const double d = i < oracle.zeros.size() ? std::abs(k - oracle.zeros[i].location) : NAN;
    std::printf("%22.15f %22.15f %10.2e\n", k.real(), k.imag(), d);
  }
}
