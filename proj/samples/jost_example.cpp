// Jost corrections and the T-matrix for a unit Gaussian along the negative
// imaginary axis, where T11 tends to the integral of V.

#include <cstdio>
#include <reslab/jost.hpp>

using namespace reslab;

int main() {
  const PotentialSpec g(Gaussian{1.0, 1.0, 0.0}, "gaussian");
  std::printf("%8s %14s %14s %14s %14s\n", "Im k", "|k| sup|f+|", "|k| sup|f-|", "|T11-sqrt(pi)|", "|E/(D/D) - 1|");
  for (double s : {2.0, 4.0, 8.0, 12.0}) {
    const cplx k(0.0, -s);
    const JostCorrection fp = solve_correction(g, k, Side::plus);
    const JostCorrection fm = solve_correction(g, k, Side::minus);
    const TMatrix t = t_matrix(g, k);
    const cplx ratio = scattering_det(g, k);  // grows like e^{2|k|^2} down this axis
    const double gap = std::abs(e_det_2x2(t) / ratio - 1.0);
    std::printf("%8.1f %14.6f %14.6f %14.3e %14.3e\n", -s, s * fp.sup_norm, s * fm.sup_norm,
                std::abs(t.T11 - std::sqrt(pi)), gap);
  }
}
