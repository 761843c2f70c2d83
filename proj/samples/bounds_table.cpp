// Uniform-sampling probability and gate budget for a few active spaces, then
// the confident energy bound as the shot count grows.

#include <qsci/bounds.hpp>

#include <cstdio>

int main() {
  using namespace qsci;
  std::printf("%-10s %4s %4s %6s %12s %8s\n", "space", "n", "m", "F_2q", "P_u", "N_g_max");
  for (const auto& p : bound_presets())
    std::printf("%-10s %4zu %4zu %6.3f %12.4e %8llu\n", p.name.c_str(), p.n, p.m, p.f2q, uniform_probability(p.n, p.m),
                static_cast<unsigned long long>(gate_budget(p.f2q, p.n, p.m)));
  std::printf("%-10s %4d %4d %6.3f %12.4e %8llu\n", "cas10-10", 10, 10, 0.996, uniform_probability(10, 10),
              static_cast<unsigned long long>(gate_budget(0.996, 10, 10)));

  BoundInputs in;
  in.q_r = 0.95;
  in.lambda_h = 2.0;
  in.p = 0.2;
  in.r = 200;
  in.d = 1 << 20;
  std::printf("\nQ_R = %.2f, Lambda_H = %.1f, p = %.1f, R = %.0f\n", in.q_r, in.lambda_h, in.p, in.r);
  std::printf("%12s %10s %10s %14s\n", "shots", "eps_M", "Q_R_lower", "bound (Ha)");
  for (std::uint64_t m : {1000ull, 10000ull, 100000ull, 1000000ull, 100000000ull}) {
    in.shots = m;
    const auto b = evaluate_bounds(in);
    std::printf("%12llu %10.4f %10.4f %14.6f\n", static_cast<unsigned long long>(m), b.epsilon_m, b.q_r_lower,
                b.energy_bound_confident);
  }
  std::printf("truncation bound with exact Q_R: %.6f\n", truncation_bound(in.lambda_h, in.q_r));
}
