// Stability limits and rho for KRK and RKR on the scalar model problem.
#include <cstdio>

#include <splithmc/model_analysis.hpp>

int main() {
    using namespace splithmc::model;
    std::printf("%8s %12s %12s %12s %12s\n", "kappa", "eps*(KRK)", "eps*(KDK)", "rho_KRK(.5)", "rho_RKR(.5)");
    for (double kappa : {-0.5, 0.1, 0.5, 1.0, 10.0}) {
        const double e = 0.5;
        std::printf("%8.2f %12.6f %12.6f %12.3e %12.3e\n", kappa, stability_limit(Scheme::krk, kappa),
                    stability_limit(Scheme::kdk, kappa), rho(Scheme::krk, e, kappa), rho(Scheme::rkr, e, kappa));
    }
    const auto c = counterexample_2d(0.05, 30, 0.01, 1.0, 1e-6, Scheme::kdk);
    std::printf("Verlet, eps = 0.05, sigma = (0.01, 1): component 1 %s, component 2 %s\n",
                stability_name(c.components[0].verdict.cls).c_str(), stability_name(c.components[1].verdict.cls).c_str());
}
