#pragma once

#include <functional>
#include <string>

namespace baesim::budget {

enum class Scheme { HomodyneConventional, HeterodyneBae };

Scheme scheme_from_string(const std::string& name);
std::string to_string(Scheme s);

/// On-resonance noise decomposition in mechanical quanta, referenced against
/// the standard quantum limit at the same detection efficiency.
struct NoiseBudget {
    double eta = 0.0;
    double coop = 0.0;
    double beta_heating = 0.0;
    Scheme scheme = Scheme::HeterodyneBae;

    double n_imp_het = 0.0;  // (8 eta C)^-1, heterodyne imprecision (image band)
    double n_imp_hom = 0.0;  // (16 eta C)^-1, homodyne imprecision
    double n_ba = 0.0;       // quantum backaction, = C
    double n_ba_th = 0.0;    // absorption-heating backaction, = beta C
    double n_add = 0.0;      // scheme total at this C
    double n_add_sql = 0.0;  // (4 eta)^-1/2
    double n_add_th = 0.0;   // sqrt(beta / 2 eta), heating-limited optimum
    double heisenberg_product = 0.0;  // 4 sqrt(n_imp_hom * n_ba)
    bool beats_sql = false;  // scheme optimum strictly below the SQL value
};

NoiseBudget build_budget(double eta, double coop, double beta_heating, Scheme scheme);

struct Optimum {
    double c_opt = 0.0;
    double n_add_min = 0.0;
    bool unbounded = false;  // BAE with beta = 0: imprecision vanishes as C grows
};

/// Closed-form minimizer of the scheme's added noise over cooperativity.
Optimum optimal_cooperativity(double eta, double beta_heating, Scheme scheme);

/// Scheme added noise as a function of C (the objective the optimum minimizes).
double added_noise(double eta, double beta_heating, Scheme scheme, double coop);

/// Golden-section minimizer used to cross-check the closed forms.
struct NumericMinimum {
    double x;
    double value;
};
NumericMinimum golden_section_minimize(const std::function<double(double)>& f,
                                       double lo, double hi, double rel_tol = 1e-12);

/// Numeric optimum of added_noise, for verification against optimal_cooperativity.
Optimum optimal_cooperativity_numeric(double eta, double beta_heating, Scheme scheme);

struct Advantage {
    double db = 0.0;
    double fraction = 0.0;
};

/// Noise reduction when `evaded` quanta are removed from `total` measured quanta.
Advantage bae_advantage(double total, double evaded);

/// Aligned plain-text report.
std::string format_budget(const NoiseBudget& b);
/// Single-row CSV with header.
std::string budget_csv(const NoiseBudget& b);

} // namespace baesim::budget
