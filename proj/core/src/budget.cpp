#include "baesim/budget.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace baesim::budget {

Scheme scheme_from_string(const std::string& name) {
    if (name == "homodyne-conventional" || name == "conventional") return Scheme::HomodyneConventional;
    if (name == "heterodyne-bae" || name == "bae") return Scheme::HeterodyneBae;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string to_string(Scheme s) {
    return s == Scheme::HomodyneConventional ? "homodyne-conventional" : "heterodyne-bae";
}

static void check_inputs(double eta, double coop, double beta) {
    if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("budget: eta must be in (0, 1]");
    if (!(coop > 0)) throw std::invalid_argument("budget: C must be > 0");
    if (beta < 0) throw std::invalid_argument("budget: beta must be >= 0");
}

double added_noise(double eta, double beta_heating, Scheme scheme, double coop) {
    if (scheme == Scheme::HomodyneConventional)
        return 1.0 / (16.0 * eta * coop) + coop;
    return 1.0 / (8.0 * eta * coop) + beta_heating * coop;
}

NoiseBudget build_budget(double eta, double coop, double beta_heating, Scheme scheme) {
    check_inputs(eta, coop, beta_heating);
    NoiseBudget b;
    b.eta = eta;
    b.coop = coop;
    b.beta_heating = beta_heating;
    b.scheme = scheme;
    b.n_imp_het = 1.0 / (8.0 * eta * coop);
    b.n_imp_hom = 1.0 / (16.0 * eta * coop);
    b.n_ba = coop;
    b.n_ba_th = beta_heating * coop;
    b.n_add = added_noise(eta, beta_heating, scheme, coop);
    b.n_add_sql = 1.0 / std::sqrt(4.0 * eta);
    b.n_add_th = std::sqrt(beta_heating / (2.0 * eta));
    b.heisenberg_product = 4.0 * std::sqrt(b.n_imp_hom * b.n_ba);
    const auto opt = optimal_cooperativity(eta, beta_heating, scheme);
    b.beats_sql = opt.n_add_min < b.n_add_sql;
    return b;
}

Optimum optimal_cooperativity(double eta, double beta_heating, Scheme scheme) {
    if (!(eta > 0 && eta <= 1)) throw std::invalid_argument("budget: eta must be in (0, 1]");
    if (beta_heating < 0) throw std::invalid_argument("budget: beta must be >= 0");
    Optimum o;
    if (scheme == Scheme::HomodyneConventional) {
        o.c_opt = 1.0 / (4.0 * std::sqrt(eta));
        o.n_add_min = 1.0 / std::sqrt(4.0 * eta);
        return o;
    }
    if (beta_heating == 0.0) {
        // No heating penalty: imprecision can be pushed down without limit.
        o.c_opt = std::numeric_limits<double>::infinity();
        o.n_add_min = 0.0;
        o.unbounded = true;
        return o;
    }
    o.c_opt = 1.0 / std::sqrt(8.0 * eta * beta_heating);
    o.n_add_min = std::sqrt(beta_heating / (2.0 * eta));
    return o;
}

NumericMinimum golden_section_minimize(const std::function<double(double)>& f,
                                       double lo, double hi, double rel_tol) {
    if (!(lo > 0 && hi > lo)) throw std::invalid_argument("golden_section: need 0 < lo < hi");
    // Search in log space; the budget objectives are unimodal there.
    double a = std::log(lo), b = std::log(hi);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    while (b - a > rel_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(std::exp(d));
        }
    }
    const double x = std::exp(0.5 * (a + b));
    return {x, f(x)};
}

Optimum optimal_cooperativity_numeric(double eta, double beta_heating, Scheme scheme) {
    if (scheme == Scheme::HeterodyneBae && beta_heating == 0.0)
        return optimal_cooperativity(eta, beta_heating, scheme);
    const auto m = golden_section_minimize(
        [=](double c) { return added_noise(eta, beta_heating, scheme, c); }, 1e-8, 1e8);
    return {m.x, m.value, false};
}

Advantage bae_advantage(double total, double evaded) {
    if (!(total > 0) || evaded < 0 || evaded >= total)
        throw std::invalid_argument("bae_advantage: need 0 <= evaded < total");
    Advantage a;
    a.db = 10.0 * std::log10(total / (total - evaded));
    a.fraction = evaded / total;
    return a;
}

std::string format_budget(const NoiseBudget& b) {
    std::ostringstream os;
    char line[96];
    auto row = [&](const char* k, double v) {
        std::snprintf(line, sizeof line, "%-22s %14.6g\n", k, v);
        os << line;
    };
    os << "scheme                 " << to_string(b.scheme) << "\n";
    row("eta", b.eta);
    row("C", b.coop);
    row("beta_heating", b.beta_heating);
    row("n_imp_het", b.n_imp_het);
    row("n_imp_hom", b.n_imp_hom);
    row("n_ba", b.n_ba);
    row("n_ba_th", b.n_ba_th);
    row("n_add", b.n_add);
    row("n_add_sql", b.n_add_sql);
    row("n_add_th", b.n_add_th);
    row("heisenberg_product", b.heisenberg_product);
    os << "beats_sql              " << (b.beats_sql ? "yes" : "no") << "\n";
    return os.str();
}

std::string budget_csv(const NoiseBudget& b) {
    std::ostringstream os;
    os << "scheme,eta,C,beta_heating,n_imp_het,n_imp_hom,n_ba,n_ba_th,n_add,"
          "n_add_sql,n_add_th,heisenberg_product,beats_sql\n";
    os.precision(12);
    os << to_string(b.scheme) << ',' << b.eta << ',' << b.coop << ',' << b.beta_heating << ','
       << b.n_imp_het << ',' << b.n_imp_hom << ',' << b.n_ba << ',' << b.n_ba_th << ','
       << b.n_add << ',' << b.n_add_sql << ',' << b.n_add_th << ',' << b.heisenberg_product
       << ',' << (b.beats_sql ? 1 : 0) << "\n";
    return os.str();
}

} // namespace baesim::budget
