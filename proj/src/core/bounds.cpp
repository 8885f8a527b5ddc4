#include "core/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace bell::bounds {

namespace {

constexpr double kPi = std::numbers::pi;

// log(exp(la) + 2) without forming exp(la) when it would overflow.
double softlog2(double la) {
    if (la > 700.0) return la;
    return std::log(std::exp(la) + 2.0);
}

// exp(z), letting the result saturate to +inf for enormous z.
double safe_exp(double z) { return std::exp(z); }

} // namespace

void validate(const TailBoundParams& p) {
    if (p.parties < 2) throw DomainError("need at least 2 parties");
    if (p.local_dim < 2) throw DomainError("local dimension must be at least 2");
    if (p.settings < 1 || p.outcomes < 1)
        throw DomainError("settings and outcomes must be positive");
    if (!(p.coeff_cap > 0.0)) throw DomainError("coefficient cap must be positive");
    if (!(p.slack > 0.0)) throw DomainError("slack must be positive");
    if (!(p.threshold > p.slack + 1.0))
        throw DomainError("threshold must exceed slack + 1");
}

std::string to_string(TailVariant v) {
    switch (v) {
        case TailVariant::theorem: return "theorem";
        case TailVariant::appendix: return "appendix";
        case TailVariant::derived: return "derived";
    }
    throw InternalError("unknown variant");
}

TailVariant variant_from_string(std::string_view s) {
    if (s == "theorem") return TailVariant::theorem;
    if (s == "appendix") return TailVariant::appendix;
    if (s == "derived") return TailVariant::derived;
    throw InvalidArgument("unknown tail bound variant: " + std::string(s));
}

double lipschitz_state(int parties, int settings) {
    if (parties < 1 || settings < 1)
        throw InvalidArgument("parties and settings must be positive");
    return 2.0 * std::pow(2.0 * settings - 1.0, parties - 1);
}

ParamLipschitz lipschitz_param(int parties, int settings, int outcomes,
                               int local_dim, double coeff_cap) {
    if (parties < 1 || settings < 1 || outcomes < 1 || local_dim < 1)
        throw InvalidArgument("dimensions must be positive");
    if (coeff_cap < 0.0) throw InvalidArgument("coefficient cap must be nonnegative");
    ParamLipschitz out;
    const double N = parties;
    const double d2 = static_cast<double>(local_dim) * local_dim;
    const double mv = static_cast<double>(settings) * outcomes;
    const double mv_pow = std::pow(mv, N);
    out.lambda = 4.0 * N * coeff_cap * mv_pow * d2;
    out.log_lambda = (coeff_cap > 0.0)
                         ? std::log(4.0 * N * d2 * coeff_cap) + N * std::log(mv)
                         : -std::numeric_limits<double>::infinity();
    out.n = d2 * mv * N + mv_pow;
    out.n_exact = out.n < 9007199254740992.0;  // 2^53
    return out;
}

double loubenets_bound(int parties, int settings) {
    if (parties < 1 || settings < 1)
        throw InvalidArgument("parties and settings must be positive");
    return std::pow(2.0 * settings - 1.0, parties);
}

double levy_tail(double sphere_dim, double lip, double eps) {
    if (sphere_dim < 1.0) throw InvalidArgument("sphere dimension must be at least 1");
    if (!(lip > 0.0)) throw InvalidArgument("Lipschitz constant must be positive");
    if (eps < 0.0) throw InvalidArgument("deviation must be nonnegative");
    return std::log(2.0) -
           (sphere_dim + 1.0) * eps * eps / (9.0 * kPi * kPi * kPi * lip * lip);
}

double generic_tail_bound(double n, double lambda, double delta, double sphere_dim,
                          double lip, double threshold) {
    if (!(delta > 0.0) || !(lambda > 0.0))
        throw DomainError("lambda and delta must be positive");
    if (!(threshold > delta + 1.0))
        throw DomainError("threshold must exceed slack + 1");
    if (n < 0.0) throw DomainError("net dimension must be nonnegative");
    const double excess = threshold - delta - 1.0;
    return std::log(4.0) + n * std::log(2.0 * lambda / delta + 2.0) +
           levy_tail(sphere_dim, lip, excess) - std::log(2.0);
}

TailBoundResult theorem_bound(const TailBoundParams& p, TailVariant variant) {
    validate(p);
    TailBoundResult out;
    out.params = p;
    out.variant = variant;

    const double N = p.parties;
    const double d = p.local_dim;
    const double d2 = d * d;
    const double mv = static_cast<double>(p.settings) * p.outcomes;
    const double b = p.coeff_cap;
    const double delta = p.slack;
    const double excess = p.threshold - delta - 1.0;
    const double two_m1 = 2.0 * p.settings - 1.0;
    const double log4 = std::log(4.0);
    // 2 d^N / (2m-1)^(2N-2), assembled in log domain so neither power
    // overflows on its own
    const double ratio =
        2.0 * safe_exp(N * std::log(d) - (2.0 * N - 2.0) * std::log(two_m1));

    switch (variant) {
        case TailVariant::theorem: {
            const double exponent_count = mv * N * d2 + std::pow(mv, N);
            const double log_arg =
                std::log(8.0 * b * N * d2 / delta) + N * std::log(mv);
            const double net = exponent_count * softlog2(log_arg);
            const double conc = ratio * excess * excess / (36.0 * kPi * kPi);
            out.log_value = log4 + net - conc;
            out.terms = {net, -conc};
            break;
        }
        case TailVariant::appendix: {
            const double mv_pow = std::pow(mv, N);
            const double t1 = mv * N * N * d2 * std::log(mv);
            const double t2 = mv * N * d2 * std::log(16.0 * b * N * d2 / delta);
            const double t3 = mv_pow * std::log(16.0 * N * d2 / delta);
            const double t4 = N * mv_pow * std::log(b * mv);
            const double t5 = -excess * excess * two_m1 * two_m1 /
                              (18.0 * kPi * kPi) *
                              safe_exp(N * std::log(d / (two_m1 * two_m1)));
            out.log_value = log4 + t1 + t2 + t3 + t4 + t5;
            out.terms = {t1, t2, t3, t4, t5};
            break;
        }
        case TailVariant::derived: {
            ParamLipschitz pl =
                lipschitz_param(p.parties, p.settings, p.outcomes, p.local_dim, b);
            const double net =
                pl.n * softlog2(std::log(2.0 / delta) + pl.log_lambda);
            // 9 pi^3 lip^2 with lip = 2(2m-1)^(N-1); d^N folded into `ratio`
            const double conc = ratio * excess * excess / (36.0 * kPi * kPi * kPi);
            out.log_value = log4 + net - conc;
            out.terms = {net, -conc};
            break;
        }
    }
    return out;
}

bool regime_check(int local_dim, int settings, int outcomes) {
    if (local_dim < 1 || settings < 1 || outcomes < 1)
        throw InvalidArgument("dimensions must be positive");
    const double rhs = static_cast<double>(settings) * outcomes *
                       (2.0 * settings - 1.0) * (2.0 * settings - 1.0);
    return static_cast<double>(local_dim) > rhs;
}

} // namespace bell::bounds
