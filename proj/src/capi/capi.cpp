#include "bellconc.h"

#include <cstring>
#include <sstream>
#include <string>

#include "core/catalog.hpp"
#include "core/montecarlo.hpp"
#include "core/nets.hpp"
#include "core/serial.hpp"

namespace {

using namespace bell;

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

bc_status fail(bc_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
bc_status wrap(Fn&& fn) {
    try {
        fn();
        return BC_OK;
    } catch (const InvalidArgument& e) {
        return fail(BC_ERR_INVALID_ARGUMENT, e.what());
    } catch (const ParseError& e) {
        return fail(BC_ERR_PARSE, e.what());
    } catch (const DomainError& e) {
        return fail(BC_ERR_DOMAIN, e.what());
    } catch (const TooLargeError& e) {
        return fail(BC_ERR_TOO_LARGE, e.what());
    } catch (const ConvergenceError& e) {
        return fail(BC_ERR_NO_CONVERGENCE, e.what());
    } catch (const std::exception& e) {
        return fail(BC_ERR_INTERNAL, e.what());
    }
}

void require_out(const void* p, const char* what) {
    if (!p) throw InvalidArgument(std::string(what) + " must not be null");
}

// Merged config view with typed getters; missing/garbled keys raise
// InvalidArgument naming the key.
class Cfg {
public:
    Cfg(const char* config_text, const char* overrides) {
        if (config_text) kv_ = serial::parse_config(config_text);
        if (overrides)
            for (auto& [k, v] : serial::parse_config(overrides)) kv_[k] = v;
    }

    const std::map<std::string, std::string>& raw() const { return kv_; }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string str(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end())
            throw InvalidArgument("missing required config key: " + key);
        return it->second;
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    long long integer(const std::string& key) const { return to_int(key, str(key)); }
    long long integer(const std::string& key, long long fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string v = str(key);
        try {
            std::size_t used = 0;
            const std::uint64_t out = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw InvalidArgument("config key '" + key + "' is not an unsigned integer: " + v);
        }
    }

    double number(const std::string& key) const { return to_double(key, str(key)); }
    double number(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = str(key);
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw InvalidArgument("config key '" + key + "' is not a boolean: " + v);
    }

private:
    static long long to_int(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const long long out = std::stoll(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw InvalidArgument("config key '" + key + "' is not an integer: " + v);
        }
    }
    static double to_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw InvalidArgument("config key '" + key + "' is not a number: " + v);
        }
    }

    std::map<std::string, std::string> kv_;
};

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t b = item.find_first_not_of(" \t");
        std::size_t e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    if (out.empty()) throw InvalidArgument("functionals list is empty");
    return out;
}

BellFunctional load_normalized(const std::string& name, int parties) {
    if (name == "chsh" && parties != 2) {
        BellFunctional T = catalog::embedded_chsh(parties);
        return lhv::normalize(T);
    }
    catalog::CatalogEntry entry = catalog::get(name);
    if (entry.scenario.parties != parties)
        throw InvalidArgument("catalog entry '" + name + "' is for " +
                              std::to_string(entry.scenario.parties) +
                              " parties, config says " + std::to_string(parties));
    lhv::ensure_bounds(entry.raw);
    return lhv::normalize(entry.raw);
}

} // namespace

extern "C" {

const char* bc_version(void) { return "0.1.0"; }
int bc_artifact_version(void) { return 1; }

const char* bc_last_error(void) { return g_last_error.c_str(); }

void bc_string_free(char* s) { delete[] s; }

struct bc_functional {
    BellFunctional value;
};

bc_status bc_functional_from_json(const char* json_text, bc_functional** out) {
    return wrap([&] {
        require_out(json_text, "json_text");
        require_out(out, "out");
        *out = new bc_functional{serial::functional_from_json(json_text)};
    });
}

bc_status bc_functional_from_catalog(const char* name, bc_functional** out) {
    return wrap([&] {
        require_out(name, "name");
        require_out(out, "out");
        *out = new bc_functional{catalog::get(name).raw};
    });
}

void bc_functional_free(bc_functional* f) { delete f; }

bc_status bc_functional_to_json(const bc_functional* f, char** out_json) {
    return wrap([&] {
        require_out(f, "f");
        require_out(out_json, "out_json");
        *out_json = dup_string(serial::functional_to_json(f->value));
    });
}

bc_status bc_functional_classical_bounds(bc_functional* f, double* lower,
                                         double* upper) {
    return wrap([&] {
        require_out(f, "f");
        require_out(lower, "lower");
        require_out(upper, "upper");
        const auto [lo, hi] = lhv::ensure_bounds(f->value);
        *lower = lo;
        *upper = hi;
    });
}

bc_status bc_functional_normalized(const bc_functional* f, bc_functional** out) {
    return wrap([&] {
        require_out(f, "f");
        require_out(out, "out");
        BellFunctional copy = f->value;
        lhv::ensure_bounds(copy);
        *out = new bc_functional{lhv::normalize(copy)};
    });
}

bc_status bc_functional_positivized(const bc_functional* f, bc_functional** out) {
    return wrap([&] {
        require_out(f, "f");
        require_out(out, "out");
        BellFunctional copy = f->value;
        lhv::ensure_bounds(copy);
        *out = new bc_functional{lhv::positivize(lhv::normalize(copy))};
    });
}

bc_status bc_catalog_names(char** out_json) {
    return wrap([&] {
        require_out(out_json, "out_json");
        std::string s = "[";
        const auto& names = catalog::names();
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) s += ',';
            s += '"';
            s += serial::escape_json(names[i]);
            s += '"';
        }
        s += ']';
        *out_json = dup_string(s);
    });
}

bc_status bc_config_echo(const char* config_text, const char* overrides,
                         char** out_json) {
    return wrap([&] {
        require_out(out_json, "out_json");
        const Cfg cfg(config_text, overrides);
        std::string s = "{";
        bool first = true;
        for (const auto& [k, v] : cfg.raw()) {
            if (!first) s += ',';
            first = false;
            s += '"';
            s += serial::escape_json(k);
            s += "\":\"";
            s += serial::escape_json(v);
            s += '"';
        }
        s += '}';
        *out_json = dup_string(s);
    });
}

bc_status bc_bound_eval(const char* config_text, const char* overrides,
                        char** out_json) {
    return wrap([&] {
        require_out(out_json, "out_json");
        const Cfg cfg(config_text, overrides);
        bounds::TailBoundParams p;
        p.parties = static_cast<int>(cfg.integer("N"));
        p.settings = static_cast<int>(cfg.integer("m"));
        p.outcomes = static_cast<int>(cfg.integer("v"));
        p.local_dim = static_cast<int>(cfg.integer("d"));
        p.coeff_cap = cfg.number("b", 1.0);
        p.threshold = cfg.number("c");
        p.slack = cfg.number("delta");
        bounds::validate(p);
        const auto variant = bounds::variant_from_string(cfg.str("variant", "theorem"));
        *out_json = dup_string(serial::bound_record(bounds::theorem_bound(p, variant)));
    });
}

bc_status bc_tail_run(const char* config_text, const char* overrides,
                      char** out_jsonl) {
    return wrap([&] {
        require_out(out_jsonl, "out_jsonl");
        const Cfg cfg(config_text, overrides);
        mc::ExperimentConfig ec;
        ec.scenario = Scenario(static_cast<int>(cfg.integer("N", 2)),
                               static_cast<int>(cfg.integer("m", 2)),
                               static_cast<int>(cfg.integer("v", 2)));
        ec.local_dim = static_cast<int>(cfg.integer("d", 2));
        ec.functional_names = split_names(cfg.str("functionals", "chsh"));
        ec.threshold = cfg.number("c");
        ec.samples = static_cast<int>(cfg.integer("samples"));
        ec.restarts = static_cast<int>(cfg.integer("restarts", 20));
        ec.seesaw_iters = static_cast<int>(cfg.integer("seesaw_iters", 200));
        ec.seed = cfg.uinteger("seed", 0);
        ec.workers = static_cast<int>(cfg.integer("workers", 0));
        const std::string sampler = cfg.str("sampler", "gram");
        if (sampler == "gram")
            ec.sampler = quantum::PovmSampler::gram;
        else if (sampler == "projective")
            ec.sampler = quantum::PovmSampler::projective;
        else
            throw InvalidArgument("sampler must be gram or projective, got " + sampler);
        ec.lp_refine = cfg.flag("lp_refine", false);
        ec.lp_cap = cfg.number("lp_cap", 1.0);
        mc::validate(ec);
        const mc::TailEstimate est = mc::tail_experiment(ec);
        std::string out;
        for (const auto& s : est.samples) {
            out += serial::tail_sample_record(s);
            out += '\n';
        }
        out += serial::tail_summary_record(est);
        out += '\n';
        *out_jsonl = dup_string(out);
    });
}

bc_status bc_concentration_run(const char* config_text, const char* overrides,
                               char** out_record_json, char** out_curve_csv) {
    return wrap([&] {
        require_out(out_record_json, "out_record_json");
        require_out(out_curve_csv, "out_curve_csv");
        const Cfg cfg(config_text, overrides);
        const int parties = static_cast<int>(cfg.integer("parties", 2));
        const int d = static_cast<int>(cfg.integer("d", 2));
        const std::uint64_t seed = cfg.uinteger("seed", 0);
        const BellFunctional T = load_normalized(cfg.str("functional", "chsh"), parties);
        Rng rng(derive_seed(seed, 0xC0FFEEull));
        const quantum::Assemblage A =
            quantum::random_assemblage(T.scenario, d, rng, quantum::PovmSampler::gram);
        const mc::ConcentrationRecord rec = mc::concentration_experiment(
            T, A, static_cast<int>(cfg.integer("samples")), seed,
            static_cast<int>(cfg.integer("workers", 0)));
        *out_record_json = dup_string(serial::concentration_record(rec));
        *out_curve_csv = dup_string(serial::concentration_curve_csv(rec));
    });
}

bc_status bc_net_demo(const char* config_text, const char* overrides,
                      char** out_json) {
    return wrap([&] {
        require_out(out_json, "out_json");
        const Cfg cfg(config_text, overrides);
        const int n = static_cast<int>(cfg.integer("n"));
        const double eps = cfg.number("epsilon");
        const long long probes = cfg.integer("probes", 1000);
        if (probes < 0) throw InvalidArgument("probes must be nonnegative");
        const nets::HypercubeNet net = nets::full_grid_net(n, eps);
        Rng rng(derive_seed(cfg.uinteger("seed", 0), 0x9E7ull));
        double worst = 0.0;
        std::vector<double> probe(static_cast<std::size_t>(n));
        for (long long i = 0; i < probes; ++i) {
            for (auto& c : probe) c = rng.uniform(-1.0, 1.0);
            worst = std::max(worst, nets::covering_distance(net, probe));
        }
        // Grid cell centers are within eps/2 of every point of the cube.
        const bool ok = worst <= eps / 2 + cfg.number("tol", 1e-12);
        std::string s = "{\"n\":" + std::to_string(n) + ",\"epsilon\":";
        s += serial::format_double(eps);
        s += ",\"l\":" + std::to_string(net.grid_resolution);
        s += ",\"size\":" + std::to_string(net.points.size());
        s += ",\"log_size_bound\":";
        s += serial::format_double(nets::net_size_bound(n, eps));
        s += ",\"probe_count\":" + std::to_string(probes);
        s += ",\"max_covering_distance\":";
        s += serial::format_double(worst);
        s += ",\"covering_ok\":";
        s += ok ? "true" : "false";
        s += '}';
        if (!ok) throw InternalError("grid net failed its covering check: " + s);
        *out_json = dup_string(s);
    });
}

bc_status bc_verify(unsigned long long seed, int corrupt, int* ok,
                    char** out_report) {
    return wrap([&] {
        require_out(ok, "ok");
        require_out(out_report, "out_report");
        bool all_ok = true;
        std::string report;
        auto line = [&](bool passed, const std::string& text) {
            report += passed ? "ok   " : "FAIL ";
            report += text;
            report += '\n';
            all_ok = all_ok && passed;
        };

        const catalog::Report cat = catalog::verify_catalog();
        for (const auto& c : cat.checks)
            line(c.ok, "catalog " + c.name + ": bounds (" +
                           serial::format_double(c.lower) + ", " +
                           serial::format_double(c.upper) + ")" +
                           (c.ok ? "" : " — " + c.message));

        if (corrupt) {
            // Deliberately broken entry; overall verification must fail, which
            // exercises the checker's failure path end to end.
            catalog::CatalogEntry bad = catalog::get("chsh");
            bad.raw.coeffs[0] += 1e-3;
            const catalog::EntryCheck check = catalog::verify_entry(bad);
            line(check.ok, "catalog chsh (corruption fixture)" +
                               (check.ok ? std::string(": escaped detection")
                                         : " — " + check.message));
        }

        // Invariant smoke checks.
        {
            const Scenario sc(2, 2, 2);
            const Behaviour u = uniform_behaviour(sc);
            bool passed = true;
            std::string msg = "uniform behaviour valid and nonsignalling";
            try {
                validate_behaviour(u);
                if (!check_nonsignalling(u).nonsignalling) {
                    passed = false;
                    msg += " — signalling detected";
                }
            } catch (const std::exception& e) {
                passed = false;
                msg += std::string(" — ") + e.what();
            }
            line(passed, msg);
        }
        {
            const quantum::PureState phi = quantum::bell_phi_plus();
            const quantum::Assemblage A = quantum::chsh_optimal_assemblage();
            BellFunctional chsh = catalog::get("chsh").raw;
            const double q =
                evaluate_functional(chsh, quantum::behaviour_of(phi, A));
            const double expect = 2.0 * std::sqrt(2.0);
            line(std::abs(q - expect) < 1e-9,
                 "chsh optimal configuration reaches " + serial::format_double(q));
        }

        // Measurement-norm spot check: normalized functionals against the
        // (2m-1)^N ceiling on random measurements.
        {
            const Scenario sc(2, 2, 2);
            const double cap = bounds::loubenets_bound(2, 2);
            bool passed = true;
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                Rng rng(derive_seed(seed, 0x10ull + static_cast<std::uint64_t>(i)));
                std::vector<double> coeffs(sc.behaviour_size());
                for (auto& c : coeffs) c = rng.uniform(-1.0, 1.0);
                BellFunctional T(sc, std::move(coeffs));
                lhv::ensure_bounds(T);
                T = lhv::normalize(T);
                const quantum::Assemblage A =
                    quantum::random_assemblage(sc, 2, rng, quantum::PovmSampler::gram);
                const double norm = quantum::operator_norm(T, A, 1e-8);
                worst = std::max(worst, norm);
                if (norm > cap + 1e-6) passed = false;
            }
            line(passed, "measurement norm cap " + serial::format_double(cap) +
                             " respected on 20 random functionals (max " +
                             serial::format_double(worst) + ")");
        }

        *ok = all_ok ? 1 : 0;
        *out_report = dup_string(report);
    });
}

} /* extern "C" */
