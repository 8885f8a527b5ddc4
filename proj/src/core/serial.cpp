#include "core/serial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace bell::serial {

namespace {

using nlohmann::json;

void append_double(std::string& out, double x) { out += format_double(x); }

void append_string(std::string& out, std::string_view s) {
    out += '"';
    out += escape_json(s);
    out += '"';
}

void append_int_array(std::string& out, const std::vector<int>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    out += ']';
}

void append_scenario(std::string& out, const Scenario& sc) {
    out += "{\"N\":" + std::to_string(sc.parties) +
           ",\"m\":" + std::to_string(sc.settings) +
           ",\"v\":" + std::to_string(sc.outcomes) + "}";
}

Scenario scenario_from(const json& j) {
    if (!j.is_object()) throw ParseError("scenario must be an object");
    return Scenario(j.at("N").get<int>(), j.at("m").get<int>(), j.at("v").get<int>());
}

std::vector<int> int_array(const json& j, std::size_t expect, const char* what) {
    if (!j.is_array() || j.size() != expect)
        throw ParseError(std::string(what) + " must be an array of length " +
                         std::to_string(expect));
    std::vector<int> out;
    out.reserve(expect);
    for (const auto& e : j) out.push_back(e.get<int>());
    return out;
}

void append_entries(std::string& out, const Scenario& sc,
                    const std::vector<double>& values, bool keep_zeros) {
    const std::size_t blocks = sc.setting_blocks();
    std::vector<int> as(static_cast<std::size_t>(sc.parties));
    std::vector<int> xs(static_cast<std::size_t>(sc.parties));
    out += '[';
    bool first = true;
    for (std::size_t e = 0; e < values.size(); ++e) {
        if (!keep_zeros && values[e] == 0.0) continue;
        if (!first) out += ',';
        first = false;
        decode_outcome_tuple(sc, e / blocks, as);
        decode_setting_tuple(sc, e % blocks, xs);
        out += "{\"a\":";
        append_int_array(out, as);
        out += ",\"x\":";
        append_int_array(out, xs);
        out += ",\"value\":";
        append_double(out, values[e]);
        out += '}';
    }
    out += ']';
}

// fills `values`; returns how many entries were present
std::size_t read_entries(const json& j, const Scenario& sc,
                         std::vector<double>& values) {
    if (!j.is_array()) throw ParseError("entries must be an array");
    values.assign(sc.behaviour_size(), 0.0);
    std::vector<bool> seen(values.size(), false);
    for (const auto& entry : j) {
        const auto a =
            int_array(entry.at("a"), static_cast<std::size_t>(sc.parties), "a");
        const auto x =
            int_array(entry.at("x"), static_cast<std::size_t>(sc.parties), "x");
        const std::size_t idx = flat_index(sc, a, x);
        if (seen[idx]) throw ParseError("duplicate entry in list");
        seen[idx] = true;
        values[idx] = entry.at("value").get<double>();
    }
    return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
}

void append_provenance(std::string& out, const Provenance& prov) {
    out += "{\"scale\":";
    append_double(out, prov.scale);
    if (prov.theta) {
        out += ",\"theta\":";
        append_double(out, *prov.theta);
    }
    out += ",\"substituted\":[";
    for (std::size_t i = 0; i < prov.substituted.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(prov.substituted[i]);
    }
    out += "],\"negated\":";
    out += prov.negated ? "true" : "false";
    if (!prov.note.empty()) {
        out += ",\"note\":";
        append_string(out, prov.note);
    }
    out += '}';
}

Provenance provenance_from(const json& j) {
    Provenance prov;
    if (j.contains("scale")) prov.scale = j.at("scale").get<double>();
    if (j.contains("theta")) prov.theta = j.at("theta").get<double>();
    if (j.contains("substituted"))
        for (const auto& e : j.at("substituted"))
            prov.substituted.push_back(e.get<std::size_t>());
    if (j.contains("negated")) prov.negated = j.at("negated").get<bool>();
    if (j.contains("note")) prov.note = j.at("note").get<std::string>();
    return prov;
}

void append_complex_matrix(std::string& out, const Eigen::MatrixXcd& M) {
    out += '[';
    bool first = true;
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            if (!first) out += ',';
            first = false;
            out += '[';
            append_double(out, M(r, c).real());
            out += ',';
            append_double(out, M(r, c).imag());
            out += ']';
        }
    out += ']';
}

Eigen::MatrixXcd complex_matrix_from(const json& j, int dim) {
    const std::size_t need = static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
    if (!j.is_array() || j.size() != need)
        throw ParseError("matrix must hold " + std::to_string(need) + " [re,im] pairs");
    Eigen::MatrixXcd M(dim, dim);
    std::size_t at = 0;
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c, ++at) {
            const auto& pair = j[at];
            if (!pair.is_array() || pair.size() != 2)
                throw ParseError("matrix entries must be [re,im] pairs");
            M(r, c) = quantum::cplx(pair[0].get<double>(), pair[1].get<double>());
        }
    return M;
}

json parse_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON");
    return j;
}

// Field access on well-formed but wrong-shaped JSON surfaces as ParseError.
[[noreturn]] void rethrow_as_parse(const json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what());
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "\"nan\"";
    if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string escape_json(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string functional_to_json(const BellFunctional& T) {
    std::string out = "{\"scenario\":";
    append_scenario(out, T.scenario);
    if (!T.name.empty()) {
        out += ",\"name\":";
        append_string(out, T.name);
    }
    out += ",\"coeff_cap\":";
    append_double(out, T.coeff_cap);
    out += ",\"normalized\":";
    out += T.normalized ? "true" : "false";
    if (T.classical_lower) {
        out += ",\"classical_lower\":";
        append_double(out, *T.classical_lower);
    }
    if (T.classical_upper) {
        out += ",\"classical_upper\":";
        append_double(out, *T.classical_upper);
    }
    out += ",\"entries\":";
    append_entries(out, T.scenario, T.coeffs, false);
    if (T.provenance) {
        out += ",\"provenance\":";
        append_provenance(out, *T.provenance);
    }
    out += '}';
    return out;
}

BellFunctional functional_from_json(const std::string& text) {
    try {
        const json j = parse_json(text);
        if (!j.is_object()) throw ParseError("functional must be a JSON object");
        const Scenario sc = scenario_from(j.at("scenario"));
        std::vector<double> coeffs;
        read_entries(j.at("entries"), sc, coeffs);
        BellFunctional T(sc, std::move(coeffs),
                         j.contains("coeff_cap") ? j.at("coeff_cap").get<double>() : 1.0);
        if (j.contains("name")) T.name = j.at("name").get<std::string>();
        if (j.contains("normalized")) T.normalized = j.at("normalized").get<bool>();
        if (j.contains("classical_lower"))
            T.classical_lower = j.at("classical_lower").get<double>();
        if (j.contains("classical_upper"))
            T.classical_upper = j.at("classical_upper").get<double>();
        if (j.contains("provenance")) T.provenance = provenance_from(j.at("provenance"));
        return T;
    } catch (const json::exception& e) {
        rethrow_as_parse(e);
    }
}

std::string behaviour_to_json(const Behaviour& p) {
    std::string out = "{\"scenario\":";
    append_scenario(out, p.scenario);
    out += ",\"entries\":";
    append_entries(out, p.scenario, p.probs, true);
    out += '}';
    return out;
}

Behaviour behaviour_from_json(const std::string& text) {
    try {
        const json j = parse_json(text);
        if (!j.is_object()) throw ParseError("behaviour must be a JSON object");
        const Scenario sc = scenario_from(j.at("scenario"));
        std::vector<double> probs;
        const std::size_t have = read_entries(j.at("entries"), sc, probs);
        if (have != sc.behaviour_size())
            throw ParseError("behaviour must list all " +
                             std::to_string(sc.behaviour_size()) + " entries, got " +
                             std::to_string(have));
        return Behaviour(sc, std::move(probs));
    } catch (const json::exception& e) {
        rethrow_as_parse(e);
    }
}

std::string state_to_json(const quantum::PureState& psi,
                          std::optional<std::uint64_t> seed) {
    std::string out = "{\"d\":" + std::to_string(psi.local_dim) +
                      ",\"N\":" + std::to_string(psi.parties);
    if (seed) out += ",\"seed\":" + std::to_string(*seed);
    out += ",\"amps\":[";
    for (std::size_t i = 0; i < psi.amps.size(); ++i) {
        if (i) out += ',';
        out += '[';
        append_double(out, psi.amps[i].real());
        out += ',';
        append_double(out, psi.amps[i].imag());
        out += ']';
    }
    out += "]}";
    return out;
}

quantum::PureState state_from_json(const std::string& text) {
    try {
        const json j = parse_json(text);
        if (!j.is_object()) throw ParseError("state must be a JSON object");
        const int d = j.at("d").get<int>();
        const int N = j.at("N").get<int>();
        const auto& amps = j.at("amps");
        if (!amps.is_array()) throw ParseError("amps must be an array");
        std::vector<quantum::cplx> a;
        a.reserve(amps.size());
        for (const auto& pair : amps) {
            if (!pair.is_array() || pair.size() != 2)
                throw ParseError("amplitudes must be [re,im] pairs");
            a.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
        return quantum::PureState(d, N, std::move(a));
    } catch (const json::exception& e) {
        rethrow_as_parse(e);
    }
}

std::string assemblage_to_json(const quantum::Assemblage& A,
                               std::optional<std::uint64_t> seed) {
    std::string out = "{\"scenario\":";
    append_scenario(out, A.scenario);
    out += ",\"d\":" + std::to_string(A.local_dim);
    if (seed) out += ",\"seed\":" + std::to_string(*seed);
    out += ",\"povms\":[";
    for (std::size_t k = 0; k < A.povms.size(); ++k) {
        if (k) out += ',';
        out += '[';
        for (std::size_t x = 0; x < A.povms[k].size(); ++x) {
            if (x) out += ',';
            out += '[';
            const auto& povm = A.povms[k][x];
            for (std::size_t a = 0; a < povm.elements.size(); ++a) {
                if (a) out += ',';
                append_complex_matrix(out, povm.elements[a]);
            }
            out += ']';
        }
        out += ']';
    }
    out += "]}";
    return out;
}

namespace {
[[noreturn]] void assemblage_shape_error() {
    throw ParseError("povms must be a party x setting x outcome nesting");
}
} // namespace

quantum::Assemblage assemblage_from_json(const std::string& text) {
    try {
        const json j = parse_json(text);
        if (!j.is_object()) throw ParseError("assemblage must be a JSON object");
        quantum::Assemblage A;
        A.scenario = scenario_from(j.at("scenario"));
        A.local_dim = j.at("d").get<int>();
        const auto& parties = j.at("povms");
        if (!parties.is_array() ||
            parties.size() != static_cast<std::size_t>(A.scenario.parties))
            assemblage_shape_error();
        for (const auto& row : parties) {
            if (!row.is_array() ||
                row.size() != static_cast<std::size_t>(A.scenario.settings))
                assemblage_shape_error();
            std::vector<quantum::Povm> settings;
            for (const auto& povm_json : row) {
                if (!povm_json.is_array() ||
                    povm_json.size() != static_cast<std::size_t>(A.scenario.outcomes))
                    assemblage_shape_error();
                quantum::Povm p;
                p.dim = A.local_dim;
                for (const auto& mat : povm_json)
                    p.elements.push_back(complex_matrix_from(mat, A.local_dim));
                settings.push_back(std::move(p));
            }
            A.povms.push_back(std::move(settings));
        }
        return A;
    } catch (const json::exception& e) {
        rethrow_as_parse(e);
    }
}

std::string net_to_json(const nets::HypercubeNet& net) {
    std::string out = "{\"epsilon\":";
    append_double(out, net.epsilon);
    out += ",\"n\":" + std::to_string(net.ambient_dim);
    out += ",\"l\":" + std::to_string(net.grid_resolution);
    out += ",\"points\":[";
    for (std::size_t i = 0; i < net.points.size(); ++i) {
        if (i) out += ',';
        out += '[';
        for (std::size_t k = 0; k < net.points[i].size(); ++k) {
            if (k) out += ',';
            append_double(out, net.points[i][k]);
        }
        out += ']';
    }
    out += "]}";
    return out;
}

nets::HypercubeNet net_from_json(const std::string& text) {
    try {
        const json j = parse_json(text);
        if (!j.is_object()) throw ParseError("net must be a JSON object");
        nets::HypercubeNet net;
        net.epsilon = j.at("epsilon").get<double>();
        net.ambient_dim = j.at("n").get<int>();
        net.grid_resolution = j.contains("l") ? j.at("l").get<int>()
                                              : nets::grid_resolution(net.epsilon);
        for (const auto& pj : j.at("points")) {
            std::vector<double> p;
            p.reserve(pj.size());
            for (const auto& c : pj) p.push_back(c.get<double>());
            if (p.size() != static_cast<std::size_t>(net.ambient_dim))
                throw ParseError("net point dimension mismatch");
            std::vector<int> key = nets::cell_key(p, net.grid_resolution);
            if (net.cells.emplace(std::move(key), net.points.size()).second)
                net.points.push_back(std::move(p));
        }
        return net;
    } catch (const json::exception& e) {
        rethrow_as_parse(e);
    }
}

std::string bound_record(const bounds::TailBoundResult& r) {
    std::string out = "{\"params\":{\"N\":" + std::to_string(r.params.parties) +
                      ",\"m\":" + std::to_string(r.params.settings) +
                      ",\"v\":" + std::to_string(r.params.outcomes) +
                      ",\"d\":" + std::to_string(r.params.local_dim) + ",\"b\":";
    append_double(out, r.params.coeff_cap);
    out += ",\"c\":";
    append_double(out, r.params.threshold);
    out += ",\"delta\":";
    append_double(out, r.params.slack);
    out += "},\"variant\":";
    append_string(out, bounds::to_string(r.variant));
    out += ",\"log_value\":";
    append_double(out, r.log_value);
    out += ",\"terms\":[";
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        if (i) out += ',';
        append_double(out, r.terms[i]);
    }
    out += "]}";
    return out;
}

std::string tail_sample_record(const mc::SampleOutcome& s) {
    std::string out = "{\"index\":" + std::to_string(s.index) + ",\"best_Q\":";
    append_double(out, s.best_q);
    out += ",\"best_abs\":";
    append_double(out, s.best_abs);
    out += ",\"best_functional_name\":";
    append_string(out, s.best_functional);
    out += ",\"iterations\":" + std::to_string(s.iterations);
    out += ",\"seed\":" + std::to_string(s.seed);
    out += '}';
    return out;
}

std::string tail_summary_record(const mc::TailEstimate& t) {
    std::string out = "{\"type\":\"summary\",\"samples\":" +
                      std::to_string(t.samples.size()) +
                      ",\"hits\":" + std::to_string(t.hits) + ",\"threshold\":";
    append_double(out, t.config.threshold);
    out += ",\"p_hat\":";
    append_double(out, t.p_hat);
    out += ",\"ci_low\":";
    append_double(out, t.ci_low);
    out += ",\"ci_high\":";
    append_double(out, t.ci_high);
    out += ",\"estimator\":\"lower-bound\",\"downward_biased\":true}";
    return out;
}

std::string concentration_record(const mc::ConcentrationRecord& r) {
    std::string out = "{\"d\":" + std::to_string(r.local_dim) +
                      ",\"N\":" + std::to_string(r.parties) +
                      ",\"samples\":" + std::to_string(r.samples) + ",\"mean\":";
    append_double(out, r.mean);
    out += ",\"variance\":";
    append_double(out, r.variance);
    out += ",\"trace_mean\":";
    append_double(out, r.trace_mean);
    out += ",\"lipschitz\":";
    append_double(out, r.lipschitz);
    out += '}';
    return out;
}

std::string concentration_curve_csv(const mc::ConcentrationRecord& r) {
    std::string out = "eps,empirical,levy_log\n";
    for (std::size_t j = 0; j < r.eps_grid.size(); ++j) {
        out += format_double(r.eps_grid[j]);
        out += ',';
        out += format_double(r.empirical[j]);
        out += ',';
        out += format_double(r.levy_log[j]);
        out += '\n';
    }
    return out;
}

std::map<std::string, std::string> parse_config(const std::string& text) {
    std::map<std::string, std::string> out;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        const json j = parse_json(body);
        if (!j.is_object()) throw ParseError("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (value.is_string())
                out[key] = value.get<std::string>();
            else if (value.is_boolean())
                out[key] = value.get<bool>() ? "true" : "false";
            else if (value.is_number_unsigned())
                out[key] = std::to_string(value.get<std::uint64_t>());
            else if (value.is_number_integer())
                out[key] = std::to_string(value.get<std::int64_t>());
            else if (value.is_number_float())
                out[key] = value.dump();
            else
                throw ParseError("config value for '" + key + "' must be scalar");
        }
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = trim(text.substr(start, end - start));
        start = end + 1;
        if (line.empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line is not key=value: " + line);
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        if (end == text.size()) break;
    }
    return out;
}

} // namespace bell::serial
