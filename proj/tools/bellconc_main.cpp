// bellconc: batch CLI over the C API.  Every run writes its data files plus
// a manifest.json into --out (BELLCONC_OUT overrides); data files carry no
// timestamps, so identical config + seed reproduces them byte for byte.
#include "bellconc.h"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace {

namespace fs = std::filesystem;

constexpr const char* kManifestName = "manifest.json";

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& message) {
    throw CliError{code, message};
}

[[noreturn]] void die_api(bc_status st) {
    die(static_cast<int>(st), bc_last_error());
}

void check(bc_status st) {
    if (st != BC_OK) die_api(st);
}

// Owns a string returned through the C API.
struct ApiString {
    char* ptr = nullptr;
    ~ApiString() { bc_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

struct ApiFunctional {
    bc_functional* ptr = nullptr;
    ~ApiFunctional() { bc_functional_free(ptr); }
};

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die(2, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) die(2, "cannot write " + path.string());
    out << content;
    if (!out) die(2, "short write to " + path.string());
}

std::string iso_utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// First line of every emitted data file; constant content, so reruns stay
// byte-identical while still pointing back at the run manifest.
std::string header_line() {
    return std::string("{\"type\":\"header\",\"manifest\":\"") + kManifestName +
           "\",\"artifact_version\":" + std::to_string(bc_artifact_version()) +
           "}\n";
}

std::string csv_header_line() {
    return std::string("# manifest: ") + kManifestName + "\n";
}

// Accepts both raw functional JSON and our emitted header+record files.
std::string strip_header(const std::string& text) {
    if (text.rfind("{\"type\":\"header\"", 0) == 0) {
        const std::size_t nl = text.find('\n');
        if (nl != std::string::npos) return text.substr(nl + 1);
    }
    return text;
}

struct GlobalFlags {
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    bool workers_set = false;
    double tol = 1e-12;
    bool tol_set = false;
    std::string out_dir = ".";
};

// key=value lines for everything the user set explicitly; merged over the
// config file by the library and echoed into the manifest.
std::string global_overrides(const GlobalFlags& g) {
    std::string o;
    if (g.seed_set) o += "seed=" + std::to_string(g.seed) + "\n";
    if (g.workers_set) o += "workers=" + std::to_string(g.workers) + "\n";
    if (g.tol_set) o += "tol=" + fmt(g.tol) + "\n";
    return o;
}

fs::path prepare_out_dir(const GlobalFlags& g) {
    fs::path dir = g.out_dir;
    if (const char* env = std::getenv("BELLCONC_OUT"); env && *env) dir = env;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) die(2, "cannot create output directory " + dir.string());
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& config_text, const std::string& overrides,
                    const GlobalFlags& g, const std::string& started,
                    const std::vector<std::string>& outputs) {
    ApiString echo;
    check(bc_config_echo(config_text.empty() ? nullptr : config_text.c_str(),
                         overrides.empty() ? nullptr : overrides.c_str(),
                         &echo.ptr));
    std::string m = "{\"command\":\"" + command + "\"";
    m += ",\"config\":" + echo.str();
    m += ",\"seed\":" + std::to_string(g.seed);
    m += ",\"artifact_version\":" + std::to_string(bc_artifact_version());
    m += ",\"tool_version\":\"" + std::string(bc_version()) + "\"";
    m += ",\"started\":\"" + started + "\"";
    m += ",\"finished\":\"" + iso_utc_now() + "\"";
    m += ",\"outputs\":[";
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        if (i) m += ',';
        m += '"' + outputs[i] + '"';
    }
    m += "]}\n";
    write_file(dir / kManifestName, m);
}

// ---- subcommand bodies -------------------------------------------------

int run_functional_command(bool positivize, const std::string& catalog_name,
                           const std::string& input_file, const GlobalFlags& g) {
    if (catalog_name.empty() == input_file.empty())
        die(1, "give exactly one of --catalog NAME or a functional JSON file");
    const std::string started = iso_utc_now();

    ApiFunctional f;
    std::string stem;
    std::string config_text;
    if (!catalog_name.empty()) {
        check(bc_functional_from_catalog(catalog_name.c_str(), &f.ptr));
        stem = catalog_name;
        config_text = "catalog=" + catalog_name + "\n";
    } else {
        const std::string text = strip_header(read_file(input_file));
        check(bc_functional_from_json(text.c_str(), &f.ptr));
        stem = fs::path(input_file).stem().string();
        config_text = "file=" + input_file + "\n";
    }

    double lo = 0.0, hi = 0.0;
    check(bc_functional_classical_bounds(f.ptr, &lo, &hi));
    std::cout << "classical bounds: (" << fmt(lo) << ", " << fmt(hi) << ")\n";

    ApiFunctional derived;
    std::string suffix;
    if (positivize) {
        check(bc_functional_positivized(f.ptr, &derived.ptr));
        suffix = ".positivized.json";
    } else {
        check(bc_functional_normalized(f.ptr, &derived.ptr));
        suffix = ".normalized.json";
    }
    ApiString json;
    check(bc_functional_to_json(derived.ptr, &json.ptr));

    const fs::path dir = prepare_out_dir(g);
    const std::string out_name = stem + suffix;
    write_file(dir / out_name, header_line() + json.str() + "\n");
    write_manifest(dir, positivize ? "positivize" : "classical-bound", config_text,
                   global_overrides(g), g, started, {out_name});
    std::cout << (positivize ? "positivized form: " : "normalized form: ")
              << (dir / out_name).string() << "\n";
    return 0;
}

int run_tail(const std::string& config_file, const GlobalFlags& g) {
    const std::string started = iso_utc_now();
    const std::string config_text = read_file(config_file);
    const std::string overrides = global_overrides(g);
    ApiString lines;
    check(bc_tail_run(config_text.c_str(),
                      overrides.empty() ? nullptr : overrides.c_str(),
                      &lines.ptr));
    const fs::path dir = prepare_out_dir(g);
    write_file(dir / "tail_samples.jsonl", header_line() + lines.str());
    write_manifest(dir, "tail", config_text, overrides, g, started,
                   {"tail_samples.jsonl"});
    const std::string all = lines.str();
    const std::size_t last_nl = all.find_last_of('\n', all.size() - 2);
    std::cout << "samples: " << (dir / "tail_samples.jsonl").string() << "\n"
              << all.substr(last_nl == std::string::npos ? 0 : last_nl + 1);
    return 0;
}

int run_bound(int n_low, int n_high, int m, int v, int d, double b, double c,
              double delta, const std::vector<std::string>& variants,
              const GlobalFlags& g) {
    if (n_high == 0) n_high = n_low;
    if (n_high < n_low) die(1, "--N-max must be at least --N");
    const std::string started = iso_utc_now();

    std::string records;
    std::string csv = "N,variant,log_value\n";
    for (int N = n_low; N <= n_high; ++N) {
        for (const auto& variant : variants) {
            const std::string cfg = "N=" + std::to_string(N) +
                                    "\nm=" + std::to_string(m) +
                                    "\nv=" + std::to_string(v) +
                                    "\nd=" + std::to_string(d) + "\nb=" + fmt(b) +
                                    "\nc=" + fmt(c) + "\ndelta=" + fmt(delta) +
                                    "\nvariant=" + variant + "\n";
            ApiString record;
            check(bc_bound_eval(cfg.c_str(), nullptr, &record.ptr));
            records += record.str() + "\n";
            // log_value is the last numeric field before "terms".
            const std::string rec = record.str();
            const std::string key = "\"log_value\":";
            const std::size_t at = rec.find(key) + key.size();
            const std::size_t end = rec.find(',', at);
            csv += std::to_string(N) + "," + variant + "," +
                   rec.substr(at, end - at) + "\n";
        }
    }

    std::string variant_list;
    for (const auto& variant : variants) {
        if (!variant_list.empty()) variant_list += ',';
        variant_list += variant;
    }
    const std::string config_text =
        "N=" + std::to_string(n_low) + "\nN_max=" + std::to_string(n_high) +
        "\nm=" + std::to_string(m) + "\nv=" + std::to_string(v) +
        "\nd=" + std::to_string(d) + "\nb=" + fmt(b) + "\nc=" + fmt(c) +
        "\ndelta=" + fmt(delta) + "\nvariant=" + variant_list + "\n";

    const fs::path dir = prepare_out_dir(g);
    std::vector<std::string> outputs = {"bound.jsonl"};
    write_file(dir / "bound.jsonl", header_line() + records);
    const bool sweep = n_high > n_low;
    if (sweep) {
        write_file(dir / "bound_sweep.csv", csv_header_line() + csv);
        outputs.push_back("bound_sweep.csv");
    }
    write_manifest(dir, "bound", config_text, global_overrides(g), g, started,
                   outputs);
    std::cout << records;
    if (sweep) std::cout << "sweep: " << (dir / "bound_sweep.csv").string() << "\n";
    return 0;
}

int run_concentration(const std::string& config_file, const GlobalFlags& g) {
    const std::string started = iso_utc_now();
    const std::string config_text = read_file(config_file);
    const std::string overrides = global_overrides(g);
    ApiString record, csv;
    check(bc_concentration_run(config_text.c_str(),
                               overrides.empty() ? nullptr : overrides.c_str(),
                               &record.ptr, &csv.ptr));
    const fs::path dir = prepare_out_dir(g);
    write_file(dir / "concentration.jsonl", header_line() + record.str() + "\n");
    write_file(dir / "concentration_curve.csv", csv_header_line() + csv.str());
    write_manifest(dir, "concentration", config_text, overrides, g, started,
                   {"concentration.jsonl", "concentration_curve.csv"});
    std::cout << record.str() << "\n"
              << "curve: " << (dir / "concentration_curve.csv").string() << "\n";
    return 0;
}

int run_net_demo(int n, double epsilon, long long probes, const GlobalFlags& g) {
    const std::string started = iso_utc_now();
    const std::string config_text = "n=" + std::to_string(n) +
                                    "\nepsilon=" + fmt(epsilon) +
                                    "\nprobes=" + std::to_string(probes) + "\n";
    const std::string overrides = global_overrides(g);
    ApiString record;
    check(bc_net_demo(config_text.c_str(),
                      overrides.empty() ? nullptr : overrides.c_str(),
                      &record.ptr));
    const fs::path dir = prepare_out_dir(g);
    write_file(dir / "net_demo.jsonl", header_line() + record.str() + "\n");
    write_manifest(dir, "net-demo", config_text, overrides, g, started,
                   {"net_demo.jsonl"});
    std::cout << record.str() << "\n";
    return 0;
}

int run_verify(bool corrupt, const GlobalFlags& g) {
    int ok = 0;
    ApiString report;
    check(bc_verify(g.seed, corrupt ? 1 : 0, &ok, &report.ptr));
    std::cout << report.str();
    std::cout << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell correlation bounds: classical bounds, random-state "
                 "violation experiments, and concentration tail bounds"};
    app.require_subcommand(1);

    GlobalFlags g;
    auto* seed_opt = app.add_option("--seed", g.seed, "master seed");
    auto* workers_opt =
        app.add_option("--workers", g.workers,
                       "worker threads (0: available parallelism)");
    auto* out_opt = app.add_option("--out", g.out_dir,
                                   "output directory (env BELLCONC_OUT wins)");
    auto* tol_opt = app.add_option("--tol", g.tol, "numeric check tolerance");
    (void)out_opt;

    std::string catalog_name, input_file, config_file;
    auto* cb = app.add_subcommand("classical-bound",
                                  "exact classical bounds via deterministic-"
                                  "strategy enumeration; writes the normalized form");
    cb->add_option("--catalog", catalog_name, "built-in functional name");
    cb->add_option("file", input_file, "functional JSON file");
    cb->fallthrough();

    auto* pz = app.add_subcommand("positivize",
                                  "rewrite a normalized functional with "
                                  "nonnegative coefficients and classical bound 1");
    pz->add_option("--catalog", catalog_name, "built-in functional name");
    pz->add_option("file", input_file, "functional JSON file");
    pz->fallthrough();

    auto* tl = app.add_subcommand("tail", "random-state violation tail experiment");
    tl->add_option("config", config_file, "experiment config file")->required();
    tl->fallthrough();

    int bn = 2, bn_max = 0, bm = 2, bv = 2, bd = 2;
    double bb = 1.0, bc_c = 0.0, bdelta = 0.0;
    std::vector<std::string> variants{"theorem"};
    auto* bd_cmd = app.add_subcommand("bound", "evaluate the tail probability bound");
    bd_cmd->add_option("--N", bn, "parties (sweep start)");
    bd_cmd->add_option("--N-max", bn_max, "sweep end (inclusive); emits CSV");
    bd_cmd->add_option("--m", bm, "settings per party");
    bd_cmd->add_option("--v", bv, "outcomes per setting");
    bd_cmd->add_option("--d", bd, "local Hilbert dimension");
    bd_cmd->add_option("--b", bb, "coefficient cap");
    bd_cmd->add_option("--c", bc_c, "violation threshold")->required();
    bd_cmd->add_option("--delta", bdelta, "net resolution")->required();
    bd_cmd->add_option("--variant", variants,
                       "theorem|appendix|derived (repeatable)");
    bd_cmd->fallthrough();

    auto* cc = app.add_subcommand("concentration",
                                  "sample the violation of a fixed configuration "
                                  "over random states");
    cc->add_option("config", config_file, "experiment config file")->required();
    cc->fallthrough();

    int net_n = 2;
    double net_eps = 0.5;
    long long net_probes = 1000;
    auto* nd = app.add_subcommand("net-demo", "grid covering net demonstration");
    nd->add_option("--n", net_n, "ambient dimension")->required();
    nd->add_option("--epsilon", net_eps, "net resolution")->required();
    nd->add_option("--probes", net_probes, "random probe count");
    nd->fallthrough();

    bool corrupt = false;
    auto* vf = app.add_subcommand("verify", "catalog + invariant self checks");
    vf->add_flag("--corrupt-fixture", corrupt,
                 "inject a broken catalog entry; verification must fail");
    vf->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;
    g.workers_set = workers_opt->count() > 0;
    g.tol_set = tol_opt->count() > 0;

    try {
        if (cb->parsed()) return run_functional_command(false, catalog_name, input_file, g);
        if (pz->parsed()) return run_functional_command(true, catalog_name, input_file, g);
        if (tl->parsed()) return run_tail(config_file, g);
        if (bd_cmd->parsed())
            return run_bound(bn, bn_max, bm, bv, bd, bb, bc_c, bdelta, variants, g);
        if (cc->parsed()) return run_concentration(config_file, g);
        if (nd->parsed()) return run_net_demo(net_n, net_eps, net_probes, g);
        if (vf->parsed()) return run_verify(corrupt, g);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code == 0 ? 1 : e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
