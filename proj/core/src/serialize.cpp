#include "wavesim/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wavesim {

namespace {

using nlohmann::json;

std::string num17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s, const char* what) {
    if (s.empty() || s.size() > 16) {
        throw DomainError(std::string(what) + " is not a 64-bit hex value");
    }
    std::uint64_t v = 0;
    for (char c : s) {
        int d = 0;
        if (c >= '0' && c <= '9') {
            d = c - '0';
        } else if (c >= 'a' && c <= 'f') {
            d = c - 'a' + 10;
        } else if (c >= 'A' && c <= 'F') {
            d = c - 'A' + 10;
        } else {
            throw DomainError(std::string(what) + " is not a 64-bit hex value");
        }
        v = (v << 4) | static_cast<std::uint64_t>(d);
    }
    return v;
}

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw DomainError(std::string("config field '") + key +
                          "' is missing");
    }
    return j.at(key);
}

double need_number(const json& j, const char* key) {
    const json& v = need(j, key);
    if (!v.is_number()) {
        throw DomainError(std::string("config field '") + key +
                          "' must be a number");
    }
    return v.get<double>();
}

std::string need_string(const json& j, const char* key) {
    const json& v = need(j, key);
    if (!v.is_string()) {
        throw DomainError(std::string("config field '") + key +
                          "' must be a string");
    }
    return v.get<std::string>();
}

long long opt_integer(const json& j, const char* key, long long fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw DomainError(std::string("config field '") + key +
                          "' must be an integer");
    }
    return v.get<long long>();
}

WaveletSpec parse_wavelet(const json& j, const char* key) {
    const json& w = need(j, key);
    const std::string family = need_string(w, "family");
    if (family == "meyer") return WaveletSpec::meyer();
    if (family == "daubechies") {
        const long long order = opt_integer(w, "order", 0);
        if (order < 1) {
            throw DomainError(std::string("config field '") + key +
                              ".order' must be a positive integer");
        }
        const long long depth = opt_integer(w, "product_depth", 24);
        if (depth < 8) {
            throw DomainError(std::string("config field '") + key +
                              ".product_depth' must be at least 8");
        }
        return WaveletSpec::daubechies(static_cast<int>(order),
                                       static_cast<int>(depth));
    }
    throw DomainError(std::string("config field '") + key +
                      ".family' must be \"meyer\" or \"daubechies\"");
}

void parse_density(const json& j, const char* key, std::string* family,
                   std::map<std::string, double>* params) {
    const json& d = need(j, key);
    *family = need_string(d, "family");
    params->clear();
    if (d.contains("params")) {
        const json& p = d.at("params");
        if (!p.is_object()) {
            throw DomainError(std::string("config field '") + key +
                              ".params' must be an object");
        }
        for (const auto& [k, v] : p.items()) {
            if (!v.is_number()) {
                throw DomainError(std::string("config field '") + key +
                                  ".params." + k + "' must be a number");
            }
            (*params)[k] = v.get<double>();
        }
    }
}

json wavelet_json(const WaveletSpec& w) {
    json j;
    if (w.family == WaveletSpec::Family::Meyer) {
        j["family"] = "meyer";
    } else {
        j["family"] = "daubechies";
        j["order"] = w.order;
        j["product_depth"] = w.product_depth;
    }
    return j;
}

json plan_json(const TruncationPlan& p) {
    return json{{"N0", p.N0},
                {"N", p.N},
                {"M", p.M},
                {"variance_budget", p.variance_budget}};
}

TruncationPlan plan_from(const json& j, const char* what) {
    if (!j.is_object() || !j.contains("N0") || !j.contains("N") ||
        !j.contains("M") || !j.contains("variance_budget")) {
        throw DomainError(std::string(what) + " is missing plan fields");
    }
    TruncationPlan p;
    p.N0 = j.at("N0").get<long long>();
    p.N = j.at("N").get<long long>();
    p.M = j.at("M").get<std::vector<long long>>();
    p.variance_budget = j.at("variance_budget").get<double>();
    if (p.N < 0 || p.M.size() != static_cast<std::size_t>(p.N)) {
        throw DomainError(std::string(what) + " has an inconsistent M list");
    }
    return p;
}

json constants_json(const PlanConstants& c) {
    return json{{"A", c.A}, {"B", c.B}, {"A1", c.A1}, {"B1", c.B1},
                {"R0", c.R0}};
}

PlanConstants constants_from(const json& j, const char* what) {
    for (const char* key : {"A", "B", "A1", "B1", "R0"}) {
        if (!j.is_object() || !j.contains(key)) {
            throw DomainError(std::string(what) + " is missing constant " +
                              key);
        }
    }
    PlanConstants c;
    c.A = j.at("A").get<double>();
    c.B = j.at("B").get<double>();
    c.A1 = j.at("A1").get<double>();
    c.B1 = j.at("B1").get<double>();
    c.R0 = j.at("R0").get<double>();
    return c;
}

void append_plan(std::ostringstream& os, const TruncationPlan& p) {
    os << p.N0 << '/' << p.N << '/';
    for (long long m : p.M) os << m << ',';
    os << '/' << num17(p.variance_budget);
}

void append_constants(std::ostringstream& os, const PlanConstants& c) {
    os << num17(c.A) << ',' << num17(c.B) << ',' << num17(c.A1) << ','
       << num17(c.B1) << ',' << num17(c.R0);
}

}  // namespace

AccuracySpec RunConfig::accuracy() const {
    return AccuracySpec::validated(epsilon, delta, p, T);
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") +
                          e.what());
    }
    if (!j.is_object()) throw DomainError("config must be a JSON object");

    RunConfig cfg;
    const std::string process = need_string(j, "process");
    if (process == "power") {
        cfg.process = RunConfig::Process::Power;
    } else if (process == "product") {
        cfg.process = RunConfig::Process::Product;
    } else {
        throw DomainError(
            "config field 'process' must be \"power\" or \"product\"");
    }

    cfg.s = opt_integer(j, "s", 1);
    if (cfg.s < 1) {
        throw DomainError("config field 's' must be a positive integer");
    }
    parse_density(j, "density", &cfg.density_family, &cfg.density_params);
    cfg.wavelet = parse_wavelet(j, "wavelet");
    if (cfg.process == RunConfig::Process::Product) {
        parse_density(j, "density2", &cfg.density2_family,
                      &cfg.density2_params);
        cfg.wavelet2 = parse_wavelet(j, "wavelet2");
    }

    cfg.epsilon = need_number(j, "epsilon");
    cfg.delta = need_number(j, "delta");
    cfg.p = need_number(j, "p");
    cfg.T = need_number(j, "T");
    AccuracySpec::validated(cfg.epsilon, cfg.delta, cfg.p, cfg.T);

    const long long seed = opt_integer(j, "seed", 0);
    if (seed < 0) throw DomainError("config field 'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    const long long grid = opt_integer(j, "grid_points", 512);
    if (grid < 2 || grid > 100000000) {
        throw DomainError("config field 'grid_points' must be in [2, 1e8]");
    }
    cfg.grid_points = static_cast<int>(grid);
    const long long reps = opt_integer(j, "replications", 200);
    if (reps < 0 || reps > 100000000) {
        throw DomainError(
            "config field 'replications' must be in [0, 1e8]");
    }
    cfg.replications = static_cast<int>(reps);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DomainError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

// Only the plan-determining fields enter the canonical form: seed, grid and
// replication counts vary per run without invalidating a stored plan.
std::string canonical_config_string(const RunConfig& config) {
    std::ostringstream os;
    os << "process="
       << (config.process == RunConfig::Process::Power ? "power" : "product");
    os << ";s=" << config.s;
    os << ";density=" << config.density_family << '{';
    for (const auto& [k, v] : config.density_params) {
        os << k << ':' << num17(v) << ';';
    }
    os << '}';
    os << ";wavelet=" << config.wavelet.name() << '['
       << config.wavelet.product_depth << ']';
    if (config.process == RunConfig::Process::Product) {
        os << ";density2=" << config.density2_family << '{';
        for (const auto& [k, v] : config.density2_params) {
            os << k << ':' << num17(v) << ';';
        }
        os << '}';
        os << ";wavelet2=" << config.wavelet2.name() << '['
           << config.wavelet2.product_depth << ']';
    }
    os << ";epsilon=" << num17(config.epsilon);
    os << ";delta=" << num17(config.delta);
    os << ";p=" << num17(config.p);
    os << ";T=" << num17(config.T);
    return os.str();
}

std::uint64_t config_hash(const RunConfig& config) {
    return fnv1a(canonical_config_string(config));
}

std::string plan_to_json(const PlanFile& pf) {
    json j;
    j["format"] = "wavesim-plan-1";
    j["config_hash"] = hex64(pf.config_hash);
    j["process"] = pf.is_product ? "product" : "power";
    if (pf.is_product) {
        j["plan1"] = plan_json(pf.product.plan1);
        j["plan2"] = plan_json(pf.product.plan2);
        j["delta_hat"] = pf.product.delta_hat;
        j["delta1_star"] = pf.product.delta1_star;
        j["delta2_star"] = pf.product.delta2_star;
        j["constants1"] = constants_json(pf.constants1);
        j["constants2"] = constants_json(pf.constants2);
    } else {
        j["plan"] = plan_json(pf.plan);
        j["constants"] = constants_json(pf.constants);
    }
    return j.dump(2) + "\n";
}

PlanFile plan_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("plan file is not valid JSON: ") +
                          e.what());
    }
    if (!j.is_object() || !j.contains("format") ||
        j.at("format") != "wavesim-plan-1") {
        throw ProvenanceMismatch("not a plan file");
    }
    PlanFile pf;
    pf.config_hash = parse_hex64(need_string(j, "config_hash"),
                                 "plan config_hash");
    const std::string process = need_string(j, "process");
    pf.is_product = process == "product";
    if (!pf.is_product && process != "power") {
        throw DomainError("plan file 'process' must be \"power\" or "
                          "\"product\"");
    }
    if (pf.is_product) {
        pf.product.plan1 = plan_from(need(j, "plan1"), "plan1");
        pf.product.plan2 = plan_from(need(j, "plan2"), "plan2");
        pf.product.delta_hat = need_number(j, "delta_hat");
        pf.product.delta1_star = need_number(j, "delta1_star");
        pf.product.delta2_star = need_number(j, "delta2_star");
        pf.constants1 = constants_from(need(j, "constants1"), "constants1");
        pf.constants2 = constants_from(need(j, "constants2"), "constants2");
        pf.R0_1 = pf.constants1.R0;
        pf.R0_2 = pf.constants2.R0;
    } else {
        pf.plan = plan_from(need(j, "plan"), "plan");
        pf.constants = constants_from(need(j, "constants"), "constants");
        pf.R0 = pf.constants.R0;
    }
    return pf;
}

void save_plan_file(const PlanFile& pf, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw Error("cannot write plan file: " + path);
    os << plan_to_json(pf);
    if (!os) throw Error("write failed for plan file: " + path);
}

PlanFile load_plan_file(const std::string& path,
                        std::uint64_t expected_config_hash) {
    std::ifstream is(path);
    if (!is) throw DomainError("cannot open plan file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    PlanFile pf = plan_from_json(buf.str());
    if (expected_config_hash != 0 && pf.config_hash != expected_config_hash) {
        throw ProvenanceMismatch(
            "plan file was produced under a different config (hash " +
            hex64(pf.config_hash) + ", expected " +
            hex64(expected_config_hash) + ")");
    }
    return pf;
}

std::uint64_t plan_content_hash(const PlanFile& pf) {
    std::ostringstream os;
    os << hex64(pf.config_hash) << '|'
       << (pf.is_product ? "product" : "power") << '|';
    if (pf.is_product) {
        append_plan(os, pf.product.plan1);
        os << '|';
        append_plan(os, pf.product.plan2);
        os << '|' << num17(pf.product.delta_hat) << '|'
           << num17(pf.product.delta1_star) << '|'
           << num17(pf.product.delta2_star) << '|';
        append_constants(os, pf.constants1);
        os << '|';
        append_constants(os, pf.constants2);
    } else {
        append_plan(os, pf.plan);
        os << '|';
        append_constants(os, pf.constants);
    }
    return fnv1a(os.str());
}

std::string path_to_csv(const SamplePath& path, std::uint64_t seed,
                        std::uint64_t plan_hash) {
    std::ostringstream os;
    os << "# seed=" << seed << " plan_hash=" << hex64(plan_hash) << '\n';
    os << "t,value\n";
    char buf[64];
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", path.times[i],
                      path.values[i]);
        os << buf;
    }
    return os.str();
}

void save_path_csv(const SamplePath& path, std::uint64_t seed,
                   std::uint64_t plan_hash, const std::string& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw Error("cannot write path file: " + file);
    os << path_to_csv(path, seed, plan_hash);
    if (!os) throw Error("write failed for path file: " + file);
}

std::string report_to_json(const VerificationReport& report,
                           const RunConfig& config, std::uint64_t cfg_hash,
                           const std::map<std::string, double>& extra) {
    json j;
    j["config"] = canonical_config_string(config);
    j["config_hash"] = hex64(cfg_hash);
    j["variance_deficit_max"] = report.variance_deficit_max;
    j["budget"] = report.budget;
    j["exceedance_count"] = report.exceedance_count;
    j["replications"] = report.replications;
    j["wilson_upper_95"] = report.wilson_upper_95;
    j["worst_norm"] = report.worst_norm;
    j["grid_points_used"] = report.grid_points_used;
    json cov = json::array();
    for (const CovarianceEstimate& c : report.covariance_errors) {
        cov.push_back(json{{"lag", c.lag},
                           {"estimate", c.estimate},
                           {"standard_error", c.standard_error}});
    }
    j["covariance"] = cov;
    for (const auto& [k, v] : extra) j[k] = v;
    return j.dump(2) + "\n";
}

void save_report_json(const std::string& json_text, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw Error("cannot write report file: " + path);
    os << json_text;
    if (!os) throw Error("write failed for report file: " + path);
}

}  // namespace wavesim
