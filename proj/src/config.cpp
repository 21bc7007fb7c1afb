#include "rdbp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rdbp {

namespace {

using nlohmann::json;

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

class Reader {
public:
    explicit Reader(std::filesystem::path base_dir) : base_dir_(std::move(base_dir)) {}

    std::vector<Violation> violations;

    void fail(const std::string& path, std::string message) { violations.push_back({path, std::move(message)}); }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        std::set<std::string> known(allowed.begin(), allowed.end());
        for (const auto& [key, _] : obj.items())
            if (!known.count(key)) fail(join(path, key), "unknown field");
    }

    std::optional<double> number(const json& obj, const std::string& path, const char* key, bool required) {
        const auto p = join(path, key);
        if (!obj.contains(key)) {
            if (required) fail(p, "required number is missing");
            return std::nullopt;
        }
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            fail(p, "expected a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            fail(p, "expected a finite number");
            return std::nullopt;
        }
        return d;
    }

    std::optional<std::uint64_t> count(const json& obj, const std::string& path, const char* key) {
        const auto p = join(path, key);
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number_unsigned()) {
            fail(p, "expected a nonnegative integer");
            return std::nullopt;
        }
        return v.get<std::uint64_t>();
    }

    std::optional<Distribution> distribution(const json& obj, const std::string& path) {
        if (!obj.is_object()) {
            fail(path, "expected a distribution record such as {\"family\":\"uniform\",\"a\":0,\"b\":1}");
            return std::nullopt;
        }
        if (!obj.contains("family") || !obj.at("family").is_string()) {
            fail(join(path, "family"), "required string is missing");
            return std::nullopt;
        }
        const auto family = obj.at("family").get<std::string>();
        const std::size_t before = violations.size();
        try {
            if (family == "uniform") {
                check_keys(obj, path, {"family", "a", "b"});
                auto a = number(obj, path, "a", true);
                auto b = number(obj, path, "b", true);
                if (violations.size() == before) return Distribution::uniform(*a, *b);
            } else if (family == "exponential") {
                check_keys(obj, path, {"family", "rate", "mean"});
                auto rate = number(obj, path, "rate", false);
                auto mean = number(obj, path, "mean", false);
                if (rate.has_value() == mean.has_value())
                    fail(path, "exponential needs exactly one of 'rate' or 'mean'");
                else if (violations.size() == before)
                    return Distribution::exponential(rate ? *rate : 1.0 / *mean);
            } else if (family == "pareto") {
                check_keys(obj, path, {"family", "scale", "shape"});
                auto scale = number(obj, path, "scale", true);
                auto shape = number(obj, path, "shape", true);
                if (violations.size() == before) return Distribution::pareto(*scale, *shape);
            } else if (family == "near-degenerate") {
                check_keys(obj, path, {"family", "center", "halfwidth"});
                auto c = number(obj, path, "center", true);
                auto w = number(obj, path, "halfwidth", true);
                if (violations.size() == before) return Distribution::near_degenerate(*c, *w);
            } else if (family == "constant") {
                check_keys(obj, path, {"family", "value"});
                auto v = number(obj, path, "value", true);
                if (violations.size() == before) return Distribution::constant(*v);
            } else if (family == "empirical") {
                check_keys(obj, path, {"family", "values", "csv"});
                std::vector<double> values;
                if (obj.contains("values") == obj.contains("csv")) {
                    fail(path, "empirical needs exactly one of 'values' or 'csv'");
                } else if (obj.contains("values")) {
                    values = number_list(obj.at("values"), join(path, "values"));
                } else if (!obj.at("csv").is_string()) {
                    fail(join(path, "csv"), "expected a file path");
                } else {
                    try {
                        values = read_value_csv(base_dir_ / obj.at("csv").get<std::string>());
                    } catch (const std::exception& e) {
                        fail(join(path, "csv"), e.what());
                    }
                }
                if (violations.size() == before) return Distribution::empirical(std::move(values));
            } else {
                fail(join(path, "family"),
                     "unknown family '" + family +
                         "' (expected uniform, exponential, pareto, near-degenerate, constant, empirical)");
            }
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
        return std::nullopt;
    }

    std::vector<double> number_list(const json& v, const std::string& path) {
        std::vector<double> out;
        if (!v.is_array()) {
            fail(path, "expected an array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                fail(path + "[" + std::to_string(i) + "]", "expected a number");
                continue;
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    // Either an explicit array or {"from": a, "to": b, "count": n}.
    std::vector<double> grid(const json& v, const std::string& path) {
        if (v.is_array()) return number_list(v, path);
        if (!v.is_object()) {
            fail(path, "expected an array or {\"from\",\"to\",\"count\"}");
            return {};
        }
        check_keys(v, path, {"from", "to", "count"});
        auto from = number(v, path, "from", true);
        auto to = number(v, path, "to", true);
        auto n = count(v, path, "count");
        if (!n) fail(join(path, "count"), "required integer is missing");
        if (!from || !to || !n) return {};
        if (*n < 1) {
            fail(join(path, "count"), "count must be >= 1");
            return {};
        }
        return linspace(*from, *to, static_cast<std::size_t>(*n));
    }

    std::optional<ReproductionLaw> reproduction(const json& v, const std::string& path) {
        if (!v.is_object()) {
            fail(path, "expected {\"probabilities\": [...]} or {\"pmf\": {\"j\": p_j}}");
            return std::nullopt;
        }
        check_keys(v, path, {"probabilities", "pmf"});
        std::vector<double> probs;
        const std::size_t before = violations.size();
        if (v.contains("probabilities") == v.contains("pmf")) {
            fail(path, "reproduction needs exactly one of 'probabilities' or 'pmf'");
            return std::nullopt;
        }
        if (v.contains("probabilities")) {
            probs = number_list(v.at("probabilities"), join(path, "probabilities"));
        } else {
            const auto& pmf = v.at("pmf");
            const auto pmf_path = join(path, "pmf");
            if (!pmf.is_object()) {
                fail(pmf_path, "expected an object mapping offspring counts to probabilities");
                return std::nullopt;
            }
            for (const auto& [key, p] : pmf.items()) {
                std::size_t j = 0;
                const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), j);
                if (ec != std::errc{} || ptr != key.data() + key.size() || j > 100000) {
                    fail(join(pmf_path, key), "key must be an offspring count");
                    continue;
                }
                if (!p.is_number()) {
                    fail(join(pmf_path, key), "expected a probability");
                    continue;
                }
                if (probs.size() <= j) probs.resize(j + 1, 0.0);
                probs[j] = p.get<double>();
            }
        }
        if (violations.size() != before) return std::nullopt;
        try {
            ReproductionLaw law(std::move(probs));
            for (auto& msg : law.nontriviality_violations()) fail(path, msg);
            return law;
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
        return std::nullopt;
    }

    PopulationSection population(const json& obj, const std::string& path) {
        PopulationSection out;
        if (obj.contains("claims")) out.claims = distribution(obj.at("claims"), join(path, "claims"));
        if (obj.contains("reproduction"))
            out.reproduction = reproduction(obj.at("reproduction"), join(path, "reproduction"));
        if (obj.contains("resources")) out.resources = distribution(obj.at("resources"), join(path, "resources"));
        out.m = number(obj, path, "m", false);
        out.r = number(obj, path, "r", false);
        if (out.m && !(*out.m > 0.0)) fail(join(path, "m"), "m must be positive");
        if (out.r && !(*out.r >= 0.0)) fail(join(path, "r"), "r must be nonnegative");
        if (out.m && out.reproduction && std::abs(*out.m - out.reproduction->mean()) > 1e-12)
            fail(join(path, "m"), "conflicts with the mean of 'reproduction'");
        if (out.r && out.resources && std::abs(*out.r - out.resources->mean()) > 1e-12)
            fail(join(path, "r"), "conflicts with the mean of 'resources'");
        if (out.claims && !(out.claims->mean() > 0.0)) fail(join(path, "claims"), "mean claim must be positive");
        return out;
    }

    SimulationSection simulation(const json& obj, const std::string& path) {
        SimulationSection s;
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return s;
        }
        check_keys(obj, path,
                   {"ancestors", "replicates", "gen_cap", "pop_cap", "horizon", "seed", "threads", "ancestor_grid"});
        s.ancestors = count(obj, path, "ancestors");
        s.replicates = count(obj, path, "replicates");
        s.gen_cap = count(obj, path, "gen_cap");
        s.pop_cap = count(obj, path, "pop_cap");
        s.horizon = count(obj, path, "horizon");
        s.seed = count(obj, path, "seed");
        if (auto t = count(obj, path, "threads")) s.threads = static_cast<unsigned>(*t);
        if (s.replicates && *s.replicates == 0) fail(join(path, "replicates"), "replicates must be >= 1");
        if (s.gen_cap && *s.gen_cap == 0) fail(join(path, "gen_cap"), "gen_cap must be >= 1");
        if (s.horizon && *s.horizon == 0) fail(join(path, "horizon"), "horizon must be >= 1");
        if (obj.contains("ancestor_grid")) {
            const auto& g = obj.at("ancestor_grid");
            const auto gp = join(path, "ancestor_grid");
            if (!g.is_array()) {
                fail(gp, "expected an array of positive integers");
            } else {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (!g[i].is_number_unsigned() || g[i].get<std::uint64_t>() == 0)
                        fail(gp + "[" + std::to_string(i) + "]", "expected a positive integer");
                    else
                        s.ancestor_grid.push_back(g[i].get<std::uint64_t>());
                }
            }
        }
        return s;
    }

    static std::vector<double> linspace(double from, double to, std::size_t n) {
        if (n == 1) return {from};
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1);
        out.back() = to;
        return out;
    }

private:
    std::filesystem::path base_dir_;
};

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> parse_grid_spec(const std::string& spec) {
    auto to_double = [&](const std::string& s) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
            throw std::invalid_argument("bad number '" + s + "' in grid spec '" + spec + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() != 3) throw std::invalid_argument("grid spec '" + spec + "' must look like from:to:count");
        const double n = to_double(parts[2]);
        if (n < 1 || n != std::floor(n)) throw std::invalid_argument("grid count must be a positive integer");
        return Reader::linspace(to_double(parts[0]), to_double(parts[1]), static_cast<std::size_t>(n));
    }
    std::vector<double> out;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');) out.push_back(to_double(part));
    if (out.empty()) throw std::invalid_argument("empty grid spec");
    return out;
}

std::vector<double> read_value_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t");
        const std::string cell = line.substr(first, last - first + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            if (line_no == 1 && values.empty()) continue;  // header
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number");
        }
        values.push_back(v);
    }
    return values;
}

ParsedConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    ParsedConfig out;
    out.config.hash = fnv1a_hex(text);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        out.violations.push_back({"", std::string("malformed JSON: ") + e.what()});
        return out;
    }
    if (!doc.is_object()) {
        out.violations.push_back({"", "top level must be an object"});
        return out;
    }

    Reader rd(base_dir);
    rd.check_keys(doc, "",
                  {"schema_version", "claims", "reproduction", "resources", "m", "r", "policy", "simulation", "sweep",
                   "lorenz", "immigration"});
    if (doc.contains("schema_version")) {
        const auto& v = doc.at("schema_version");
        if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
            rd.fail("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");
    }

    auto& cfg = out.config;
    cfg.population = rd.population(doc, "");

    if (doc.contains("policy")) {
        if (!doc.at("policy").is_string()) {
            rd.fail("policy", "expected a policy name");
        } else {
            try {
                cfg.policy = Policy::from_name(doc.at("policy").get<std::string>());
            } catch (const std::exception& e) {
                rd.fail("policy", e.what());
            }
        }
    }

    if (doc.contains("simulation")) cfg.simulation = rd.simulation(doc.at("simulation"), "simulation");

    if (doc.contains("sweep")) {
        const auto& sw = doc.at("sweep");
        if (!sw.is_object()) {
            rd.fail("sweep", "expected an object");
        } else {
            rd.check_keys(sw, "sweep", {"m_grid"});
            if (sw.contains("m_grid")) cfg.m_grid = rd.grid(sw.at("m_grid"), "sweep.m_grid");
        }
    }

    if (doc.contains("lorenz")) {
        const auto& lz = doc.at("lorenz");
        if (!lz.is_object()) {
            rd.fail("lorenz", "expected an object");
        } else {
            rd.check_keys(lz, "lorenz", {"curve", "grid"});
            if (lz.contains("curve")) {
                const auto& c = lz.at("curve");
                static const std::set<std::string> kinds{"analytic", "empirical", "line-of-equality",
                                                         "perfect-inequality"};
                if (!c.is_string() || !kinds.count(c.get<std::string>()))
                    rd.fail("lorenz.curve",
                            "expected analytic, empirical, line-of-equality or perfect-inequality");
                else
                    cfg.lorenz.curve = c.get<std::string>();
            }
            if (lz.contains("grid")) {
                const auto& g = lz.at("grid");
                if (g.is_number_unsigned()) {
                    const auto n = g.get<std::uint64_t>();
                    if (n < 2)
                        rd.fail("lorenz.grid", "a point count must be >= 2");
                    else
                        cfg.lorenz.grid = Reader::linspace(0.0, 1.0, static_cast<std::size_t>(n));
                } else {
                    cfg.lorenz.grid = rd.grid(g, "lorenz.grid");
                }
            }
        }
    }

    if (doc.contains("immigration")) {
        const auto& im = doc.at("immigration");
        if (!im.is_object()) {
            rd.fail("immigration", "expected an object");
        } else {
            rd.check_keys(im, "immigration", {"home", "immigrant", "alpha", "alpha_grid", "tolerance"});
            ImmigrationSection sec;
            for (const char* side : {"home", "immigrant"}) {
                const auto path = std::string("immigration.") + side;
                if (!im.contains(side) || !im.at(side).is_object()) {
                    rd.fail(path, "required population record is missing");
                    continue;
                }
                rd.check_keys(im.at(side), path, {"claims", "reproduction", "resources", "m", "r"});
                (std::string(side) == "home" ? sec.home : sec.immigrant) = rd.population(im.at(side), path);
            }
            sec.alpha = rd.number(im, "immigration", "alpha", false);
            if (sec.alpha && *sec.alpha < 0.0) rd.fail("immigration.alpha", "alpha must be nonnegative");
            if (im.contains("alpha_grid")) sec.alpha_grid = rd.grid(im.at("alpha_grid"), "immigration.alpha_grid");
            if (auto tol = rd.number(im, "immigration", "tolerance", false)) {
                if (*tol <= 0.0)
                    rd.fail("immigration.tolerance", "tolerance must be positive");
                else
                    sec.tolerance = *tol;
            }
            cfg.immigration = std::move(sec);
        }
    }

    out.violations = std::move(rd.violations);
    return out;
}

ParsedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParsedConfig out;
        out.violations.push_back({"", "cannot read config file " + path.string()});
        out.unreadable = true;
        return out;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

}  // namespace rdbp
