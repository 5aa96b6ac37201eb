#include "exitlab/config.hpp"

#include "exitlab/errors.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace exitlab::config {

namespace {

using geometry::DomainKind;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
    return out;
}

std::vector<std::string> tokens(const std::string& s, const char* separators) {
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(separators), boost::token_compress_on);
    std::erase_if(parts, [](const std::string& p) { return p.empty(); });
    return parts;
}

double to_double(const std::string& key, const std::string& s) {
    const std::string v = boost::trim_copy(s);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x)) {
        throw ConfigError(key, "expected a finite number, got '" + s + "'");
    }
    return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
    const std::string v = boost::trim_copy(s);
    // Accept 1e7 style counts as long as they are exact integers.
    const double x = to_double(key, v);
    if (x < 0.0 || x != std::floor(x) || x > 1.8e19) {
        throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
    }
    return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& s) {
    const std::string v = boost::to_lower_copy(boost::trim_copy(s));
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError(key, "expected true/false, got '" + s + "'");
}

// Numbers separated by spaces or commas, or a range lo:hi:step.
std::vector<double> to_list(const std::string& key, const std::string& s) {
    const auto trimmed = boost::trim_copy(s);
    if (trimmed.find(':') != std::string::npos) {
        const auto parts = tokens(trimmed, ":");
        if (parts.size() != 3) throw ConfigError(key, "range must be lo:hi:step");
        const double lo = to_double(key, parts[0]), hi = to_double(key, parts[1]),
                     step = to_double(key, parts[2]);
        if (!(step > 0.0) || hi < lo) throw ConfigError(key, "range needs lo <= hi and step > 0");
        std::vector<double> out;
        const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
        for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& p : tokens(trimmed, " ,\t")) out.push_back(to_double(key, p));
    if (out.empty()) throw ConfigError(key, "expected at least one number");
    return out;
}

geometry::Point to_point(const std::string& key, const std::string& s) {
    const auto v = to_list(key, s);
    if (v.size() != 2) throw ConfigError(key, "expected two coordinates");
    return {v[0], v[1]};
}

std::vector<geometry::Rect> to_rects(const std::string& key, const std::string& s) {
    std::vector<geometry::Rect> out;
    for (const auto& piece : tokens(s, ";")) {
        if (boost::trim_copy(piece).empty()) continue;
        const auto v = to_list(key, piece);
        if (v.size() != 4) throw ConfigError(key, "each rectangle needs xmin xmax ymin ymax");
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    return out;
}

std::string rects_string(const std::vector<geometry::Rect>& rects) {
    std::string out;
    for (std::size_t i = 0; i < rects.size(); ++i) {
        const auto& r = rects[i];
        out += (i ? "; " : "") + join({r.xmin, r.xmax, r.ymin, r.ymax});
    }
    return out;
}

struct Field {
    std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = [] {
        std::map<std::string, Field> f;
        auto real = [&f](const std::string& key, auto member) {
            f[key] = {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = to_double(k, v); },
                      [member](const RunConfig& c) { return format_double(member(const_cast<RunConfig&>(c))); }};
        };
        real("domain.half_width", [](RunConfig& c) -> double& { return c.domain.half_width; });
        real("domain.half_diagonal", [](RunConfig& c) -> double& { return c.domain.half_diagonal; });
        real("spectral.L", [](RunConfig& c) -> double& { return c.spectral.arm_length; });
        real("spectral.length_step", [](RunConfig& c) -> double& { return c.spectral.length_step; });
        real("spectral.tol", [](RunConfig& c) -> double& { return c.spectral.tol; });
        real("spectral.stability", [](RunConfig& c) -> double& { return c.spectral.stability; });
        real("spectral.margin", [](RunConfig& c) -> double& { return c.spectral.margin; });
        real("mc.dt_max", [](RunConfig& c) -> double& { return c.mc.policy.dt_max; });
        real("mc.dt_min", [](RunConfig& c) -> double& { return c.mc.policy.dt_min; });
        real("mc.adapt", [](RunConfig& c) -> double& { return c.mc.policy.adapt; });
        real("fit.rate_tolerance", [](RunConfig& c) -> double& { return c.fit.theorem.rate_tolerance; });
        real("fit.amplitude_tolerance", [](RunConfig& c) -> double& { return c.fit.theorem.amplitude_tolerance; });
        real("fit.residual_from", [](RunConfig& c) -> double& { return c.fit.theorem.residual_from; });
        real("fit.gap_sigmas", [](RunConfig& c) -> double& { return c.fit.theorem.gap_sigmas; });
        real("small_deviation.r", [](RunConfig& c) -> double& { return c.small_deviation.r; });

        f["domain.kind"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                try {
                                    c.domain.kind = geometry::parse_domain_kind(boost::trim_copy(v));
                                } catch (const std::exception&) {
                                    throw ConfigError(k, "unknown domain kind '" + v + "'");
                                }
                            },
                            [](const RunConfig& c) { return geometry::to_string(c.domain.kind); }};
        f["domain.rects"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.domain.rects = to_rects(k, v); },
                             [](const RunConfig& c) { return rects_string(c.domain.rects); }};
        f["domain.start"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.domain.start = to_point(k, v); },
                             [](const RunConfig& c) { return join({c.domain.start.x1, c.domain.start.x2}); }};
        f["spectral.h"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.spectral.h = to_list(k, v); },
                           [](const RunConfig& c) { return join(c.spectral.h); }};
        f["spectral.k_max"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                   const auto n = to_uint(k, v);
                                   if (n > 1000) throw ConfigError(k, "must be at most 1000");
                                   c.spectral.k_max = static_cast<int>(n);
                               },
                               [](const RunConfig& c) { return std::to_string(c.spectral.k_max); }};
        f["spectral.write_v0"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.spectral.write_v0 = to_bool(k, v); },
                                  [](const RunConfig& c) { return std::string(c.spectral.write_v0 ? "true" : "false"); }};
        f["mc.horizons"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.mc.horizons = to_list(k, v); },
                            [](const RunConfig& c) { return join(c.mc.horizons); }};
        f["mc.n"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.mc.n = to_uint(k, v); },
                     [](const RunConfig& c) { return std::to_string(c.mc.n); }};
        f["mc.seed"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.mc.seed = to_uint(k, v); },
                        [](const RunConfig& c) { return std::to_string(c.mc.seed); }};
        f["mc.bridge"] = {[](RunConfig& c, const std::string& k, const std::string& v) { c.mc.policy.bridge = to_bool(k, v); },
                          [](const RunConfig& c) { return std::string(c.mc.policy.bridge ? "true" : "false"); }};
        f["fit.window"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                               const auto w = to_list(k, v);
                               if (w.size() != 2) throw ConfigError(k, "expected lo hi");
                               c.fit.theorem.window = {w[0], w[1]};
                           },
                           [](const RunConfig& c) { return join({c.fit.theorem.window.lo, c.fit.theorem.window.hi}); }};
        f["small_deviation.source"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                                           try {
                                               c.small_deviation.source = parse_survival_source(boost::trim_copy(v));
                                           } catch (const std::exception&) {
                                               throw ConfigError(k, "expected mc or asymptotic, got '" + v + "'");
                                           }
                                       },
                                       [](const RunConfig& c) { return to_string(c.small_deviation.source); }};
        f["output.dir"] = {[](RunConfig& c, const std::string&, const std::string& v) { c.output.dir = boost::trim_copy(v); },
                           [](const RunConfig& c) { return c.output.dir; }};
        return f;
    }();
    return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

void validate(const RunConfig& c) {
    require(c.domain.half_width > 0.0, "domain.half_width", "must be positive");
    require(c.domain.half_diagonal > 0.0, "domain.half_diagonal", "must be positive");
    if (c.domain.kind == DomainKind::UnionOfRects || c.domain.kind == DomainKind::StripWithCavity) {
        require(!c.domain.rects.empty(), "domain.rects", "required for " + geometry::to_string(c.domain.kind));
    }
    for (const auto& r : c.domain.rects) {
        require(r.xmin < r.xmax && r.ymin < r.ymax, "domain.rects", "each rectangle needs xmin < xmax and ymin < ymax");
    }

    const auto& s = c.spectral;
    for (std::size_t i = 0; i < s.h.size(); ++i) {
        require(s.h[i] > 0.0, "spectral.h", "must be positive");
        require(i == 0 || s.h[i] < s.h[i - 1], "spectral.h", "spacings must be listed coarse to fine");
    }
    require(s.arm_length > 0.0, "spectral.L", "must be positive");
    require(s.length_step > 0.0, "spectral.length_step", "must be positive");
    require(s.tol > 0.0, "spectral.tol", "must be positive");
    require(s.k_max >= 1, "spectral.k_max", "must be at least 1");
    require(s.stability > 0.0, "spectral.stability", "must be positive");
    require(s.margin >= 0.0 && s.margin < 1.0, "spectral.margin", "must lie in [0, 1)");

    const auto& m = c.mc;
    for (std::size_t i = 0; i < m.horizons.size(); ++i) {
        require(m.horizons[i] >= 0.0, "mc.horizons", "must be non-negative");
        require(i == 0 || m.horizons[i] > m.horizons[i - 1], "mc.horizons", "must be strictly ascending");
    }
    require(m.n >= 1, "mc.n", "must be at least 1");
    require(m.policy.dt_max > 0.0, "mc.dt_max", "must be positive");
    require(m.policy.adapt > 0.0 && m.policy.adapt <= 1.0, "mc.adapt", "must lie in (0, 1]");
    require(m.policy.dt_min > 0.0 && m.policy.dt_min <= m.policy.dt_max, "mc.dt_min", "must lie in (0, dt_max]");

    const auto& t = c.fit.theorem;
    require(t.window.lo >= 0.0 && t.window.lo < t.window.hi, "fit.window", "needs 0 <= lo < hi");
    require(t.rate_tolerance > 0.0, "fit.rate_tolerance", "must be positive");
    require(t.amplitude_tolerance > 0.0, "fit.amplitude_tolerance", "must be positive");
    require(t.residual_from >= 0.0, "fit.residual_from", "must be non-negative");
    require(t.gap_sigmas >= 0.0, "fit.gap_sigmas", "must be non-negative");

    require(c.small_deviation.r > 0.0 && c.small_deviation.r <= 1.0, "small_deviation.r", "must lie in (0, 1]");
    require(!c.output.dir.empty(), "output.dir", "must not be empty");

    geometry::Domain domain = geometry::Domain::half_plane();
    try {
        domain = c.build_domain();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(c.domain.rects.empty() ? "domain.kind" : "domain.rects", e.what());
    }
    require(domain.contains(c.domain.start), "domain.start", "must lie inside the domain");
}

RunConfig apply(const std::map<std::string, std::string>& entries) {
    RunConfig c;
    const auto& table = fields();
    for (const auto& [key, value] : entries) {
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError(key, "unknown key");
        it->second.set(c, key, value);
    }
    validate(c);
    return c;
}

void merge_overrides(std::map<std::string, std::string>& entries, const Overrides& overrides) {
    for (const auto& [key, value] : overrides) entries[key] = value;
}

}  // namespace

geometry::Domain RunConfig::build_domain() const {
    using geometry::Domain;
    switch (domain.kind) {
    case DomainKind::Strip: return Domain::strip(domain.half_width);
    case DomainKind::SemiStrip: return Domain::semi_strip(domain.half_width);
    case DomainKind::Cross: return Domain::cross(domain.half_width);
    case DomainKind::Corner: return Domain::corner(domain.half_width);
    case DomainKind::StripWithCavity: return Domain::strip_with_cavity(domain.half_width, domain.rects);
    case DomainKind::UnionOfRects: return Domain::union_of_rects(domain.rects);
    case DomainKind::TiltedSquare: return Domain::tilted_square(domain.half_diagonal);
    case DomainKind::HalfPlane: return Domain::half_plane();
    }
    throw std::logic_error("unhandled domain kind");
}

spectral::SpectrumOptions RunConfig::spectrum_options() const {
    spectral::SpectrumOptions o;
    o.h = spectral.h.back();
    o.arm_length = spectral.arm_length;
    o.length_step = spectral.length_step;
    o.stability = spectral.stability;
    o.margin = spectral.margin;
    o.k_max = spectral.k_max;
    o.tol = spectral.tol;
    return o;
}

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [key, field] : fields()) {
        if (key.starts_with("output.")) continue;
        out += key + "=" + field.get(*this) + "\n";
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string RunConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
    return buf;
}

RunConfig parse(std::istream& in, const Overrides& overrides) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("config", e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    std::map<std::string, std::string> entries;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside a section");
        for (const auto& [key, value] : body) entries[section + "." + key] = value.data();
    }
    merge_overrides(entries, overrides);
    return apply(entries);
}

RunConfig load(const std::string& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read '" + path + "'");
    return parse(in, overrides);
}

RunConfig from_overrides(const Overrides& overrides) {
    std::map<std::string, std::string> entries;
    merge_overrides(entries, overrides);
    return apply(entries);
}

std::vector<std::string> known_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, field] : fields()) keys.push_back(key);
    return keys;
}

}  // namespace exitlab::config
