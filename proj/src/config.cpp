#include "qlb/app.hpp"

#include "qlb/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace qlb {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string &v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string &v) {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return d;
}

std::size_t to_size(const std::string &v) {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative value");
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<std::size_t>(n);
}

int to_int(const std::string &v) {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return n;
}

bool to_bool(const std::string &v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw std::invalid_argument("expected true or false");
}

ModelKind to_model(const std::string &v) {
    if (v == "free") return ModelKind::free;
    if (v == "em") return ModelKind::em;
    if (v == "njl") return ModelKind::njl;
    throw std::invalid_argument("expected free, em or njl");
}

std::string model_name(ModelKind k) {
    switch (k) {
    case ModelKind::free: return "free";
    case ModelKind::em: return "em";
    case ModelKind::njl: return "njl";
    }
    return "?";
}

PotentialKind to_potential(const std::string &v) {
    if (v == "none") return PotentialKind::none;
    if (v == "uniform_v") return PotentialKind::uniform_v;
    if (v == "constant_a") return PotentialKind::constant_a;
    if (v == "plane_wave_a") return PotentialKind::plane_wave_a;
    if (v == "file") return PotentialKind::file;
    throw std::invalid_argument("expected none, uniform_v, constant_a, plane_wave_a or file");
}

std::string potential_name(PotentialKind k) {
    switch (k) {
    case PotentialKind::none: return "none";
    case PotentialKind::uniform_v: return "uniform_v";
    case PotentialKind::constant_a: return "constant_a";
    case PotentialKind::plane_wave_a: return "plane_wave_a";
    case PotentialKind::file: return "file";
    }
    return "?";
}

PacketKind to_packet(const std::string &v) {
    if (v == "gaussian") return PacketKind::gaussian;
    if (v == "plane_wave") return PacketKind::plane_wave;
    throw std::invalid_argument("expected gaussian or plane_wave");
}

std::string join_sizes(const std::vector<std::size_t> &v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string join_axes(const std::vector<Axis> &v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += axis_name(v[i]);
    }
    return out;
}

struct Key {
    const char *name;
    std::function<void(RunConfig &, const std::string &)> set;
    std::function<std::string(const RunConfig &)> get;
};

#define QLB_DOUBLE(field)                                                                          \
    Key {                                                                                          \
        #field, [](RunConfig &c, const std::string &v) { c.field = to_double(v); },                \
            [](const RunConfig &c) { return format_double(c.field); }                              \
    }
#define QLB_SIZE(field)                                                                            \
    Key {                                                                                          \
        #field, [](RunConfig &c, const std::string &v) { c.field = to_size(v); },                  \
            [](const RunConfig &c) { return std::to_string(c.field); }                             \
    }
#define QLB_AXIS(field)                                                                            \
    Key {                                                                                          \
        #field, [](RunConfig &c, const std::string &v) { c.field = parse_axis(v); },               \
            [](const RunConfig &c) { return std::string(1, axis_name(c.field)); }                  \
    }

const std::vector<Key> &keys() {
    static const std::vector<Key> table = {
        Key{"dims", [](RunConfig &c, const std::string &v) { c.dims = to_int(v); },
            [](const RunConfig &c) { return std::to_string(c.dims); }},
        QLB_SIZE(nx),
        QLB_SIZE(ny),
        QLB_SIZE(nz),
        Key{"boundary", [](RunConfig &c, const std::string &v) { c.boundary = parse_boundary(v); },
            [](const RunConfig &c) { return std::string(boundary_name(c.boundary)); }},
        Key{"axis_order",
            [](RunConfig &c, const std::string &v) {
                c.axis_order.clear();
                for (const auto &a : split_list(v)) c.axis_order.push_back(parse_axis(a));
            },
            [](const RunConfig &c) {
                return join_axes(c.axis_order.empty() ? c.grid().active_axes() : c.axis_order);
            }},
        QLB_DOUBLE(dt),
        QLB_SIZE(steps),
        QLB_SIZE(snapshot_cadence),
        Key{"profile_steps",
            [](RunConfig &c, const std::string &v) {
                c.profile_steps.clear();
                for (const auto &s : split_list(v)) c.profile_steps.push_back(to_size(s));
            },
            [](const RunConfig &c) { return join_sizes(c.profile_steps); }},
        Key{"model", [](RunConfig &c, const std::string &v) { c.model = to_model(v); },
            [](const RunConfig &c) { return model_name(c.model); }},
        QLB_DOUBLE(m),
        QLB_DOUBLE(g),
        QLB_DOUBLE(e),
        Key{"potential", [](RunConfig &c, const std::string &v) { c.potential = to_potential(v); },
            [](const RunConfig &c) { return potential_name(c.potential); }},
        QLB_DOUBLE(potential_v),
        QLB_DOUBLE(potential_ax),
        QLB_DOUBLE(potential_ay),
        QLB_DOUBLE(potential_az),
        QLB_DOUBLE(potential_amplitude),
        QLB_DOUBLE(potential_k),
        QLB_DOUBLE(potential_omega),
        QLB_AXIS(potential_polarization),
        QLB_AXIS(potential_direction),
        Key{"potential_file", [](RunConfig &c, const std::string &v) { c.potential_file = v; },
            [](const RunConfig &c) { return c.potential_file; }},
        Key{"packet", [](RunConfig &c, const std::string &v) { c.packet = to_packet(v); },
            [](const RunConfig &c) {
                return std::string(c.packet == PacketKind::gaussian ? "gaussian" : "plane_wave");
            }},
        QLB_DOUBLE(k),
        QLB_DOUBLE(sigma),
        QLB_DOUBLE(c_u),
        QLB_DOUBLE(c_d),
        Key{"center", [](RunConfig &c, const std::string &v) { c.center = to_double(v); },
            [](const RunConfig &c) {
                return c.axis_extent_valid() ? format_double(packet_center(c.grid(), c.packet_spec()))
                                             : format_double(c.center);
            }},
        QLB_AXIS(axis),
        Key{"branch", [](RunConfig &c, const std::string &v) { c.branch = parse_branch(v); },
            [](const RunConfig &c) {
                return std::string(c.branch == Branch::particle ? "particle" : "antiparticle");
            }},
        Key{"normalize_ic", [](RunConfig &c, const std::string &v) { c.normalize_ic = to_bool(v); },
            [](const RunConfig &c) { return std::string(c.normalize_ic ? "true" : "false"); }},
        QLB_SIZE(velocity_window_begin),
        QLB_SIZE(velocity_window_end),
        QLB_SIZE(levels),
        QLB_DOUBLE(converge_time),
        Key{"output_dir", [](RunConfig &c, const std::string &v) { c.output_dir = v; },
            [](const RunConfig &c) { return c.output_dir; }},
        Key{"seed", [](RunConfig &c, const std::string &v) { c.seed = to_size(v); },
            [](const RunConfig &c) { return std::to_string(c.seed); }},
        Key{"workers", [](RunConfig &c, const std::string &v) { c.workers = to_int(v); },
            [](const RunConfig &c) { return std::to_string(c.workers); }},
    };
    return table;
}

#undef QLB_DOUBLE
#undef QLB_SIZE
#undef QLB_AXIS

void assign(RunConfig &cfg, const std::string &key, const std::string &value,
            const std::string &where) {
    for (const Key &k : keys()) {
        if (key != k.name) continue;
        try {
            k.set(cfg, value);
        } catch (const std::exception &ex) {
            throw ConfigError(where + ": bad value '" + value + "' for key '" + key + "': " + ex.what());
        }
        return;
    }
    throw ConfigError(where + ": unknown key '" + key + "'");
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool RunConfig::axis_extent_valid() const {
    try {
        return grid().active(axis);
    } catch (const std::exception &) {
        return false;
    }
}

Grid RunConfig::grid() const { return Grid({nx, ny, nz}, boundary); }

WavepacketSpec RunConfig::packet_spec() const {
    WavepacketSpec spec;
    spec.k = k;
    spec.sigma = sigma;
    spec.c_u = c_u;
    spec.c_d = c_d;
    spec.center = center;
    spec.axis = axis;
    return spec;
}

void RunConfig::validate() const {
    auto fail = [](const std::string &msg) { throw ConfigError("invalid configuration: " + msg); };
    for (double v : {dt, m, g, e, potential_v, potential_ax, potential_ay, potential_az,
                     potential_amplitude, potential_k, potential_omega, k, sigma, c_u, c_d, center,
                     converge_time})
        if (!std::isfinite(v)) fail("all physical parameters must be finite");
    if (!(dt > 0.0)) fail("dt must be positive");
    if (snapshot_cadence < 1) fail("snapshot_cadence must be at least 1");
    if (workers < 1) fail("workers must be at least 1");
    Grid g0 = [&] {
        try {
            return grid();
        } catch (const std::exception &ex) {
            throw ConfigError(std::string("invalid configuration: ") + ex.what());
        }
    }();
    if (g0.dims() != dims)
        fail("dims = " + std::to_string(dims) + " but " + std::to_string(g0.dims()) +
             " extents exceed 1");
    if (!g0.active(axis)) fail(std::string("packet axis ") + axis_name(axis) + " is not active");
    if (!axis_order.empty()) {
        try {
            StepPlan{axis_order, workers}.validate(g0);
        } catch (const std::exception &ex) {
            fail(ex.what());
        }
    }
    if (model == ModelKind::em && potential == PotentialKind::none)
        fail("model = em needs a potential");
    if (potential == PotentialKind::file && potential_file.empty())
        fail("potential = file needs potential_file");
    if (velocity_window_end < velocity_window_begin) fail("velocity window is reversed");
}

RunConfig parse_config(std::istream &in, const std::string &origin) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    std::vector<std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = origin + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            throw ConfigError(where + ": duplicate key '" + key + "'");
        seen.push_back(key);
        assign(cfg, key, trim(body.substr(eq + 1)), where);
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

void apply_override(RunConfig &cfg, const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
    assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--set");
}

std::string render_config(const RunConfig &cfg) {
    std::string out;
    for (const Key &k : keys()) out += std::string(k.name) + " = " + k.get(cfg) + "\n";
    return out;
}

} // namespace qlb
