#include "aerorecog/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "aerorecog/errors.hpp"

namespace aerorecog {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigInvalid("config key '" + key + "': not a number: '" + v + "'");
    }
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigInvalid("config key '" + key + "': not an integer: '" + v + "'");
    }
}

}  // namespace

void PipelineConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigInvalid(msg); };
    if (!(diff_threshold > 0.0 && diff_threshold < 1.0)) fail("diff_threshold must be in (0,1)");
    if (morph_radius < 1) fail("morph_radius must be >= 1");
    if (min_area < 1) fail("min_area must be >= 1");
    if (registration_dof != 4 && registration_dof != 6) fail("registration_dof must be 4 or 6");
    if (lk_max_iterations < 1) fail("lk_max_iterations must be >= 1");
    if (pyramid_levels < 1) fail("pyramid_levels must be >= 1");
    if (!(corner_tolerance > 0.0)) fail("corner_tolerance must be > 0");
    if (!(residual_cap > 0.0)) fail("residual_cap must be > 0");
    if (template_size < 16) fail("template_size must be >= 16");
    if (!(rotation_step > 0.0)) fail("rotation_step must be > 0");
    const double k = 360.0 / rotation_step;
    if (std::abs(k - std::round(k)) > 1e-9) fail("rotation_step must divide 360");
    if (!(energy > 0.0 && energy <= 1.0)) fail("energy must be in (0,1]");
    if (d_max < 1) fail("d_max must be >= 1");
    if (similarity_t < 1) fail("similarity_t must be >= 1");
}

std::string PipelineConfig::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "corner_tolerance=" << corner_tolerance << "\n"
       << "d_max=" << d_max << "\n"
       << "diff_threshold=" << diff_threshold << "\n"
       << "energy=" << energy << "\n"
       << "lk_max_iterations=" << lk_max_iterations << "\n"
       << "lk_method=" << (lk_method == LkMethod::forwards_additive ? "forwards_additive"
                                                                    : "inverse_compositional")
       << "\n"
       << "min_area=" << min_area << "\n"
       << "morph_radius=" << morph_radius << "\n"
       << "pyramid_levels=" << pyramid_levels << "\n"
       << "registration_dof=" << registration_dof << "\n"
       << "residual_cap=" << residual_cap << "\n"
       << "rotation_step=" << rotation_step << "\n"
       << "seed=" << seed << "\n"
       << "similarity_t=" << similarity_t << "\n"
       << "template_size=" << template_size << "\n";
    return os.str();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

std::string PipelineConfig::hash() const { return fnv1a_hex(serialize()); }

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return fnv1a_hex(os.str());
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigInvalid("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "diff_threshold") {
            cfg.diff_threshold = parse_real(key, val);
        } else if (key == "morph_radius") {
            cfg.morph_radius = static_cast<int>(parse_int(key, val));
        } else if (key == "min_area") {
            cfg.min_area = static_cast<int>(parse_int(key, val));
        } else if (key == "registration_dof") {
            cfg.registration_dof = static_cast<int>(parse_int(key, val));
        } else if (key == "lk_max_iterations") {
            cfg.lk_max_iterations = static_cast<int>(parse_int(key, val));
        } else if (key == "pyramid_levels") {
            cfg.pyramid_levels = static_cast<int>(parse_int(key, val));
        } else if (key == "corner_tolerance") {
            cfg.corner_tolerance = parse_real(key, val);
        } else if (key == "residual_cap") {
            cfg.residual_cap = parse_real(key, val);
        } else if (key == "lk_method") {
            if (val == "forwards_additive") {
                cfg.lk_method = LkMethod::forwards_additive;
            } else if (val == "inverse_compositional") {
                cfg.lk_method = LkMethod::inverse_compositional;
            } else {
                throw ConfigInvalid("lk_method must be forwards_additive or inverse_compositional");
            }
        } else if (key == "template_size") {
            cfg.template_size = static_cast<int>(parse_int(key, val));
        } else if (key == "rotation_step") {
            cfg.rotation_step = parse_real(key, val);
        } else if (key == "energy") {
            cfg.energy = parse_real(key, val);
        } else if (key == "d_max") {
            cfg.d_max = static_cast<int>(parse_int(key, val));
        } else if (key == "similarity_t") {
            cfg.similarity_t = static_cast<int>(parse_int(key, val));
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(key, val));
        } else {
            throw ConfigInvalid("unknown config key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

}  // namespace aerorecog
