#include "ulf/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

#include "ulf/io.hpp"

namespace ulf {

using nlohmann::json;

namespace {

void expect_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw ValidationError("config: unknown key '" + where + "." + key + "'");
    }
}

Vec3 parse_vec3(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3)
        throw ValidationError("config: '" + where + "' must be a 3-array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: JSON parse error: ") + e.what());
    }
    expect_keys(j, "", {"grid", "data", "solver", "pressure", "diagnostics", "output", "seed"});
    ExperimentConfig c;

    if (j.contains("grid")) {
        expect_keys(j["grid"], "grid", {"N", "L"});
        if (j["grid"].contains("N")) c.N = j["grid"]["N"].get<int>();
        if (j["grid"].contains("L")) c.L = j["grid"]["L"].get<double>();
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("data")) {
        expect_keys(j["data"], "data", {"kind", "params", "split"});
        if (j["data"].contains("kind")) c.kind = data_kind_from_string(j["data"]["kind"].get<std::string>());
        if (j["data"].contains("split")) {
            c.split = j["data"]["split"].get<std::string>();
            if (c.split != "generator")
                throw ValidationError("config: data.split supports only 'generator'");
        }
        if (j["data"].contains("params")) {
            const auto& p = j["data"]["params"];
            expect_keys(p, "data.params",
                        {"amp_bump", "bump_radius", "amp_shear", "c_g", "constant", "bound"});
            if (p.contains("amp_bump")) c.params.amp_bump = p["amp_bump"].get<double>();
            if (p.contains("bump_radius")) c.params.bump_radius = p["bump_radius"].get<double>();
            if (p.contains("amp_shear")) c.params.amp_shear = p["amp_shear"].get<double>();
            if (p.contains("c_g")) c.params.c_g = p["c_g"].get<double>();
            if (p.contains("bound")) c.params.bound = p["bound"].get<double>();
            if (p.contains("constant")) c.params.constant = parse_vec3(p["constant"], "data.params.constant");
        }
    }
    if (j.contains("solver")) {
        expect_keys(j["solver"], "solver",
                    {"epsilon_list", "T_total", "dt", "tol", "max_iter", "c_picard"});
        const auto& s = j["solver"];
        if (s.contains("epsilon_list")) c.epsilon_list = s["epsilon_list"].get<std::vector<double>>();
        if (s.contains("T_total")) c.T_total = s["T_total"].get<double>();
        if (s.contains("dt")) c.dt = s["dt"].get<double>();
        if (s.contains("tol")) c.tol = s["tol"].get<double>();
        if (s.contains("max_iter")) c.max_iter = s["max_iter"].get<int>();
        if (s.contains("c_picard")) c.c_picard = s["c_picard"].get<double>();
    }
    if (j.contains("pressure")) {
        expect_keys(j["pressure"], "pressure", {"centers", "tau", "tol_press"});
        const auto& p = j["pressure"];
        if (p.contains("centers"))
            for (const auto& cc : p["centers"]) c.centers.push_back(parse_vec3(cc, "pressure.centers[]"));
        if (p.contains("tau")) c.tau = p["tau"].get<double>();
        if (p.contains("tol_press")) c.tol_press = p["tol_press"].get<double>();
    }
    if (j.contains("diagnostics")) {
        expect_keys(j["diagnostics"], "diagnostics",
                    {"R_list", "t_list", "probes", "test_functions", "t0_list", "lei_budget_factor"});
        const auto& d = j["diagnostics"];
        if (d.contains("R_list")) c.R_list = d["R_list"].get<std::vector<double>>();
        if (d.contains("t_list")) c.t_list = d["t_list"].get<std::vector<double>>();
        if (d.contains("t0_list")) c.t0_list = d["t0_list"].get<std::vector<double>>();
        if (d.contains("test_functions")) c.n_test_functions = d["test_functions"].get<int>();
        if (d.contains("lei_budget_factor")) c.lei_budget_factor = d["lei_budget_factor"].get<double>();
        if (d.contains("probes"))
            for (const auto& pp : d["probes"]) c.probes.push_back(parse_vec3(pp, "diagnostics.probes[]"));
    }
    if (j.contains("output")) {
        expect_keys(j["output"], "output", {"dir", "formats"});
        if (j["output"].contains("dir")) c.out_dir = j["output"]["dir"].get<std::string>();
        if (j["output"].contains("formats"))
            c.formats = j["output"]["formats"].get<std::vector<std::string>>();
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void ExperimentConfig::validate() const {
    const Grid g = Grid::make(N, L);  // grid preconditions
    for (double eps : epsilon_list)
        if (eps < 2.0 * g.spacing() - 1e-12)
            throw ValidationError("config: solver.epsilon_list entry below 2h (unresolvable)");
    if (epsilon_list.empty()) throw ValidationError("config: solver.epsilon_list is empty");
    if (tol <= 0.0 || max_iter < 1) throw ValidationError("config: solver tolerance settings");
    if (tol_press <= 0.0) throw ValidationError("config: pressure.tol_press must be positive");
    for (double R : R_list)
        if (R > L / 4.0 + 1e-12)
            throw ValidationError("config: diagnostics.R_list entry exceeds L/4");
    for (const auto& cc : centers)
        if (std::max({std::abs(cc[0]), std::abs(cc[1]), std::abs(cc[2])}) + 3.0 > L)
            throw ValidationError("config: pressure center too close to the box seam");
    if (tau && *tau <= 4.0) throw ValidationError("config: pressure.tau must exceed 4");
    for (const auto& f : formats)
        if (f != "csv" && f != "ulf") throw ValidationError("config: unknown output format '" + f + "'");
}

std::string ExperimentConfig::echo_json() const {
    json j;
    j["grid"] = {{"N", N}, {"L", L}};
    j["seed"] = seed;
    j["data"] = {{"kind", to_string(kind)},
                 {"split", split},
                 {"params",
                  {{"amp_bump", params.amp_bump},
                   {"bump_radius", params.bump_radius},
                   {"amp_shear", params.amp_shear},
                   {"c_g", params.c_g},
                   {"constant", {params.constant[0], params.constant[1], params.constant[2]}},
                   {"bound", params.bound}}}};
    j["solver"] = {{"epsilon_list", epsilon_list}, {"T_total", T_total}, {"dt", dt},
                   {"tol", tol},                   {"max_iter", max_iter}, {"c_picard", c_picard}};
    json centers_j = json::array();
    for (const auto& cc : centers) centers_j.push_back({cc[0], cc[1], cc[2]});
    json probes_j = json::array();
    for (const auto& pp : probes) probes_j.push_back({pp[0], pp[1], pp[2]});
    j["pressure"] = {{"centers", centers_j}, {"tol_press", tol_press}};
    if (tau) j["pressure"]["tau"] = *tau;
    j["diagnostics"] = {{"R_list", R_list},   {"t_list", t_list},
                        {"probes", probes_j}, {"test_functions", n_test_functions},
                        {"t0_list", t0_list}, {"lei_budget_factor", lei_budget_factor}};
    j["output"] = {{"dir", out_dir.string()}, {"formats", formats}};
    return j.dump(2);
}

std::uint64_t ExperimentConfig::echo_hash() const {
    const std::string e = echo_json();
    return fnv1a_bytes(e.data(), e.size());
}

}  // namespace ulf
