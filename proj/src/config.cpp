#include "eht/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace eht {

using nlohmann::json;

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

void only_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw ConfigError(child(ptr, key), "unknown field");
        }
    }
}

const json& required(const json& obj, const std::string& ptr, const char* key) {
    if (!obj.contains(key)) throw ConfigError(child(ptr, key), "missing required field");
    return obj.at(key);
}

const json* optional(const json& obj, const char* key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return nullptr;
    return &obj.at(key);
}

double number(const json& v, const std::string& ptr) {
    if (!v.is_number()) throw ConfigError(ptr, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(ptr, "expected a finite number");
    return x;
}

double positive(const json& v, const std::string& ptr) {
    const double x = number(v, ptr);
    if (!(x > 0.0)) throw ConfigError(ptr, "must be positive");
    return x;
}

double open_unit(const json& v, const std::string& ptr) {
    const double x = number(v, ptr);
    if (!(x > 0.0 && x < 1.0)) throw ConfigError(ptr, "must lie in the open interval (0, 1)");
    return x;
}

std::uint64_t count(const json& v, const std::string& ptr, std::uint64_t min) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ConfigError(ptr, "expected a nonnegative integer");
    }
    const auto x = v.get<std::uint64_t>();
    if (x < min) throw ConfigError(ptr, "must be at least " + std::to_string(min));
    return x;
}

std::string text(const json& v, const std::string& ptr) {
    if (!v.is_string()) throw ConfigError(ptr, "expected a string");
    return v.get<std::string>();
}

const json& array(const json& v, const std::string& ptr, std::size_t expected = 0) {
    if (!v.is_array()) throw ConfigError(ptr, "expected an array");
    if (expected && v.size() != expected) {
        throw ConfigError(ptr, "expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
    }
    return v;
}

std::vector<double> numbers(const json& v, const std::string& ptr, std::size_t expected = 0) {
    array(v, ptr, expected);
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], child(ptr, k)));
    return out;
}

UtilityTransform parse_transform(const json& v, const std::string& ptr) {
    const std::string kind = text(required(v, ptr, "kind"), child(ptr, "kind"));
    try {
        if (kind == "identity") {
            only_keys(v, ptr, {"kind"});
            return UtilityTransform::identity();
        }
        if (kind == "affine") {
            only_keys(v, ptr, {"kind", "scale", "shift"});
            const double scale = v.contains("scale") ? number(v["scale"], child(ptr, "scale")) : 1.0;
            const double shift = v.contains("shift") ? number(v["shift"], child(ptr, "shift")) : 0.0;
            if (!(scale > 0.0)) throw ConfigError(child(ptr, "scale"), "must be positive");
            return UtilityTransform::affine(scale, shift);
        }
        if (kind == "table") {
            only_keys(v, ptr, {"kind", "breakpoints", "values"});
            auto xs = numbers(required(v, ptr, "breakpoints"), child(ptr, "breakpoints"));
            auto ys = numbers(required(v, ptr, "values"), child(ptr, "values"), xs.size());
            return UtilityTransform::table(std::move(xs), std::move(ys));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(ptr, e.what());
    }
    throw ConfigError(child(ptr, "kind"), "unknown transform kind '" + kind + "'");
}

json transform_json(const UtilityTransform& f) {
    switch (f.kind()) {
        case UtilityTransform::Kind::identity:
            return {{"kind", "identity"}};
        case UtilityTransform::Kind::affine:
            return {{"kind", "affine"}, {"scale", f.scale()}, {"shift", f.shift()}};
        case UtilityTransform::Kind::table:
            return {{"kind", "table"}, {"breakpoints", f.breakpoints()}, {"values", f.values()}};
    }
    return nullptr;
}

void parse_game(const json& g, ExperimentConfig& cfg) {
    const std::string ptr = "/game";
    only_keys(g, ptr, {"players", "actions", "payoffs"});
    const json& actions = array(required(g, ptr, "actions"), ptr + "/actions");
    if (actions.size() < 2) throw ConfigError(ptr + "/actions", "a game needs at least two players");
    std::size_t profiles = 1;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const std::string p = child(ptr + "/actions", i);
        array(actions[i], p);
        if (actions[i].empty()) throw ConfigError(p, "every player needs at least one action");
        std::vector<std::string> labels;
        for (std::size_t a = 0; a < actions[i].size(); ++a) labels.push_back(text(actions[i][a], child(p, a)));
        cfg.actions.push_back(std::move(labels));
        profiles *= actions[i].size();
    }
    const std::size_t n = cfg.actions.size();
    if (const json* players = optional(g, "players")) {
        array(*players, ptr + "/players", n);
        for (std::size_t i = 0; i < n; ++i) cfg.players.push_back(text((*players)[i], child(ptr + "/players", i)));
    } else {
        for (std::size_t i = 0; i < n; ++i) cfg.players.push_back("player" + std::to_string(i + 1));
    }
    const json& payoffs = array(required(g, ptr, "payoffs"), ptr + "/payoffs", profiles);
    for (std::size_t k = 0; k < profiles; ++k) {
        cfg.payoffs.push_back(numbers(payoffs[k], child(ptr + "/payoffs", k), n));
    }
}

void parse_parameters(const json& p, ExperimentConfig& cfg) {
    const std::string ptr = "/parameters";
    only_keys(p, ptr, {"sigma", "tau", "M", "epsilon", "distance"});
    cfg.sigma = positive(required(p, ptr, "sigma"), ptr + "/sigma");
    cfg.tau = positive(required(p, ptr, "tau"), ptr + "/tau");
    const auto m = count(required(p, ptr, "M"), ptr + "/M", 1);
    if (m > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) throw ConfigError(ptr + "/M", "too large");
    cfg.granularity = static_cast<int>(m);
    if (const json* e = optional(p, "epsilon")) cfg.epsilon = positive(*e, ptr + "/epsilon");
    if (const json* d = optional(p, "distance")) {
        try {
            cfg.distance_mode = parse_distance_mode(text(*d, ptr + "/distance"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(ptr + "/distance", e.what());
        }
    }
}

void parse_run(const json& r, ExperimentConfig& cfg) {
    const std::string ptr = "/run";
    only_keys(r, ptr,
              {"xi", "xi_grid", "gamma", "resampler", "epochs", "epoch_length", "max_epoch_length", "seed",
               "replications", "initial_beliefs", "u_bar", "simulate_in_sweep"});
    RunSpec& run = cfg.run;
    const std::size_t n = cfg.actions.size();
    if (const json* v = optional(r, "xi")) run.xi = open_unit(*v, ptr + "/xi");
    if (const json* v = optional(r, "xi_grid")) {
        array(*v, ptr + "/xi_grid");
        for (std::size_t k = 0; k < v->size(); ++k) run.xi_grid.push_back(open_unit((*v)[k], child(ptr + "/xi_grid", k)));
    }
    if (const json* v = optional(r, "gamma")) {
        array(*v, ptr + "/gamma", n);
        for (std::size_t i = 0; i < n; ++i) run.gamma.push_back(open_unit((*v)[i], child(ptr + "/gamma", i)));
    } else {
        run.gamma.assign(n, 0.5);
    }
    if (const json* v = optional(r, "resampler")) {
        const std::string p = ptr + "/resampler";
        const std::string kind = text(required(*v, p, "kind"), p + "/kind");
        run.resampler.kind = kind;
        if (kind == "uniform") {
            only_keys(*v, p, {"kind"});
        } else if (kind == "table") {
            only_keys(*v, p, {"kind", "lambda", "rows"});
            run.resampler.lambda = positive(required(*v, p, "lambda"), p + "/lambda");
            const json& rows = array(required(*v, p, "rows"), p + "/rows", n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::string pi = child(p + "/rows", i);
                array(rows[i], pi);
                std::vector<std::vector<double>> table;
                for (std::size_t b = 0; b < rows[i].size(); ++b) {
                    table.push_back(numbers(rows[i][b], child(pi, b), rows[i].size()));
                }
                run.resampler.rows.push_back(std::move(table));
            }
        } else {
            throw ConfigError(p + "/kind", "unknown resampler kind '" + kind + "'");
        }
    }
    if (const json* v = optional(r, "epochs")) run.epochs = count(*v, ptr + "/epochs", 0);
    if (const json* v = optional(r, "epoch_length")) run.epoch_length = count(*v, ptr + "/epoch_length", 1);
    if (const json* v = optional(r, "max_epoch_length")) {
        run.max_epoch_length = count(*v, ptr + "/max_epoch_length", 1);
    }
    if (const json* v = optional(r, "seed")) run.seed = count(*v, ptr + "/seed", 0);
    if (const json* v = optional(r, "replications")) run.replications = count(*v, ptr + "/replications", 1);
    if (const json* v = optional(r, "initial_beliefs")) {
        array(*v, ptr + "/initial_beliefs", n);
        std::vector<std::size_t> ids;
        for (std::size_t i = 0; i < n; ++i) ids.push_back(count((*v)[i], child(ptr + "/initial_beliefs", i), 0));
        run.initial_beliefs = std::move(ids);
    }
    if (const json* v = optional(r, "u_bar")) run.u_bar = positive(*v, ptr + "/u_bar");
    if (const json* v = optional(r, "simulate_in_sweep")) {
        if (!v->is_boolean()) throw ConfigError(ptr + "/simulate_in_sweep", "expected a boolean");
        run.simulate_in_sweep = v->get<bool>();
    }
}

void parse_outputs(const json& o, ExperimentConfig& cfg) {
    const std::string ptr = "/outputs";
    only_keys(o, ptr, {"directory", "formats"});
    if (const json* v = optional(o, "directory")) cfg.output_directory = text(*v, ptr + "/directory");
    if (const json* v = optional(o, "formats")) {
        array(*v, ptr + "/formats");
        cfg.formats.clear();
        for (std::size_t k = 0; k < v->size(); ++k) {
            const std::string f = text((*v)[k], child(ptr + "/formats", k));
            if (f != "json" && f != "csv" && f != "ndjson") {
                throw ConfigError(child(ptr + "/formats", k), "unknown format '" + f + "'");
            }
            cfg.formats.push_back(f);
        }
    }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    only_keys(doc, "", {"name", "game", "parameters", "transforms", "run", "outputs"});
    ExperimentConfig cfg;
    cfg.name = doc.contains("name") ? text(doc["name"], "/name") : "experiment";
    parse_game(required(doc, "", "game"), cfg);
    parse_parameters(required(doc, "", "parameters"), cfg);
    const std::size_t n = cfg.actions.size();
    if (const json* t = optional(doc, "transforms")) {
        array(*t, "/transforms", n);
        for (std::size_t i = 0; i < n; ++i) cfg.transforms.push_back(parse_transform((*t)[i], child("/transforms", i)));
    } else {
        cfg.transforms.assign(n, UtilityTransform::identity());
    }
    if (const json* r = optional(doc, "run")) {
        parse_run(*r, cfg);
    } else {
        cfg.run.gamma.assign(n, 0.5);
    }
    if (const json* o = optional(doc, "outputs")) parse_outputs(*o, cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
    json transforms = json::array();
    for (const auto& f : cfg.transforms) transforms.push_back(transform_json(f));
    const RunSpec& r = cfg.run;
    json resampler{{"kind", r.resampler.kind}};
    if (r.resampler.kind == "table") {
        resampler["lambda"] = r.resampler.lambda;
        resampler["rows"] = r.resampler.rows;
    }
    json run{{"xi", r.xi},
             {"xi_grid", r.xi_grid},
             {"gamma", r.gamma},
             {"resampler", resampler},
             {"epochs", r.epochs},
             {"max_epoch_length", r.max_epoch_length},
             {"seed", r.seed},
             {"replications", r.replications},
             {"simulate_in_sweep", r.simulate_in_sweep}};
    if (r.epoch_length) run["epoch_length"] = *r.epoch_length;
    if (r.initial_beliefs) run["initial_beliefs"] = *r.initial_beliefs;
    if (r.u_bar) run["u_bar"] = *r.u_bar;
    return {{"name", cfg.name},
            {"game", {{"players", cfg.players}, {"actions", cfg.actions}, {"payoffs", cfg.payoffs}}},
            {"parameters",
             {{"sigma", cfg.sigma},
              {"tau", cfg.tau},
              {"M", cfg.granularity},
              {"epsilon", cfg.epsilon},
              {"distance", to_string(cfg.distance_mode)}}},
            {"transforms", transforms},
            {"run", run},
            {"outputs", {{"directory", cfg.output_directory}, {"formats", cfg.formats}}}};
}

Game ExperimentConfig::game() const {
    std::vector<std::size_t> counts;
    for (const auto& a : actions) counts.push_back(a.size());
    const std::size_t n = counts.size();
    std::vector<double> flat(n * payoffs.size());
    for (std::size_t k = 0; k < payoffs.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) flat[i * payoffs.size() + k] = payoffs[k][i];
    }
    return Game(std::move(counts), std::move(flat));
}

RunConfig ExperimentConfig::run_config(std::optional<double> xi) const {
    RunConfig rc;
    rc.xi = xi.value_or(run.xi);
    rc.test_probs = run.gamma;
    rc.transforms = transforms;
    rc.sigma = sigma;
    rc.tau = tau;
    rc.granularity = granularity;
    rc.distance_mode = distance_mode;
    rc.epoch_length = run.epoch_length.value_or(0);
    rc.max_epoch_length = run.max_epoch_length;
    rc.u_bar_override = run.u_bar;
    rc.epochs = run.epochs;
    rc.seed = run.seed;
    return rc;
}

std::vector<Resampler> ExperimentConfig::resamplers(const StateSpace& space) const {
    if (run.resampler.kind != "table") return {};
    std::vector<Resampler> out;
    for (std::size_t i = 0; i < space.player_count(); ++i) {
        const std::string ptr = "/run/resampler/rows/" + std::to_string(i);
        if (run.resampler.rows[i].size() != space.belief_count(i)) {
            throw ConfigError(ptr, "expected " + std::to_string(space.belief_count(i)) + " rows, one per belief");
        }
        try {
            out.push_back(Resampler::table(run.resampler.rows[i], run.resampler.lambda));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(ptr, e.what());
        }
    }
    return out;
}

void ExperimentConfig::validate_transforms(const StateSpace& space) const {
    for (std::size_t i = 0; i < space.player_count(); ++i) {
        const auto& u = space.player(i).anticipated;
        const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
        try {
            transforms[i].validate_on_range(*lo, *hi);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("/transforms/" + std::to_string(i), e.what());
        }
    }
}

}  // namespace eht
