#include "fan/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace fan {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

double parse_double(const std::string& where, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) fail(where, "trailing characters in number '" + v + "'");
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(where, "malformed number '" + v + "'");
    }
}

long long parse_int(const std::string& where, const std::string& v) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(where, "malformed integer '" + v + "'");
    return out;
}

bool parse_bool(const std::string& where, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(where, "expected true/false, got '" + v + "'");
}

LayerKind parse_kind(const std::string& where, const std::string& v) {
    for (LayerKind k : {LayerKind::Fan, LayerKind::FanGated, LayerKind::Mlp, LayerKind::Fsnn,
                        LayerKind::FnnAct, LayerKind::Snake, LayerKind::Linear})
        if (v == to_string(k)) return k;
    fail(where, "unknown model '" + v + "'");
}

Activation parse_act(const std::string& where, const std::string& v) {
    for (Activation a : {Activation::Gelu, Activation::Relu, Activation::Identity})
        if (v == to_string(a)) return a;
    fail(where, "unknown activation '" + v + "'");
}

void parse_task(const std::string& where, const std::string& v, TaskSpec& task) {
    task.terms.clear();
    if (v == "sin") {
        task.kind = TaskSpec::Kind::Sin;
    } else if (v == "sum_sinusoids") {
        task.kind = TaskSpec::Kind::SumSinusoids;
    } else if (v == "mod") {
        task.kind = TaskSpec::Kind::Mod;
    } else if (v == "complex_a") {
        task.kind = TaskSpec::Kind::ComplexPeriodicA;
    } else if (v == "complex_b") {
        task.kind = TaskSpec::Kind::ComplexPeriodicB;
    } else if (v == "square") {
        task.kind = TaskSpec::Kind::SquareWave;
    } else if (v.rfind("symbolic:", 0) == 0) {
        task.kind = TaskSpec::Kind::Symbolic;
        task.formula_id = v.substr(9);
    } else {
        fail(where, "unknown task '" + v + "'");
    }
}

void apply(ExperimentConfig& cfg, const std::string& where, const std::string& key,
           const std::string& value) {
    if (key == "name") cfg.name = value;
    else if (key == "model") cfg.model.kind = parse_kind(where, value);
    else if (key == "layers") {
        const long long n = parse_int(where, value);
        if (n < 1) fail(where, "layers must be >= 1");
        cfg.model.n_hidden = static_cast<int>(n) - 1;
    }
    else if (key == "hidden") cfg.model.hidden = static_cast<std::size_t>(parse_int(where, value));
    else if (key == "dp_ratio") cfg.model.dp_ratio = parse_double(where, value);
    else if (key == "activation") cfg.model.act = parse_act(where, value);
    else if (key == "residual") cfg.model.residual = parse_bool(where, value);
    else if (key == "fsnn_terms")
        cfg.model.fsnn_terms = static_cast<std::size_t>(parse_int(where, value));
    else if (key == "match_params") cfg.model.match_params = parse_int(where, value);
    else if (key == "task") parse_task(where, value, cfg.task);
    else if (key == "sin_freq") cfg.task.sin_freq = parse_double(where, value);
    else if (key == "modulus") cfg.task.modulus = parse_double(where, value);
    else if (key == "square_period") cfg.task.square_period = parse_double(where, value);
    else if (key == "sinusoid") {
        std::istringstream is(value);
        Sinusoid s;
        char c1 = 0, c2 = 0;
        if (!(is >> s.amp >> c1 >> s.freq >> c2 >> s.phase) || c1 != ',' || c2 != ',')
            fail(where, "sinusoid expects 'amp,freq,phase'");
        cfg.task.terms.push_back(s);
    }
    else if (key == "symbolic_train")
        cfg.symbolic_train = static_cast<std::size_t>(parse_int(where, value));
    else if (key == "symbolic_test")
        cfg.symbolic_test = static_cast<std::size_t>(parse_int(where, value));
    else if (key == "train_lo") cfg.split.train_lo = parse_double(where, value);
    else if (key == "train_hi") cfg.split.train_hi = parse_double(where, value);
    else if (key == "test_lo") cfg.split.test_lo = parse_double(where, value);
    else if (key == "test_hi") cfg.split.test_hi = parse_double(where, value);
    else if (key == "points_per_period") cfg.split.points_per_period = parse_double(where, value);
    else if (key == "period_hint") cfg.split.period_hint = parse_double(where, value);
    else if (key == "optimizer") {
        if (value == "adamw") cfg.opt = OptimizerKind::AdamW;
        else if (value == "sgdm") cfg.opt = OptimizerKind::Sgdm;
        else fail(where, "unknown optimizer '" + value + "'");
    }
    else if (key == "lr") cfg.lr = parse_double(where, value);
    else if (key == "weight_decay") cfg.weight_decay = parse_double(where, value);
    else if (key == "momentum") cfg.momentum = parse_double(where, value);
    else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(where, value));
    else if (key == "eval_every") cfg.eval_every = static_cast<int>(parse_int(where, value));
    else if (key == "batch_size")
        cfg.batch_size = static_cast<std::size_t>(parse_int(where, value));
    else if (key == "cosine_lr") cfg.cosine_lr = parse_bool(where, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(where, value));
    else fail(where, "unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides,
                                   ExperimentConfig base) {
    ExperimentConfig cfg = std::move(base);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = "line " + std::to_string(lineno);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(where, "expected 'key = value'");
        apply(cfg, where, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            fail("override '" + ov + "'", "expected key=value");
        apply(cfg, "override '" + ov + "'", trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides,
                              ExperimentConfig base) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), overrides, std::move(base));
}

}  // namespace fan
