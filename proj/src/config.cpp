#include "ssbnn/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace ssbnn {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

class KeyMap {
public:
    explicit KeyMap(const std::string& text) {
        std::stringstream ss(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(ss, line)) {
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            std::size_t eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected key=value, got '" + t + "'");
            map_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
        }
    }

    bool has(const std::string& k) const { return map_.count(k) > 0; }

    std::string str(const std::string& k, const std::string& fallback) const {
        auto it = map_.find(k);
        return it == map_.end() ? fallback : it->second;
    }

    double num(const std::string& k, double fallback) const {
        auto it = map_.find(k);
        if (it == map_.end()) return fallback;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + k + "': not a number: '" + it->second + "'");
        }
    }

    std::vector<double> num_list(const std::string& k) const {
        std::vector<double> out;
        auto it = map_.find(k);
        if (it == map_.end() || trim(it->second).empty()) return out;
        for (const auto& s : split_commas(it->second)) {
            try {
                out.push_back(std::stod(s));
            } catch (const std::exception&) {
                throw ConfigError("config key '" + k + "': not a number list: '" +
                                  it->second + "'");
            }
        }
        return out;
    }

    std::vector<std::size_t> size_list(const std::string& k) const {
        std::vector<std::size_t> out;
        for (double v : num_list(k)) {
            if (v < 0 || v != static_cast<std::size_t>(v))
                throw ConfigError("config key '" + k + "': expected nonnegative integers");
            out.push_back(static_cast<std::size_t>(v));
        }
        return out;
    }

private:
    std::map<std::string, std::string> map_;
};

template <typename T>
T parse_enum(const std::string& v, const std::string& key,
             std::initializer_list<std::pair<const char*, T>> table) {
    for (const auto& [name, val] : table)
        if (v == name) return val;
    std::string options;
    for (const auto& [name, val] : table) {
        if (!options.empty()) options += "|";
        options += name;
    }
    throw ConfigError("config key '" + key + "': expected one of " + options + ", got '" +
                      v + "'");
}

std::string join(const std::vector<double>& v) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    return out.str();
}

std::string join_sz(const std::vector<std::size_t>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    return out.str();
}

}  // namespace

PriorKind prior_kind_from_string(const std::string& s) {
    if (s == "ss-ig") return PriorKind::SS_IG;
    if (s == "ss-gl") return PriorKind::SS_GL;
    if (s == "ss-ghs") return PriorKind::SS_GHS;
    throw ConfigError("unknown prior kind '" + s + "' (expected ss-ig|ss-gl|ss-ghs)");
}

std::string to_string(PriorKind k) {
    switch (k) {
        case PriorKind::SS_IG: return "ss-ig";
        case PriorKind::SS_GL: return "ss-gl";
        case PriorKind::SS_GHS: return "ss-ghs";
    }
    return "?";
}

void RunConfig::validate() const {
    network.validate();
    train.validate();
}

RunConfig parse_config(const std::string& text) {
    KeyMap kv(text);
    RunConfig c;

    c.network.widths = kv.size_list("widths");
    c.network.activation = parse_enum<Activation>(
        kv.str("activation", "swish"), "activation",
        {{"swish", Activation::Swish}, {"relu", Activation::Relu}});
    c.network.likelihood = parse_enum<Likelihood>(
        kv.str("likelihood", "regression"), "likelihood",
        {{"regression", Likelihood::GaussianRegression},
         {"categorical", Likelihood::Categorical}});
    c.network.parameterization = parse_enum<Parameterization>(
        kv.str("parameterization", "centered"), "parameterization",
        {{"centered", Parameterization::Centered},
         {"non-centered", Parameterization::NonCentered}});

    auto& p = c.network.prior;
    p.kind = prior_kind_from_string(kv.str("prior", "ss-gl"));
    p.sigma0_sq = kv.num("sigma0_sq", 1.0);
    p.a0 = kv.num("a0", 4.0);
    p.b0 = kv.num("b0", 2.0);
    p.d0_sq = kv.num("d0_sq", 1.0);
    p.c_reg_sq = kv.num("c_reg_sq", 1.0);
    p.lambda = kv.num_list("lambda");

    c.train.epochs = static_cast<std::size_t>(kv.num("epochs", 1));
    c.train.batch_size = static_cast<std::size_t>(kv.num("batch_size", 1024));
    c.train.S = static_cast<std::size_t>(kv.num("mc_samples", 1));
    c.train.lr = kv.num("lr", 1e-3);
    c.train.seed = static_cast<std::uint64_t>(kv.num("seed", 0));
    c.train.elbo_tolerance = kv.num("elbo_tolerance", -1.0);
    c.train.eval_samples = static_cast<std::size_t>(kv.num("eval_samples", 10));
    c.train.grad_clip = kv.num("grad_clip", 0.0);
    c.train.optimizer = parse_enum<OptimizerKind>(
        kv.str("optimizer", "adam"), "optimizer",
        {{"adam", OptimizerKind::Adam}, {"sgd-momentum", OptimizerKind::SgdMomentum}});

    c.topology.n = static_cast<std::size_t>(kv.num("plan_n", 0));
    c.topology.k = kv.size_list("plan_k");
    c.topology.s = kv.num_list("plan_s");
    c.topology.B = kv.num_list("plan_B");
    c.topology.xi = kv.num("plan_xi", 0.0);
    c.topology.t0 = kv.num("plan_t0", 1.0);
    c.topology.t0p = kv.num("plan_t0p", 1.0);
    c.topology.t0pp = kv.num("plan_t0pp", 1.0);
    c.topology.c_reg_sq = kv.num("plan_c_reg_sq", 1.0);
    c.topology.C = kv.num_list("plan_C");

    c.train_images = kv.str("train_images", "");
    c.train_labels = kv.str("train_labels", "");
    c.test_images = kv.str("test_images", "");
    c.test_labels = kv.str("test_labels", "");
    c.data_format = kv.str("data_format", "idx");
    c.pixel_scale = kv.num("pixel_scale", 126.0);
    c.train_limit = static_cast<std::size_t>(kv.num("train_limit", 0));
    c.out_dir = kv.str("out_dir", ".");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "# network\n";
    out << "widths = " << join_sz(c.network.widths) << "\n";
    out << "activation = " << (c.network.activation == Activation::Swish ? "swish" : "relu")
        << "\n";
    out << "likelihood = "
        << (c.network.likelihood == Likelihood::GaussianRegression ? "regression"
                                                                   : "categorical")
        << "\n";
    out << "parameterization = "
        << (c.network.parameterization == Parameterization::Centered ? "centered"
                                                                     : "non-centered")
        << "\n";
    const auto& p = c.network.prior;
    out << "prior = " << to_string(p.kind) << "\n";
    out << "sigma0_sq = " << p.sigma0_sq << "\n";
    out << "a0 = " << p.a0 << "\n";
    out << "b0 = " << p.b0 << "\n";
    out << "d0_sq = " << p.d0_sq << "\n";
    out << "c_reg_sq = " << p.c_reg_sq << "\n";
    out << "lambda = " << join(p.lambda) << "\n";
    out << "# training\n";
    out << "epochs = " << c.train.epochs << "\n";
    out << "batch_size = " << c.train.batch_size << "\n";
    out << "mc_samples = " << c.train.S << "\n";
    out << "lr = " << c.train.lr << "\n";
    out << "seed = " << c.train.seed << "\n";
    out << "elbo_tolerance = " << c.train.elbo_tolerance << "\n";
    out << "eval_samples = " << c.train.eval_samples << "\n";
    out << "grad_clip = " << c.train.grad_clip << "\n";
    out << "optimizer = "
        << (c.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd-momentum") << "\n";
    out << "# planner\n";
    out << "plan_n = " << c.topology.n << "\n";
    out << "plan_k = " << join_sz(c.topology.k) << "\n";
    out << "plan_s = " << join(c.topology.s) << "\n";
    out << "plan_B = " << join(c.topology.B) << "\n";
    out << "plan_xi = " << c.topology.xi << "\n";
    out << "plan_t0 = " << c.topology.t0 << "\n";
    out << "plan_t0p = " << c.topology.t0p << "\n";
    out << "plan_t0pp = " << c.topology.t0pp << "\n";
    out << "plan_c_reg_sq = " << c.topology.c_reg_sq << "\n";
    out << "plan_C = " << join(c.topology.C) << "\n";
    out << "# data\n";
    out << "train_images = " << c.train_images << "\n";
    out << "train_labels = " << c.train_labels << "\n";
    out << "test_images = " << c.test_images << "\n";
    out << "test_labels = " << c.test_labels << "\n";
    out << "data_format = " << c.data_format << "\n";
    out << "pixel_scale = " << c.pixel_scale << "\n";
    out << "train_limit = " << c.train_limit << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    return out.str();
}

}  // namespace ssbnn
