// Command-line front end: train / eval / plan / flops / gen-data.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ssbnn/checkpoint.hpp"
#include "ssbnn/config.hpp"
#include "ssbnn/dataset.hpp"
#include "ssbnn/idx.hpp"
#include "ssbnn/metrics.hpp"
#include "ssbnn/planner.hpp"
#include "ssbnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace ssbnn;

namespace {

Dataset load_csv_regression(const std::string& path, const char* tag) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open data file");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError(path + " line " + std::to_string(line_no) +
                                  ": not a number: '" + cell + "'");
            }
        }
        if (row.size() < 2)
            throw ConfigError(path + " line " + std::to_string(line_no) +
                              ": need at least one feature and one target");
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError(path + " line " + std::to_string(line_no) +
                              ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError(path + ": empty data file");
    std::size_t p = rows.front().size() - 1;
    Dataset d;
    d.split_tag = tag;
    d.inputs = Tensor({rows.size(), p});
    d.targets = Tensor({rows.size(), 1});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < p; ++j) d.inputs.at(i, j) = rows[i][j];
        d.targets.at(i, 0) = rows[i][p];
    }
    return d;
}

void write_csv_regression(const std::string& path, const Dataset& d) {
    std::ofstream f(path);
    if (!f) throw ConfigError(path + ": cannot open for writing");
    f.precision(17);
    for (std::size_t i = 0; i < d.inputs.rows(); ++i) {
        for (std::size_t j = 0; j < d.inputs.cols(); ++j) f << d.inputs.at(i, j) << ',';
        f << d.targets.at(i, 0) << '\n';
    }
}

Dataset load_idx_classification(const std::string& images, const std::string& labels,
                                double pixel_scale, const char* tag) {
    Dataset d;
    d.split_tag = tag;
    d.inputs = preprocess_pixels(read_idx_images(images), pixel_scale);
    d.labels = read_idx_labels(labels);
    d.validate();
    return d;
}

Dataset truncate(Dataset d, std::size_t limit) {
    if (limit == 0 || limit >= d.size()) return d;
    Tensor in({limit, d.inputs.cols()});
    std::copy(d.inputs.data.begin(),
              d.inputs.data.begin() + static_cast<long>(limit * d.inputs.cols()),
              in.data.begin());
    d.inputs = std::move(in);
    if (d.is_classification()) {
        d.labels.resize(limit);
    } else {
        Tensor t({limit, d.targets.cols()});
        std::copy(d.targets.data.begin(),
                  d.targets.data.begin() + static_cast<long>(limit * d.targets.cols()),
                  t.data.begin());
        d.targets = std::move(t);
    }
    return d;
}

LayerShape parse_layer_shape(const std::string& line, std::size_t line_no) {
    std::stringstream ss(line);
    std::string kind;
    ss >> kind;
    LayerShape s;
    if (kind == "linear")
        s.kind = LayerKind::Linear;
    else if (kind == "conv2d")
        s.kind = LayerKind::Conv2d;
    else
        throw ConfigError("architecture line " + std::to_string(line_no) +
                          ": unknown layer kind '" + kind + "'");
    std::string field;
    bool have_ipr = false, have_opr = false, have_cinpr = false, have_coutpr = false;
    while (ss >> field) {
        auto eq = field.find('=');
        if (eq == std::string::npos)
            throw ConfigError("architecture line " + std::to_string(line_no) +
                              ": expected name=value, got '" + field + "'");
        std::string name = field.substr(0, eq);
        long long v;
        try {
            v = std::stoll(field.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("architecture line " + std::to_string(line_no) +
                              ": bad integer in '" + field + "'");
        }
        if (name == "I") s.I = v;
        else if (name == "O") s.O = v;
        else if (name == "I_pr") { s.I_pr = v; have_ipr = true; }
        else if (name == "O_pr") { s.O_pr = v; have_opr = true; }
        else if (name == "C_in") s.C_in = v;
        else if (name == "C_out") s.C_out = v;
        else if (name == "C_in_pr") { s.C_in_pr = v; have_cinpr = true; }
        else if (name == "C_out_pr") { s.C_out_pr = v; have_coutpr = true; }
        else if (name == "K_w") s.K_w = v;
        else if (name == "K_h") s.K_h = v;
        else if (name == "I_w") s.I_w = v;
        else if (name == "I_h") s.I_h = v;
        else if (name == "P_w") s.P_w = v;
        else if (name == "P_h") s.P_h = v;
        else if (name == "D_w") s.D_w = v;
        else if (name == "D_h") s.D_h = v;
        else if (name == "S_w") s.S_w = v;
        else if (name == "S_h") s.S_h = v;
        else
            throw ConfigError("architecture line " + std::to_string(line_no) +
                              ": unknown field '" + name + "'");
    }
    if (!have_ipr) s.I_pr = s.I;
    if (!have_opr) s.O_pr = s.O;
    if (!have_cinpr) s.C_in_pr = s.C_in;
    if (!have_coutpr) s.C_out_pr = s.C_out;
    return s;
}

int run_train(const std::string& config_path, std::uint64_t seed,
              const std::vector<std::string>& overrides) {
    RunConfig cfg = load_config(config_path);
    cfg.train.seed = seed;
    for (const auto& ov : overrides) {
        // flag-style key=value overrides applied on top of the file
        cfg = parse_config(serialize_config(cfg) + "\n" + ov + "\n");
        cfg.train.seed = seed;
    }
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }

    Dataset train_data, test_data;
    bool have_test = false;
    if (cfg.data_format == "idx") {
        cfg.network.likelihood = Likelihood::Categorical;
        train_data = load_idx_classification(cfg.train_images, cfg.train_labels,
                                             cfg.pixel_scale, "train");
        if (!cfg.test_images.empty()) {
            test_data = load_idx_classification(cfg.test_images, cfg.test_labels,
                                                cfg.pixel_scale, "test");
            have_test = true;
        }
    } else if (cfg.data_format == "csv") {
        train_data = load_csv_regression(cfg.train_images, "train");
        if (!cfg.test_images.empty()) {
            test_data = load_csv_regression(cfg.test_images, "test");
            have_test = true;
        }
    } else {
        throw ConfigError("unknown data_format '" + cfg.data_format + "'");
    }
    train_data = truncate(std::move(train_data), cfg.train_limit);
    if (train_data.inputs.cols() != cfg.network.widths.front())
        throw ConfigError("data width " + std::to_string(train_data.inputs.cols()) +
                          " does not match widths[0] = " +
                          std::to_string(cfg.network.widths.front()));

    Network net = init_network(cfg.network, cfg.train.seed);
    auto trace = train(net, train_data, have_test ? &test_data : nullptr, cfg.train);

    fs::create_directories(cfg.out_dir);
    {
        std::ofstream mf(cfg.out_dir + "/metrics.csv");
        write_metrics_csv(mf, trace);
    }
    NetRng rng = NetRng::make(cfg.train.seed, net.layers.size());
    checkpoint_save(cfg.out_dir + "/model.ckpt", net, cfg.train.seed, rng);
    {
        std::ofstream cf(cfg.out_dir + "/run_config.txt");
        cf << serialize_config(cfg);
    }
    const auto& last = trace.back();
    std::cout << "epochs=" << last.epoch << " elbo=" << last.elbo << " score=" << last.score
              << " compression=" << last.compression << " flops_ratio=" << last.flops_ratio
              << "\n";
    return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& images,
             const std::string& labels, const std::string& csv, double pixel_scale,
             std::size_t mc_samples) {
    CheckpointState st = checkpoint_load(ckpt_path);
    Dataset data;
    if (!csv.empty())
        data = load_csv_regression(csv, "test");
    else if (!images.empty())
        data = load_idx_classification(images, labels, pixel_scale, "test");
    else
        throw ConfigError("eval: provide --csv or --images/--labels");
    NetRng rng = NetRng::make(st.seed, st.net.layers.size(), 2000);
    double score = evaluate(st.net, data, mc_samples, rng);
    auto rep = sparsity_report(st.net);
    std::cout << (data.is_classification() ? "accuracy" : "rmse") << "," << score << "\n";
    for (std::size_t l = 0; l < rep.node_sparsity.size(); ++l)
        std::cout << "node_sparsity_l" << l << "," << rep.node_sparsity[l] << "\n";
    std::cout << "compression_ratio," << rep.compression_ratio << "\n";
    std::cout << "flops_ratio," << rep.flops_ratio << "\n";
    return 0;
}

int run_plan(const std::string& config_path, const std::string& prior) {
    RunConfig cfg = load_config(config_path);
    TopologySpec& spec = cfg.topology;
    try {
        spec.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    RateQuantities rates =
        prior == "ss-ghs" ? rate_quantities_ghs(spec) : rate_quantities_gl(spec);
    auto lambdas = lambda_l(spec, rates);
    std::cout.precision(12);
    std::cout << "layer,u,theta,r,lambda\n";
    for (std::size_t l = 0; l < rates.u.size(); ++l)
        std::cout << l << ',' << rates.u[l] << ',' << rates.theta[l] << ',' << rates.r[l]
                  << ',' << lambdas[l] << "\n";
    std::cout << "epsilon_n," << epsilon_n(spec, rates) << "\n";
    return 0;
}

int run_flops(const std::string& arch_path) {
    std::ifstream f(arch_path);
    if (!f) throw ConfigError(arch_path + ": cannot open architecture file");
    std::vector<LayerShape> shapes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::string t = line;
        if (t.find_first_not_of(" \t\r") == std::string::npos || t[0] == '#') continue;
        shapes.push_back(parse_layer_shape(t, line_no));
    }
    if (shapes.empty()) throw ConfigError(arch_path + ": no layers");
    std::cout << "layer,dense_flops,pruned_flops\n";
    long long dense = 0, pruned = 0;
    for (const auto& r : flops_table(shapes)) {
        std::cout << r.layer << ',' << r.dense << ',' << r.pruned << "\n";
        dense += r.dense;
        pruned += r.pruned;
    }
    std::cout.precision(12);
    std::cout << "total," << dense << ',' << pruned << "\n";
    std::cout << "flops_ratio," << static_cast<double>(pruned) / static_cast<double>(dense)
              << "\n";
    return 0;
}

int run_gen_data(const std::string& teacher, std::size_t n_train, std::size_t n_test,
                 double noise, std::uint64_t seed, const std::string& out_prefix,
                 std::size_t input_dim) {
    if (teacher == "images") {
        auto pair = gen_synthetic_images(n_train, n_test, seed);
        write_idx_images(out_prefix + "-train-images.idx", pair.train.inputs, 28, 28);
        write_idx_labels(out_prefix + "-train-labels.idx", pair.train.labels);
        write_idx_images(out_prefix + "-test-images.idx", pair.test.inputs, 28, 28);
        write_idx_labels(out_prefix + "-test-labels.idx", pair.test.labels);
        return 0;
    }
    TeacherSpec spec;
    spec.input_dim = input_dim;
    if (teacher == "sin")
        spec.kind = TeacherKind::Sin;
    else if (teacher == "constant")
        spec.kind = TeacherKind::Constant;
    else if (teacher == "product")
        spec.kind = TeacherKind::Product;
    else if (teacher == "sparse-mlp") {
        spec.kind = TeacherKind::SparseMlp;
        spec.widths = {input_dim, 16, 1};
        spec.active = {4};
    } else
        throw ConfigError("gen-data: unknown teacher '" + teacher + "'");
    auto pair = gen_synthetic(spec, n_train, n_test, noise, seed);
    write_csv_regression(out_prefix + "-train.csv", pair.train);
    write_csv_regression(out_prefix + "-test.csv", pair.test);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structurally sparse variational Bayesian neural networks"};
    app.require_subcommand(1);

    auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
    std::string train_config;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    train_cmd->add_option("--config", train_config, "run config file")->required();
    train_cmd->add_option("--seed", seed, "rng seed")->required();
    train_cmd->add_option("--set", overrides, "override config keys, key=value");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string ckpt, ev_images, ev_labels, ev_csv;
    double pixel_scale = 126.0;
    std::size_t mc_samples = 10;
    eval_cmd->add_option("--checkpoint", ckpt, "checkpoint file")->required();
    eval_cmd->add_option("--images", ev_images, "IDX image file");
    eval_cmd->add_option("--labels", ev_labels, "IDX label file");
    eval_cmd->add_option("--csv", ev_csv, "regression CSV file");
    eval_cmd->add_option("--pixel-scale", pixel_scale, "pixel divisor (default 126)");
    eval_cmd->add_option("--mc-samples", mc_samples, "posterior samples");

    auto* plan_cmd = app.add_subcommand("plan", "rate quantities and lambda table");
    std::string plan_config, plan_prior = "ss-gl";
    plan_cmd->add_option("--config", plan_config, "config with plan_* keys")->required();
    plan_cmd->add_option("--prior", plan_prior, "ss-gl or ss-ghs");

    auto* flops_cmd = app.add_subcommand("flops", "FLOPs table for an architecture file");
    std::string arch_path;
    flops_cmd->add_option("--arch", arch_path, "architecture description")->required();

    auto* gen_cmd = app.add_subcommand("gen-data", "generate synthetic datasets");
    std::string teacher = "sin", out_prefix = "data";
    std::size_t n_train = 2000, n_test = 500, input_dim = 1;
    double noise = 1.0;
    std::uint64_t gen_seed = 0;
    gen_cmd->add_option("--teacher", teacher, "sin|constant|product|sparse-mlp|images");
    gen_cmd->add_option("--n-train", n_train, "training points");
    gen_cmd->add_option("--n-test", n_test, "test points");
    gen_cmd->add_option("--noise", noise, "noise sigma");
    gen_cmd->add_option("--seed", gen_seed, "rng seed")->required();
    gen_cmd->add_option("--out", out_prefix, "output path prefix");
    gen_cmd->add_option("--input-dim", input_dim, "teacher input dimension");

    try {
        app.parse(argc, argv);
        if (*train_cmd) return run_train(train_config, seed, overrides);
        if (*eval_cmd) return run_eval(ckpt, ev_images, ev_labels, ev_csv, pixel_scale,
                                       mc_samples);
        if (*plan_cmd) return run_plan(plan_config, plan_prior);
        if (*flops_cmd) return run_flops(arch_path);
        if (*gen_cmd)
            return run_gen_data(teacher, n_train, n_test, noise, gen_seed, out_prefix,
                                input_dim);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
