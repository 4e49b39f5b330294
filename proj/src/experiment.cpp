#include "snn/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "snn/checkpoint.hpp"
#include "snn/fine_inference.hpp"

namespace snn {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::vector<double> parse_list(const json& j) {
    std::vector<double> out;
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

void assign_field(ExperimentConfig& cfg, const std::string& key, const json& v) {
    if (key == "preset") cfg.preset = v.get<std::string>();
    else if (key == "model") cfg.model = v.get<std::string>();
    else if (key == "ratio") cfg.ratio = v.get<double>();
    else if (key == "beta") cfg.beta = v.get<double>();
    else if (key == "n_steps") cfg.n_steps = v.get<std::size_t>();
    else if (key == "dense_bias") cfg.dense_bias = v.get<bool>();
    else if (key == "encoding") cfg.encoding = v.get<std::string>();
    else if (key == "loss") cfg.loss = v.get<std::string>();
    else if (key == "n_out") cfg.n_out = v.get<double>();
    else if (key == "optimizer") cfg.optimizer = v.get<std::string>();
    else if (key == "lr") cfg.lr = v.get<double>();
    else if (key == "epochs") cfg.epochs = v.get<std::size_t>();
    else if (key == "batch_size") cfg.batch_size = v.get<std::size_t>();
    else if (key == "train_limit") cfg.train_limit = v.get<std::size_t>();
    else if (key == "test_limit") cfg.test_limit = v.get<std::size_t>();
    else if (key == "checkpoint") cfg.checkpoint = v.get<std::string>();
    else if (key == "eval_steps") cfg.eval_steps = v.get<std::size_t>();
    else if (key == "repeats") cfg.repeats = v.get<std::size_t>();
    else if (key == "neurons") cfg.neurons = v.get<std::size_t>();
    else if (key == "density") cfg.density = v.get<double>();
    else if (key == "ratios") cfg.ratios = parse_list(v);
    else if (key == "drives") cfg.drives = parse_list(v);
    else if (key == "nets_per_point") cfg.nets_per_point = v.get<std::size_t>();
    else if (key == "duration") cfg.duration = v.get<double>();
    else if (key == "nout_values") cfg.nout_values = parse_list(v);
    else if (key == "betas") cfg.betas = parse_list(v);
    else if (key == "hidden") cfg.hidden = v.get<std::size_t>();
    else if (key == "alpha") cfg.alpha = v.get<double>();
    else if (key == "rl_batches") cfg.rl_batches = v.get<std::size_t>();
    else if (key == "target_reward") cfg.target_reward = v.get<double>();
    else if (key == "dataset") cfg.dataset = v.get<std::string>();
    else if (key == "out_dir") cfg.out_dir = v.get<std::string>();
    else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
    else if (key == "threads") cfg.threads = v.get<std::size_t>();
    else if (key == "quiet") cfg.quiet = v.get<bool>();
    else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void apply_json(ExperimentConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [key, value] : j.items()) assign_field(cfg, key, value);
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ExperimentConfig cfg;
    apply_json(cfg, text);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["preset"] = cfg.preset;
    j["model"] = cfg.model;
    j["ratio"] = cfg.ratio;
    j["beta"] = cfg.beta;
    j["n_steps"] = cfg.n_steps;
    j["dense_bias"] = cfg.dense_bias;
    j["encoding"] = cfg.encoding;
    j["loss"] = cfg.loss;
    j["n_out"] = cfg.n_out;
    j["optimizer"] = cfg.optimizer;
    j["lr"] = cfg.lr;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["train_limit"] = cfg.train_limit;
    j["test_limit"] = cfg.test_limit;
    j["checkpoint"] = cfg.checkpoint;
    j["eval_steps"] = cfg.eval_steps;
    j["repeats"] = cfg.repeats;
    j["neurons"] = cfg.neurons;
    j["density"] = cfg.density;
    j["ratios"] = cfg.ratios;
    j["drives"] = cfg.drives;
    j["nets_per_point"] = cfg.nets_per_point;
    j["duration"] = cfg.duration;
    j["nout_values"] = cfg.nout_values;
    j["betas"] = cfg.betas;
    j["hidden"] = cfg.hidden;
    j["alpha"] = cfg.alpha;
    j["rl_batches"] = cfg.rl_batches;
    j["target_reward"] = cfg.target_reward;
    j["dataset"] = cfg.dataset;
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["quiet"] = cfg.quiet;
    return j.dump(2);
}

ResolvedDataset resolve_dataset(const std::string& name) {
    ResolvedDataset out;
    if (name == "mnist" || name == "fmnist") {
        const char* env = std::getenv(name == "mnist" ? "SNN_MNIST_DIR" : "SNN_FMNIST_DIR");
        out.dir = env && *env ? env : (name == "mnist" ? "data/mnist" : "data/fmnist");
    } else {
        out.dir = name;
    }
    out.train = find_idx_pair(out.dir, true);
    out.test = find_idx_pair(out.dir, false);
    return out;
}

namespace {

CoarseModel model_from_name(const std::string& name) {
    if (name == "I" || name == "i" || name == "1") return CoarseModel::I;
    if (name == "II" || name == "ii" || name == "2") return CoarseModel::II;
    if (name == "III" || name == "iii" || name == "3") return CoarseModel::III;
    throw ConfigError("unknown coarse model '" + name + "' (expected I, II or III)");
}

struct RunDir {
    fs::path dir;

    explicit RunDir(const ExperimentConfig& cfg, const std::string& command) {
        dir = cfg.out_dir.empty() ? fs::path("runs") / command : fs::path(cfg.out_dir);
        fs::create_directories(dir);
        std::ofstream echo(dir / "config.json");
        echo << config_to_json(cfg) << "\n";
    }

    std::string file(const std::string& name) const { return (dir / name).string(); }

    void write_text(const std::string& name, const std::string& text) const {
        std::ofstream out(dir / name, std::ios::binary);
        out << text;
    }
};

std::string metrics_csv(const std::vector<EpochMetrics>& metrics) {
    std::string out = "epoch,loss,accuracy\n";
    char buf[96];
    for (const EpochMetrics& m : metrics) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", m.epoch, m.train_loss,
                      m.test_accuracy);
        out += buf;
    }
    return out;
}

json base_summary(const char* command, const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["seed"] = cfg.seed;
    return j;
}

std::string finish(const RunDir& run, json summary,
                   std::chrono::steady_clock::time_point start) {
    summary["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string text = summary.dump(2) + "\n";
    run.write_text("summary.json", text);
    return text;
}

IdxDataset load_or_fail(const IdxPaths& paths, const std::string& dir) {
    if (!paths.found())
        throw IdxError("dataset not found under '" + dir +
                       "' (expected train/t10k IDX files, optionally .gz)");
    return load_idx(paths.images, paths.labels);
}

void log_line(const ExperimentConfig& cfg, const std::string& line) {
    if (!cfg.quiet) std::fprintf(stderr, "%s\n", line.c_str());
}

}  // namespace

NetworkSpec spec_from_config(const ExperimentConfig& cfg) {
    PresetOptions opt;
    opt.model = model_from_name(cfg.model);
    opt.ratio = cfg.ratio;
    opt.beta = cfg.beta;
    opt.n_steps = cfg.n_steps;
    opt.dense_bias = cfg.dense_bias;
    opt.sensory_layer = cfg.encoding == "analog";
    return build_preset(cfg.preset, opt);
}

TrainConfig train_config_from(const ExperimentConfig& cfg) {
    TrainConfig t;
    t.epochs = cfg.epochs;
    t.batch_size = cfg.batch_size;
    if (cfg.optimizer == "adam") t.optimizer = OptimizerKind::Adam;
    else if (cfg.optimizer == "sgd") t.optimizer = OptimizerKind::Sgd;
    else throw ConfigError("unknown optimizer '" + cfg.optimizer + "'");
    t.lr = cfg.lr > 0 ? cfg.lr : (t.optimizer == OptimizerKind::Adam ? 1e-3 : 0.1);
    if (cfg.loss == "mse") t.loss.kind = LossKind::MseSpikeCount;
    else if (cfg.loss == "ce") t.loss.kind = LossKind::CrossEntropyActivity;
    else throw ConfigError("unknown loss '" + cfg.loss + "' (expected mse or ce)");
    t.loss.n_out = cfg.n_out;
    t.encoding = encoding_from_name(cfg.encoding);
    t.seed = cfg.seed;
    t.threads = cfg.threads;
    t.train_limit = cfg.train_limit;
    t.test_limit = cfg.test_limit;
    return t;
}

std::string train_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunDir run(cfg, "train");
    const ResolvedDataset data = resolve_dataset(cfg.dataset);
    const IdxDataset train_set = load_or_fail(data.train, data.dir);
    const IdxDataset test_set = load_or_fail(data.test, data.dir);

    const NetworkSpec spec = spec_from_config(cfg);
    TrainConfig tcfg = train_config_from(cfg);
    tcfg.log = [&](const std::string& s) { log_line(cfg, s); };
    const TrainResult result = train(spec, train_set, test_set, tcfg);

    run.write_text("metrics.csv", metrics_csv(result.metrics));
    json meta;
    meta["epochs"] = cfg.epochs;
    meta["beta"] = cfg.beta;
    meta["ratio"] = cfg.ratio;
    meta["n_out"] = cfg.n_out;
    meta["seed"] = cfg.seed;
    meta["encoding"] = cfg.encoding;
    meta["dataset"] = cfg.dataset;
    meta["init"] = "kaiming-uniform-fan-in";
    save_checkpoint({spec, result.params, meta.dump()}, run.file("model.ckpt"));

    json summary = base_summary("train", cfg);
    summary["final_train_loss"] = result.metrics.back().train_loss;
    summary["test_accuracy"] = result.metrics.back().test_accuracy;
    summary["checkpoint"] = run.file("model.ckpt");
    return finish(run, summary, start);
}

std::string eval_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.checkpoint.empty()) throw ConfigError("eval requires --checkpoint");
    RunDir run(cfg, "eval");
    const ModelCheckpoint ckpt = load_checkpoint(cfg.checkpoint);
    const ResolvedDataset data = resolve_dataset(cfg.dataset);
    const IdxDataset test_set = load_or_fail(data.test, data.dir);
    const std::size_t steps = cfg.eval_steps ? cfg.eval_steps : ckpt.spec.n_steps;
    const EvalResult ev =
        evaluate(ckpt.spec, ckpt.params, test_set, steps, encoding_from_name(cfg.encoding),
                 cfg.seed, cfg.threads, cfg.repeats, cfg.test_limit);

    std::string csv = "steps,accuracy,accuracy_std\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", steps, ev.accuracy, ev.accuracy_std);
    csv += buf;
    run.write_text("metrics.csv", csv);

    json summary = base_summary("eval", cfg);
    summary["eval_steps"] = steps;
    summary["accuracy"] = ev.accuracy;
    summary["accuracy_std"] = ev.accuracy_std;
    summary["repeats"] = cfg.repeats;
    return finish(run, summary, start);
}

std::string transfer_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.checkpoint.empty()) throw ConfigError("transfer requires --checkpoint");
    RunDir run(cfg, "transfer");
    const ModelCheckpoint ckpt = load_checkpoint(cfg.checkpoint);
    const ResolvedDataset data = resolve_dataset(cfg.dataset);
    const IdxDataset test_set = load_or_fail(data.test, data.dir);
    const std::size_t steps = cfg.eval_steps ? cfg.eval_steps : ckpt.spec.n_steps;
    const EncodingKind enc = encoding_from_name(cfg.encoding);

    const double coarse =
        evaluate(ckpt.spec, ckpt.params, test_set, steps, enc, cfg.seed, cfg.threads, 1,
                 cfg.test_limit)
            .accuracy;
    const double fine = fine_accuracy(ckpt.spec, ckpt.params, test_set, steps, enc, cfg.seed,
                                      cfg.threads, cfg.test_limit);

    std::string csv = "coarse_accuracy,fine_accuracy,gap\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", coarse, fine, coarse - fine);
    run.write_text("metrics.csv", csv + buf);

    json summary = base_summary("transfer", cfg);
    summary["coarse_accuracy"] = coarse;
    summary["fine_accuracy"] = fine;
    summary["gap_points"] = 100.0 * (coarse - fine);
    return finish(run, summary, start);
}

std::string validate_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunDir run(cfg, "validate");
    CorrelationExperimentSpec spec;
    spec.n_neurons = cfg.neurons;
    spec.density = cfg.density;
    spec.ratios = cfg.ratios;
    spec.drive_means = cfg.drives;
    spec.nets_per_point = cfg.nets_per_point;
    spec.duration = cfg.duration;
    spec.seed = cfg.seed;
    spec.threads = cfg.threads;
    const auto rows = correlation_experiment(spec);
    run.write_text("correlations.csv", correlation_csv(rows));

    std::vector<double> r1, r2, r3;
    for (const auto& r : rows)
        if (!r.degenerate) {
            r1.push_back(r.r_model_i);
            r2.push_back(r.r_model_ii);
            r3.push_back(r.r_model_iii);
        }
    auto med = [](std::vector<double> v) {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        return v.size() % 2 ? v[v.size() / 2]
                            : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    json summary = base_summary("validate", cfg);
    summary["networks"] = rows.size();
    summary["degenerate"] = rows.size() - r1.size();
    summary["median_r_I"] = med(r1);
    summary["median_r_II"] = med(r2);
    summary["median_r_III"] = med(r3);
    return finish(run, summary, start);
}

std::string sweep_nout_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunDir run(cfg, "sweep-nout");
    const ResolvedDataset data = resolve_dataset(cfg.dataset);
    const IdxDataset train_set = load_or_fail(data.train, data.dir);
    const IdxDataset test_set = load_or_fail(data.test, data.dir);
    const NetworkSpec spec = spec_from_config(cfg);
    TrainConfig tcfg = train_config_from(cfg);
    tcfg.log = [&](const std::string& s) { log_line(cfg, s); };
    const auto curve = nout_sweep(spec, train_set, test_set, cfg.nout_values, tcfg);

    std::string csv = "n_out,coarse_accuracy,fine_accuracy\n";
    char buf[96];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", p.n_out, p.coarse_accuracy,
                      p.fine_accuracy);
        csv += buf;
    }
    run.write_text("metrics.csv", csv);

    json summary = base_summary("sweep-nout", cfg);
    json points = json::array();
    double best_acc = 0, best_nout = 0;
    for (const auto& p : curve) {
        points.push_back({{"n_out", p.n_out},
                          {"coarse_accuracy", p.coarse_accuracy},
                          {"fine_accuracy", p.fine_accuracy}});
        if (p.coarse_accuracy > best_acc) {
            best_acc = p.coarse_accuracy;
            best_nout = p.n_out;
        }
    }
    summary["points"] = points;
    summary["best_n_out"] = best_nout;
    return finish(run, summary, start);
}

std::string sweep_beta_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunDir run(cfg, "sweep-beta");
    const ResolvedDataset data = resolve_dataset(cfg.dataset);
    const IdxDataset train_set = load_or_fail(data.train, data.dir);
    const IdxDataset test_set = load_or_fail(data.test, data.dir);
    TrainConfig tcfg = train_config_from(cfg);
    tcfg.log = [&](const std::string& s) { log_line(cfg, s); };
    PresetOptions opt;
    opt.model = model_from_name(cfg.model);
    opt.ratio = cfg.ratio;
    opt.n_steps = cfg.n_steps;
    opt.dense_bias = cfg.dense_bias;
    const auto table = beta_sweep(cfg.preset, train_set, test_set, cfg.betas, tcfg, opt);

    std::string csv = "beta,accuracy\n";
    char buf[64];
    for (const auto& p : table) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.beta, p.accuracy);
        csv += buf;
    }
    run.write_text("metrics.csv", csv);

    json summary = base_summary("sweep-beta", cfg);
    json points = json::array();
    for (const auto& p : table)
        points.push_back({{"beta", p.beta}, {"accuracy", p.accuracy}});
    summary["points"] = points;
    return finish(run, summary, start);
}

std::string rl_driver(const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    RunDir run(cfg, "rl");
    CemConfig cem;
    cem.policy.hidden = cfg.hidden;
    cem.policy.n_steps = cfg.n_steps;
    cem.policy.alpha = cfg.alpha;
    cem.policy.model = model_from_name(cfg.model);
    cem.policy.ratio = cfg.ratio;
    cem.policy.beta = cfg.beta;
    cem.max_batches = cfg.rl_batches;
    cem.target_reward = cfg.target_reward;
    cem.seed = cfg.seed;
    cem.threads = cfg.threads;
    cem.log = [&](const std::string& s) { log_line(cfg, s); };
    const CemResult result = cem_train(cem);

    std::string csv = "batch,mean_reward,p70_reward,moving_avg_100\n";
    char buf[128];
    for (const auto& b : result.curve) {
        std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g\n", b.batch, b.mean_reward,
                      b.p70_reward, b.moving_avg_100);
        csv += buf;
    }
    run.write_text("metrics.csv", csv);

    const NetworkSpec spec = build_policy_spec(cem.policy);
    json meta;
    meta["seed"] = cfg.seed;
    meta["alpha"] = cfg.alpha;
    meta["batches"] = result.batches_used;
    save_checkpoint({spec, result.params, meta.dump()}, run.file("policy.ckpt"));

    json summary = base_summary("rl", cfg);
    summary["solved"] = result.solved;
    summary["batches_used"] = result.batches_used;
    summary["final_moving_avg_100"] = result.curve.empty() ? 0.0
                                                           : result.curve.back().moving_avg_100;
    return finish(run, summary, start);
}

}  // namespace snn
