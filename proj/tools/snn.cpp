// Command-line surface for the spiking-network experiments: training,
// evaluation, fine-scale transfer, random-network validation, sweeps and the
// cartpole policy. Each run writes a self-contained output directory
// (config echo, metrics.csv, summary.json, checkpoints) so results can be
// reproduced exactly from the recorded seed.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "snn/checkpoint.hpp"
#include "snn/experiment.hpp"

namespace {

constexpr int kExitSuccess = 0;
constexpr int kExitUserError = 1;
constexpr int kExitRuntimeError = 2;

void add_common(CLI::App* cmd, snn::ExperimentConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "JSON config file supplying defaults");
    cmd->add_option("--seed", cfg.seed, "random seed; fully determines results");
    cmd->add_option("--threads", cfg.threads, "worker threads (1 = sequential reference)");
    cmd->add_option("--out", cfg.out_dir, "output directory (default runs/<command>)");
    cmd->add_flag("--quiet", cfg.quiet, "suppress progress logging");
}

void add_model_opts(CLI::App* cmd, snn::ExperimentConfig& cfg) {
    cmd->add_option("--preset", cfg.preset,
                    "shallow, lin-sp-lin-sp, conv-sp-lin-sp, conv-sp-conv-sp-lin-sp, "
                    "lenet5-spiking");
    cmd->add_option("--model", cfg.model, "coarse cell variant: I, II or III");
    cmd->add_option("--ratio", cfg.ratio, "tau / tau_r");
    cmd->add_option("--beta", cfg.beta, "surrogate steepness");
    cmd->add_option("--steps", cfg.n_steps, "spike train length N_sp");
    cmd->add_flag("--dense-bias", cfg.dense_bias, "biases on dense layers (lenet5)");
}

void add_train_opts(CLI::App* cmd, snn::ExperimentConfig& cfg) {
    cmd->add_option("--dataset", cfg.dataset, "mnist, fmnist, or an IDX directory");
    cmd->add_option("--encoding", cfg.encoding, "bernoulli, periodic, delay, analog");
    cmd->add_option("--loss", cfg.loss, "mse or ce");
    cmd->add_option("--nout", cfg.n_out, "target spike count for the correct class");
    cmd->add_option("--optimizer", cfg.optimizer, "adam or sgd");
    cmd->add_option("--lr", cfg.lr, "learning rate (0 = optimizer default)");
    cmd->add_option("--epochs", cfg.epochs, "training epochs");
    cmd->add_option("--batch", cfg.batch_size, "minibatch size");
    cmd->add_option("--train-limit", cfg.train_limit, "cap training samples (0 = all)");
    cmd->add_option("--test-limit", cfg.test_limit, "cap test samples (0 = all)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarse-scale spiking network training and validation"};
    app.require_subcommand(1);

    snn::ExperimentConfig cfg;
    std::string config_path;

    CLI::App* train = app.add_subcommand("train", "train a preset on a dataset");
    add_common(train, cfg, config_path);
    add_model_opts(train, cfg);
    add_train_opts(train, cfg);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval, cfg, config_path);
    eval->add_option("--checkpoint", cfg.checkpoint, "model checkpoint")->required();
    eval->add_option("--dataset", cfg.dataset, "mnist, fmnist, or an IDX directory");
    eval->add_option("--encoding", cfg.encoding, "bernoulli, periodic, delay, analog");
    eval->add_option("--steps", cfg.eval_steps, "test spike train length (0 = as trained)");
    eval->add_option("--repeats", cfg.repeats, "repeats for stochastic encodings");
    eval->add_option("--test-limit", cfg.test_limit, "cap test samples (0 = all)");

    CLI::App* transfer =
        app.add_subcommand("transfer", "compare coarse and fine-scale accuracy");
    add_common(transfer, cfg, config_path);
    transfer->add_option("--checkpoint", cfg.checkpoint, "model checkpoint")->required();
    transfer->add_option("--dataset", cfg.dataset, "mnist, fmnist, or an IDX directory");
    transfer->add_option("--encoding", cfg.encoding, "bernoulli, periodic, delay, analog");
    transfer->add_option("--steps", cfg.eval_steps,
                         "test spike train length (0 = as trained)");
    transfer->add_option("--test-limit", cfg.test_limit, "cap test samples (0 = all)");

    CLI::App* validate =
        app.add_subcommand("validate", "random-network coarse-vs-fine correlation");
    add_common(validate, cfg, config_path);
    validate->add_option("--neurons", cfg.neurons, "neurons per network");
    validate->add_option("--density", cfg.density, "connection probability");
    validate->add_option("--ratios", cfg.ratios, "tau/tau_r values")->delimiter(',');
    validate->add_option("--drives", cfg.drives, "mean drives in threshold units")
        ->delimiter(',');
    validate->add_option("--nets", cfg.nets_per_point, "networks per (ratio, drive) point");
    validate->add_option("--duration", cfg.duration, "simulated time in tau_r units");

    CLI::App* sweep_beta = app.add_subcommand("sweep-beta", "accuracy vs surrogate slope");
    add_common(sweep_beta, cfg, config_path);
    add_model_opts(sweep_beta, cfg);
    add_train_opts(sweep_beta, cfg);
    sweep_beta->add_option("--betas", cfg.betas, "slope values")->delimiter(',');

    CLI::App* sweep_nout =
        app.add_subcommand("sweep-nout", "accuracy vs target output spike count");
    add_common(sweep_nout, cfg, config_path);
    add_model_opts(sweep_nout, cfg);
    add_train_opts(sweep_nout, cfg);
    sweep_nout->add_option("--nouts", cfg.nout_values, "target counts")->delimiter(',');

    CLI::App* rl = app.add_subcommand("rl", "cartpole policy via the cross-entropy method");
    add_common(rl, cfg, config_path);
    rl->add_option("--model", cfg.model, "coarse cell variant");
    rl->add_option("--ratio", cfg.ratio, "tau / tau_r");
    rl->add_option("--beta", cfg.beta, "surrogate steepness");
    rl->add_option("--steps", cfg.n_steps, "spike train length per decision");
    rl->add_option("--hidden", cfg.hidden, "hidden spiking neurons");
    rl->add_option("--alpha", cfg.alpha, "output count scaling");
    rl->add_option("--batches", cfg.rl_batches, "batch cap");
    rl->add_option("--target", cfg.target_reward, "100-episode solve threshold");

    try {
        app.parse(argc, argv);
        // A config file supplies defaults; explicit flags override. Re-parse
        // over the file-loaded config so only flags present in argv win.
        if (!config_path.empty()) {
            cfg = snn::config_from_json_file(config_path);
            app.clear();
            app.parse(argc, argv);
        }
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitSuccess : kExitUserError;
    } catch (const snn::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUserError;
    }

    CLI::App* active = app.get_subcommands().front();
    try {
        std::string summary;
        const std::string name = active->get_name();
        if (name == "train") summary = snn::train_driver(cfg);
        else if (name == "eval") summary = snn::eval_driver(cfg);
        else if (name == "transfer") summary = snn::transfer_driver(cfg);
        else if (name == "validate") summary = snn::validate_driver(cfg);
        else if (name == "sweep-beta") summary = snn::sweep_beta_driver(cfg);
        else if (name == "sweep-nout") summary = snn::sweep_nout_driver(cfg);
        else summary = snn::rl_driver(cfg);
        std::fputs(summary.c_str(), stdout);
        return kExitSuccess;
    } catch (const snn::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUserError;
    } catch (const snn::IdxError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUserError;
    } catch (const snn::CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUserError;
    } catch (const snn::NetworkError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUserError;
    } catch (const snn::EncoderError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUserError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return kExitRuntimeError;
    }
}
