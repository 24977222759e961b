#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "jsde/experiments.hpp"

using nlohmann::json;

namespace {

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string output_dir = ".";
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Override the config seed");
    cmd->add_option("--threads", flags.threads, "Worker threads (results invariant)");
    cmd->add_option("--output-dir", flags.output_dir, "Directory for artifacts");
}

int dispatch(const json& config, const CommonFlags& flags) {
    jsde::RunOptions opts;
    opts.seed_override = flags.seed;
    opts.threads = flags.threads;
    opts.output_dir = flags.output_dir;
    return jsde::run_experiment(config, opts, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jsde: jump-type SDE simulation and verification"};
    app.require_subcommand(1);

    // run --config file.json
    CommonFlags run_flags;
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment from a JSON config");
    run_cmd->add_option("--config", config_path, "Experiment config file")->required();
    add_common(run_cmd, run_flags);

    // convenience subcommands assemble the same config objects
    CommonFlags yw_flags;
    int k_max = 10;
    double yw_tol = 1e-12;
    std::string yw_output = "yw_verify.csv";
    auto* yw_cmd = app.add_subcommand("yw-verify", "Verify the phi_k property table");
    yw_cmd->add_option("--k-max", k_max, "Largest index k");
    yw_cmd->add_option("--tol", yw_tol, "Violation tolerance");
    yw_cmd->add_option("--output", yw_output, "Output CSV");
    add_common(yw_cmd, yw_flags);

    CommonFlags cond_flags;
    std::string cond_model = "bertoin_legall";
    std::string cond_case = "i";
    int cond_m = 1;
    std::uint64_t cond_seed = 1;
    std::string cond_output = "conditions.csv";
    auto* cond_cmd =
        app.add_subcommand("conditions-check", "Probe the coefficient conditions");
    cond_cmd->add_option("--model", cond_model, "Built-in model name");
    cond_cmd->add_option("--case", cond_case, "Certificate case: i or ii");
    cond_cmd->add_option("--m", cond_m, "State radius m");
    cond_cmd->add_option("--run-seed", cond_seed, "Mark sampling seed");
    cond_cmd->add_option("--output", cond_output, "Output CSV");
    add_common(cond_cmd, cond_flags);

    CommonFlags mart_flags;
    std::string mart_model = "bertoin_legall";
    std::string mart_f = "cos";
    double mart_t = 1.0;
    double mart_x0 = 0.5;
    double mart_h = 0.0009765625;  // 2^-10
    int mart_paths = 10000;
    std::uint64_t mart_seed = 1;
    int mart_n0 = 1, mart_n1 = 0;
    std::string mart_output = "martingale.json";
    auto* mart_cmd =
        app.add_subcommand("martingale-check", "Monte Carlo martingale residual");
    mart_cmd->add_option("--model", mart_model, "Built-in model name");
    mart_cmd->add_option("--f", mart_f, "Test function: cos|capped-linear|gaussian-bump");
    mart_cmd->add_option("--t", mart_t, "Horizon");
    mart_cmd->add_option("--x0", mart_x0, "Initial value");
    mart_cmd->add_option("--step", mart_h, "Grid step");
    mart_cmd->add_option("--paths", mart_paths, "Number of paths");
    mart_cmd->add_option("--n0", mart_n0, "Retained mu0 layers");
    mart_cmd->add_option("--n1", mart_n1, "Retained mu1 layers");
    mart_cmd->add_option("--run-seed", mart_seed, "Ensemble seed");
    mart_cmd->add_option("--output", mart_output, "Output JSON");
    add_common(mart_cmd, mart_flags);

    CommonFlags sim_flags;
    std::string sim_model = "bertoin_legall";
    double sim_x0 = 0.5, sim_T = 1.0, sim_h = 0.015625;
    int sim_n0 = 1, sim_n1 = 0, sim_paths = 1;
    std::uint64_t sim_seed = 1;
    std::string sim_output = "paths.csv";
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate sample paths");
    sim_cmd->add_option("--model", sim_model, "Built-in model name");
    sim_cmd->add_option("--x0", sim_x0, "Initial value");
    sim_cmd->add_option("--horizon", sim_T, "Horizon");
    sim_cmd->add_option("--step", sim_h, "Grid step");
    sim_cmd->add_option("--n0", sim_n0, "Retained mu0 layers");
    sim_cmd->add_option("--n1", sim_n1, "Retained mu1 layers");
    sim_cmd->add_option("--paths", sim_paths, "Number of paths");
    sim_cmd->add_option("--run-seed", sim_seed, "Noise seed");
    sim_cmd->add_option("--output", sim_output, "Output CSV");
    add_common(sim_cmd, sim_flags);

    CommonFlags uniq_flags;
    std::string uniq_model = "h_alpha";
    double uniq_x0 = 1.0, uniq_T = 1.0;
    int uniq_coarse = 4, uniq_fine = 12;
    std::uint64_t uniq_seed = 1;
    std::string uniq_output = "uniqueness.csv";
    auto* uniq_cmd = app.add_subcommand(
        "uniqueness", "Cauchy-in-step-size experiment on one coupled noise");
    uniq_cmd->add_option("--model", uniq_model, "Built-in model name");
    uniq_cmd->add_option("--x0", uniq_x0, "Initial value");
    uniq_cmd->add_option("--horizon", uniq_T, "Horizon");
    uniq_cmd->add_option("--coarse", uniq_coarse, "Coarsest step exponent (h = 2^-k)");
    uniq_cmd->add_option("--fine", uniq_fine, "Finest step exponent");
    uniq_cmd->add_option("--run-seed", uniq_seed, "Noise seed");
    uniq_cmd->add_option("--output", uniq_output, "Output CSV");
    add_common(uniq_cmd, uniq_flags);

    CommonFlags mom_flags;
    std::string mom_model = "bertoin_legall";
    double mom_x0 = 0.5, mom_T = 1.0, mom_K = 1.0, mom_h = 0.00390625;
    int mom_paths = 10000, mom_n0 = 1, mom_n1 = 0;
    std::uint64_t mom_seed = 1;
    std::string mom_output = "moment.json";
    auto* mom_cmd = app.add_subcommand("moment-check", "Second-moment bound check");
    mom_cmd->add_option("--model", mom_model, "Built-in model name");
    mom_cmd->add_option("--x0", mom_x0, "Initial value");
    mom_cmd->add_option("--horizon", mom_T, "Horizon");
    mom_cmd->add_option("--K", mom_K, "Linear growth constant");
    mom_cmd->add_option("--step", mom_h, "Grid step");
    mom_cmd->add_option("--paths", mom_paths, "Number of paths");
    mom_cmd->add_option("--n0", mom_n0, "Retained mu0 layers");
    mom_cmd->add_option("--n1", mom_n1, "Retained mu1 layers");
    mom_cmd->add_option("--run-seed", mom_seed, "Ensemble seed");
    mom_cmd->add_option("--output", mom_output, "Output JSON");
    add_common(mom_cmd, mom_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "config error: cannot open " << config_path << "\n";
                return 2;
            }
            json config;
            try {
                in >> config;
            } catch (const json::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            return dispatch(config, run_flags);
        }
        if (yw_cmd->parsed()) {
            json config = {{"experiment", "yw-verify"},
                           {"k_max", k_max},
                           {"tol", yw_tol},
                           {"output", yw_output}};
            return dispatch(config, yw_flags);
        }
        if (cond_cmd->parsed()) {
            json config = {{"experiment", "conditions-check"},
                           {"model", {{"name", cond_model}}},
                           {"case", cond_case},
                           {"m", cond_m},
                           {"seed", cond_seed},
                           {"output", cond_output}};
            return dispatch(config, cond_flags);
        }
        if (mart_cmd->parsed()) {
            json config = {{"experiment", "martingale-check"},
                           {"model", {{"name", mart_model}}},
                           {"trunc", {{"n0", mart_n0}, {"n1", mart_n1}, {"h", mart_h}}},
                           {"f", mart_f},
                           {"x0", mart_x0},
                           {"horizon", mart_t},
                           {"n_paths", mart_paths},
                           {"seed", mart_seed},
                           {"output", mart_output}};
            return dispatch(config, mart_flags);
        }
        if (sim_cmd->parsed()) {
            json config = {{"experiment", "simulate"},
                           {"model", {{"name", sim_model}}},
                           {"trunc", {{"n0", sim_n0}, {"n1", sim_n1}, {"h", sim_h}}},
                           {"x0", sim_x0},
                           {"horizon", sim_T},
                           {"n_paths", sim_paths},
                           {"seed", sim_seed},
                           {"output", sim_output}};
            return dispatch(config, sim_flags);
        }
        if (uniq_cmd->parsed()) {
            json levels = json::array();
            for (int k = uniq_coarse; k <= uniq_fine; ++k) {
                levels.push_back(std::ldexp(1.0, -k));
            }
            json config = {{"experiment", "uniqueness"},
                           {"model", {{"name", uniq_model}}},
                           {"trunc", {{"n0", 1}, {"n1", 0}, {"h", std::ldexp(1.0, -uniq_fine)}}},
                           {"x0", uniq_x0},
                           {"horizon", uniq_T},
                           {"levels", levels},
                           {"seed", uniq_seed},
                           {"output", uniq_output}};
            return dispatch(config, uniq_flags);
        }
        if (mom_cmd->parsed()) {
            json config = {{"experiment", "moment-check"},
                           {"model", {{"name", mom_model}}},
                           {"trunc", {{"n0", mom_n0}, {"n1", mom_n1}, {"h", mom_h}}},
                           {"x0", mom_x0},
                           {"horizon", mom_T},
                           {"n_paths", mom_paths},
                           {"K", mom_K},
                           {"seed", mom_seed},
                           {"output", mom_output}};
            return dispatch(config, mom_flags);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
