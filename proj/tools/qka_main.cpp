#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qka/config.hpp"

namespace {

using namespace qka;

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
    out << text;
}

int run_command(const CliConfig& cfg) {
    if (cfg.format != "json")
        throw ConfigError("run emits JSON only; --format " + cfg.format + " is not supported");
    const auto attack = build_attack(cfg);
    RunRecord rec;
    try {
        rec = run_protocol(cfg.params, attack);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    write_output(run_record_to_string(rec), cfg.out);
    return 0;
}

int sweep_command(const CliConfig& cfg) {
    if (cfg.sweep.empty()) throw ConfigError("sweep requires a sweep parameter (--sweep)");
    if (cfg.format != "json" && cfg.format != "csv")
        throw ConfigError("format must be json or csv, got '" + cfg.format + "'");
    const ExperimentPlan plan = build_plan(cfg);
    const ExperimentResult result = run_experiment(plan, cfg.workers);
    if (cfg.format == "csv")
        write_output(experiment_to_csv(result), cfg.out);
    else
        write_output(experiment_to_json(result).dump(2) + "\n", cfg.out);
    return 0;
}

int efficiency_command(const CliConfig& cfg) {
    if (cfg.format != "json")
        throw ConfigError("efficiency emits JSON only; --format " + cfg.format +
                          " is not supported");
    EfficiencyReport paper, exact;
    try {
        paper = efficiency(cfg.params, EfficiencyConvention::Paper);
        exact = efficiency(cfg.params, EfficiencyConvention::Exact);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    write_output(efficiency_to_json(paper, exact).dump(2) + "\n", cfg.out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-party quantum key agreement simulator and security benchmark"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "flat key = value configuration file");

    // Flag twins for every configuration key; flags win over the config file,
    // which wins over the QKA_SEED environment variable.
    int m = 8, l = 2, decoys = 16, check_sample = 0, trials = 1000, workers = 1;
    uint64_t seed = 0;
    double threshold = 0.10, flip_prob = 0.0, confidence_z = 3.0;
    bool wavelength_filter = false, pns = false;
    std::string attack = "none", hops, eve_unitary = "cnot", colluders = "AC";
    std::string strategy = "naive-align", resend_dist = "0.25,0.25,0.25,0.25";
    std::string sweep, sweep_values, format = "json", out;

    auto* om = app.add_option("--m", m, "Bell pairs per ring")->capture_default_str();
    auto* ol = app.add_option("--l", l, "inserted single photons per ring")->capture_default_str();
    auto* od = app.add_option("--decoys", decoys, "decoy photons per hop (kn)")->capture_default_str();
    auto* ot = app.add_option("--threshold", threshold, "decoy QBER abort threshold")
                   ->capture_default_str();
    auto* ocs = app.add_option("--check-sample", check_sample,
                               "verification sample size (default: 10% of key bits)");
    auto* os = app.add_option("--seed", seed, "master seed (default: $QKA_SEED or 0)");
    auto* ofp = app.add_option("--flip-prob", flip_prob, "per-photon channel flip probability")
                    ->capture_default_str();
    auto* owf = app.add_flag("--wavelength-filter", wavelength_filter,
                             "install the Trojan-horse wavelength filter");
    auto* opns = app.add_flag("--pns", pns, "install the Trojan-horse photon number splitter");
    auto* oa = app.add_option("--attack", attack,
                              "none | intercept-resend | measure-resend | entangle-measure | "
                              "trojan | inside-collusion")
                   ->capture_default_str();
    auto* oh = app.add_option("--hops", hops, "targeted hops, e.g. A1,B2 or 'all'");
    auto* oeu = app.add_option("--eve-unitary", eve_unitary,
                               "entangle-measure unitary: identity | cnot | random:<seed>")
                    ->capture_default_str();
    auto* oc = app.add_option("--colluders", colluders, "colluding pair, e.g. AC")
                   ->capture_default_str();
    auto* ost = app.add_option("--strategy", strategy, "naive-align | random-pairing")
                    ->capture_default_str();
    auto* ord = app.add_option("--resend-dist", resend_dist,
                               "intercept-resend weights over |0>,|1>,|+>,|->")
                   ->capture_default_str();
    auto* otr = app.add_option("--trials", trials, "Monte Carlo trials per sweep point")
                    ->capture_default_str();
    auto* osw = app.add_option("--sweep", sweep,
                               "sweep parameter: decoy_count | channel_flip_prob | m | l | "
                               "qber_threshold");
    auto* osv = app.add_option("--values", sweep_values, "comma-separated sweep values");
    auto* oz = app.add_option("--confidence-z", confidence_z, "binomial interval z multiplier")
                   ->capture_default_str();
    auto* ow = app.add_option("--workers", workers, "trial-loop worker threads")
                   ->capture_default_str();
    auto* ofm = app.add_option("--format", format, "json | csv (sweep only)")
                    ->capture_default_str();
    auto* oo = app.add_option("--out", out, "output path (default: stdout)");

    auto* cmd_run = app.add_subcommand("run", "execute one protocol run and print its transcript");
    auto* cmd_sweep = app.add_subcommand("sweep", "run a Monte Carlo experiment plan");
    auto* cmd_eff = app.add_subcommand("efficiency", "report Cabello efficiency conventions");

    CLI11_PARSE(app, argc, argv);

    try {
        CliConfig cfg;
        if (const char* env_seed = std::getenv("QKA_SEED"))
            apply_config_entry(cfg, "seed", env_seed, "$QKA_SEED");
        if (!config_path.empty()) apply_config_file(cfg, config_path);

        if (om->count()) cfg.params.m = m;
        if (ol->count()) cfg.params.l = l;
        if (od->count()) cfg.params.decoy_count = decoys;
        if (ot->count()) cfg.params.qber_threshold = threshold;
        if (ocs->count()) cfg.params.check_sample_size = check_sample;
        if (os->count()) cfg.params.seed = seed;
        if (ofp->count()) cfg.params.channel_flip_prob = flip_prob;
        if (owf->count()) cfg.params.wavelength_filter = wavelength_filter;
        if (opns->count()) cfg.params.photon_number_splitter = pns;
        if (oa->count()) cfg.attack = attack;
        if (oh->count()) cfg.hops = hops;
        if (oeu->count()) cfg.eve_unitary = eve_unitary;
        if (oc->count()) cfg.colluders = colluders;
        if (ost->count()) cfg.strategy = strategy;
        if (ord->count()) cfg.resend_distribution = resend_dist;
        if (otr->count()) cfg.trials = trials;
        if (osw->count()) cfg.sweep = sweep;
        if (osv->count()) cfg.sweep_values = sweep_values;
        if (oz->count()) cfg.confidence_z = confidence_z;
        if (ow->count()) cfg.workers = workers;
        if (ofm->count()) cfg.format = format;
        if (oo->count()) cfg.out = out;

        try {
            cfg.params.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }

        if (cmd_run->parsed()) return run_command(cfg);
        if (cmd_sweep->parsed()) return sweep_command(cfg);
        if (cmd_eff->parsed()) return efficiency_command(cfg);
        return 2;
    } catch (const qka::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
