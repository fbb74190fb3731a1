#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qka/protocol.hpp"

namespace qka {

enum class SweepParam { None, DecoyCount, ChannelFlipProb, M, L, QberThreshold };

std::string sweep_param_name(SweepParam p);
SweepParam sweep_param_from_name(std::string_view name);

struct ExperimentPlan {
    ProtocolParams base;
    std::optional<AttackDescriptor> attack;
    int trials = 1;
    SweepParam sweep = SweepParam::None;
    std::vector<double> sweep_values;
    double confidence_z = 3.0; // binomial interval multiplier

    void validate() const;
};

struct SweepPointResult {
    std::optional<double> sweep_value;
    int trials = 0;
    // Fraction of trials aborted at a decoy check (the paper's detection event).
    double detection_rate = 0;
    double ci_low = 0;
    double ci_high = 0;
    std::optional<double> analytic; // closed form, resend attacks only
    double mean_qber = 0;           // mean decoy error over all performed checks
    std::array<std::optional<double>, 9> hop_mean_qber;
    std::optional<double> key_agreement_rate;   // among runs that reached decoding
    std::optional<double> verify_failure_rate;  // among runs that reached decoding
    std::optional<double> mean_key_length;
    std::optional<double> eve_mean_bits_beyond_chance;
    std::optional<double> eve_position_guess_rate;
    double eta_paper = 0;
    double eta_exact = 0;
};

struct ExperimentResult {
    ExperimentPlan plan;
    std::vector<SweepPointResult> points;
};

// 1-(1/2)^kn for intercept-resend, 1-(3/4)^kn for measure-resend; no closed
// form exists for the other kinds.
double analytic_detection(AttackKind kind, int kn);

// Trials draw per-trial seeds derive_seed(master, point_index, trial_index),
// so the result is identical whichever path executes them.
ExperimentResult run_experiment_serial(const ExperimentPlan& plan);
ExperimentResult run_experiment_parallel(const ExperimentPlan& plan, int workers);
ExperimentResult run_experiment(const ExperimentPlan& plan, int workers = 1);

ProtocolParams apply_sweep(ProtocolParams base, SweepParam param, double value);

enum class EfficiencyConvention { Paper, Exact };

struct EfficiencyReport {
    EfficiencyConvention convention;
    double c;   // final key bits (expected)
    double q;   // transmitted qubits counted under the convention
    double b;   // classical bits counted under the convention
    double eta; // c / (q + b)
};

// Paper convention: one ring's payload transmissions (m + 2n qubits), no
// decoys, no classical bits.  Exact convention: all nine hops including
// decoys, plus announced position/basis/state bits.
EfficiencyReport efficiency(const ProtocolParams& params, EfficiencyConvention convention);

// Expected size of the union of three independent uniform l-subsets of [0,n).
double expected_union_size(int n, int l);

enum class QberBand { NoiseBand, InBetween, AttackRange, NoData };

struct QberRow {
    std::string hop;
    std::optional<double> rate;
    QberBand band;
};

// Flags each hop's mean decoy error against the 8.9% channel-noise ceiling
// and the 25% attack floor.
std::vector<std::vector<QberRow>> qber_report(const ExperimentResult& result);
std::string qber_band_name(QberBand band);

std::string experiment_to_csv(const ExperimentResult& result);
nlohmann::ordered_json experiment_to_json(const ExperimentResult& result);
nlohmann::ordered_json efficiency_to_json(const EfficiencyReport& paper,
                                          const EfficiencyReport& exact);

} // namespace qka
