#include "qka/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <omp.h>

namespace qka {

using nlohmann::ordered_json;

std::string sweep_param_name(SweepParam p) {
    switch (p) {
    case SweepParam::None: return "none";
    case SweepParam::DecoyCount: return "decoy_count";
    case SweepParam::ChannelFlipProb: return "channel_flip_prob";
    case SweepParam::M: return "m";
    case SweepParam::L: return "l";
    case SweepParam::QberThreshold: return "qber_threshold";
    }
    throw std::logic_error("unreachable");
}

SweepParam sweep_param_from_name(std::string_view name) {
    if (name.empty() || name == "none") return SweepParam::None;
    if (name == "decoy_count") return SweepParam::DecoyCount;
    if (name == "channel_flip_prob") return SweepParam::ChannelFlipProb;
    if (name == "m") return SweepParam::M;
    if (name == "l") return SweepParam::L;
    if (name == "qber_threshold") return SweepParam::QberThreshold;
    throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "'");
}

void ExperimentPlan::validate() const {
    base.validate();
    if (attack) attack->validate();
    if (trials < 1) throw std::invalid_argument("plan: trials must be >= 1");
    if (confidence_z < 0) throw std::invalid_argument("plan: confidence_z must be >= 0");
    if (sweep == SweepParam::None && !sweep_values.empty())
        throw std::invalid_argument("plan: sweep values given without a sweep parameter");
    if (sweep != SweepParam::None && sweep_values.empty())
        throw std::invalid_argument("plan: sweep parameter given without values");
    for (const double v : sweep_values) apply_sweep(base, sweep, v); // value validation
}

namespace {

int integral_value(double v, const char* what) {
    const double r = std::nearbyint(v);
    if (std::abs(v - r) > 1e-9)
        throw std::invalid_argument(std::string("sweep value for ") + what +
                                    " must be an integer, got " + std::to_string(v));
    return static_cast<int>(r);
}

} // namespace

ProtocolParams apply_sweep(ProtocolParams base, SweepParam param, double value) {
    switch (param) {
    case SweepParam::None: break;
    case SweepParam::DecoyCount: base.decoy_count = integral_value(value, "decoy_count"); break;
    case SweepParam::ChannelFlipProb: base.channel_flip_prob = value; break;
    case SweepParam::M: base.m = integral_value(value, "m"); break;
    case SweepParam::L: base.l = integral_value(value, "l"); break;
    case SweepParam::QberThreshold: base.qber_threshold = value; break;
    }
    base.validate();
    return base;
}

double analytic_detection(AttackKind kind, int kn) {
    if (kn < 0) throw std::invalid_argument("analytic_detection: kn must be >= 0");
    switch (kind) {
    case AttackKind::InterceptResend: return 1.0 - std::pow(0.5, kn);
    case AttackKind::MeasureResend: return 1.0 - std::pow(0.75, kn);
    default:
        throw std::invalid_argument("no closed-form detection probability for " +
                                    attack_kind_name(kind));
    }
}

double expected_union_size(int n, int l) {
    if (l <= 0) return 0.0;
    const double keep = static_cast<double>(n - l) / static_cast<double>(n);
    return static_cast<double>(n) * (1.0 - keep * keep * keep);
}

namespace {

int ceil_log2(int n) {
    int bits = 0;
    while ((1 << bits) < n) ++bits;
    return bits;
}

} // namespace

EfficiencyReport efficiency(const ProtocolParams& params, EfficiencyConvention convention) {
    params.validate();
    const int n = params.n();
    const double c = 2.0 * n - expected_union_size(n, params.l);
    double q, b;
    if (convention == EfficiencyConvention::Paper) {
        q = params.m + 2.0 * n;
        b = 0.0;
    } else {
        q = 3.0 * (params.m + 2.0 * n + 3.0 * params.decoy_count);
        const double pos_bits = ceil_log2(n);
        b = 3.0 * params.l * pos_bits + 9.0 * params.decoy_count * (pos_bits + 2.0);
    }
    return {convention, c, q, b, c / (q + b)};
}

namespace {

struct TrialSummary {
    bool decoy_abort = false;
    bool completed = false; // reached decoding
    bool keys_equal = false;
    bool verify_passed = false;
    int key_length = 0;
    std::array<double, 9> hop_err{};
    std::array<uint8_t, 9> hop_present{};
    bool eve_bits_present = false;
    double eve_bits_beyond = 0;
    bool pos_guess_present = false;
    bool pos_guess_correct = false;
};

TrialSummary summarize(const RunRecord& rec) {
    TrialSummary s;
    s.decoy_abort = rec.aborted && rec.abort_stage &&
                    rec.abort_stage->rfind("decoy_check", 0) == 0;
    s.completed = !rec.derived_keys.empty();
    if (s.completed) {
        s.keys_equal = rec.derived_keys.size() == 3 &&
                       rec.derived_keys[0].bits == rec.derived_keys[1].bits &&
                       rec.derived_keys[1].bits == rec.derived_keys[2].bits;
        s.verify_passed = rec.check_passed.value_or(false);
        s.key_length = static_cast<int>(rec.derived_keys[0].bits.size());
    }
    for (size_t h = 0; h < 9; ++h) {
        if (rec.decoy_error_rates[h]) {
            s.hop_err[h] = *rec.decoy_error_rates[h];
            s.hop_present[h] = 1;
        }
    }
    if (rec.eve && rec.eve->bits_correct_beyond_chance) {
        s.eve_bits_present = true;
        s.eve_bits_beyond = *rec.eve->bits_correct_beyond_chance;
    }
    if (rec.eve && rec.eve->position_guess_correct) {
        s.pos_guess_present = true;
        s.pos_guess_correct = *rec.eve->position_guess_correct;
    }
    return s;
}

// The data-parallel kernel: independent trials with derived seeds.  The
// serial path is the reference; the OpenMP path must produce the identical
// summary vector, which the aggregation then consumes in index order.
std::vector<TrialSummary> run_point_trials(const ProtocolParams& point_params,
                                           const std::optional<AttackDescriptor>& attack,
                                           uint64_t master_seed, size_t point_index, int trials,
                                           int workers) {
    std::vector<TrialSummary> out(static_cast<size_t>(trials));
    auto one_trial = [&](int t) {
        ProtocolParams p = point_params;
        p.seed = derive_seed(master_seed, point_index, static_cast<uint64_t>(t));
        return summarize(run_protocol(p, attack));
    };

    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) out[static_cast<size_t>(t)] = one_trial(t);
        return out;
    }

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16) num_threads(workers)
    for (int t = 0; t < trials; ++t) {
        try {
            out[static_cast<size_t>(t)] = one_trial(t);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

SweepPointResult aggregate(const std::vector<TrialSummary>& ts, std::optional<double> sweep_value,
                           const ProtocolParams& point_params,
                           const std::optional<AttackDescriptor>& attack, double z) {
    SweepPointResult r;
    r.sweep_value = sweep_value;
    r.trials = static_cast<int>(ts.size());

    int detected = 0, completed = 0, equal = 0, verify_fail = 0;
    double key_len_sum = 0;
    std::array<double, 9> hop_sum{};
    std::array<int, 9> hop_count{};
    double qber_sum = 0;
    int qber_count = 0;
    double eve_bits_sum = 0;
    int eve_bits_count = 0;
    int pos_guesses = 0, pos_correct = 0;

    for (const TrialSummary& t : ts) {
        detected += t.decoy_abort ? 1 : 0;
        if (t.completed) {
            ++completed;
            equal += t.keys_equal ? 1 : 0;
            verify_fail += t.verify_passed ? 0 : 1;
            key_len_sum += t.key_length;
        }
        for (size_t h = 0; h < 9; ++h) {
            if (t.hop_present[h]) {
                hop_sum[h] += t.hop_err[h];
                ++hop_count[h];
                qber_sum += t.hop_err[h];
                ++qber_count;
            }
        }
        if (t.eve_bits_present) {
            eve_bits_sum += t.eve_bits_beyond;
            ++eve_bits_count;
        }
        if (t.pos_guess_present) {
            ++pos_guesses;
            pos_correct += t.pos_guess_correct ? 1 : 0;
        }
    }

    const double nt = static_cast<double>(r.trials);
    r.detection_rate = detected / nt;
    const double sigma = std::sqrt(r.detection_rate * (1.0 - r.detection_rate) / nt);
    r.ci_low = std::max(0.0, r.detection_rate - z * sigma);
    r.ci_high = std::min(1.0, r.detection_rate + z * sigma);

    if (attack && (attack->kind == AttackKind::InterceptResend ||
                   attack->kind == AttackKind::MeasureResend))
        r.analytic = analytic_detection(attack->kind, point_params.decoy_count);

    r.mean_qber = qber_count ? qber_sum / qber_count : 0.0;
    for (size_t h = 0; h < 9; ++h)
        if (hop_count[h]) r.hop_mean_qber[h] = hop_sum[h] / hop_count[h];

    if (completed > 0) {
        r.key_agreement_rate = static_cast<double>(equal) / completed;
        r.verify_failure_rate = static_cast<double>(verify_fail) / completed;
        r.mean_key_length = key_len_sum / completed;
    }
    if (eve_bits_count > 0) r.eve_mean_bits_beyond_chance = eve_bits_sum / eve_bits_count;
    if (pos_guesses > 0) r.eve_position_guess_rate = static_cast<double>(pos_correct) / pos_guesses;

    r.eta_paper = efficiency(point_params, EfficiencyConvention::Paper).eta;
    r.eta_exact = efficiency(point_params, EfficiencyConvention::Exact).eta;
    return r;
}

ExperimentResult run_experiment_impl(const ExperimentPlan& plan, int workers) {
    plan.validate();
    ExperimentResult result;
    result.plan = plan;

    std::vector<std::optional<double>> values;
    if (plan.sweep == SweepParam::None) {
        values.push_back(std::nullopt);
    } else {
        for (const double v : plan.sweep_values) values.push_back(v);
    }

    for (size_t pi = 0; pi < values.size(); ++pi) {
        const ProtocolParams point_params =
            values[pi] ? apply_sweep(plan.base, plan.sweep, *values[pi]) : plan.base;
        const auto summaries =
            run_point_trials(point_params, plan.attack, plan.base.seed, pi, plan.trials, workers);
        result.points.push_back(
            aggregate(summaries, values[pi], point_params, plan.attack, plan.confidence_z));
    }
    return result;
}

} // namespace

ExperimentResult run_experiment_serial(const ExperimentPlan& plan) {
    return run_experiment_impl(plan, 1);
}

ExperimentResult run_experiment_parallel(const ExperimentPlan& plan, int workers) {
    return run_experiment_impl(plan, std::max(2, workers));
}

ExperimentResult run_experiment(const ExperimentPlan& plan, int workers) {
    return workers <= 1 ? run_experiment_serial(plan) : run_experiment_parallel(plan, workers);
}

std::vector<std::vector<QberRow>> qber_report(const ExperimentResult& result) {
    std::vector<std::vector<QberRow>> report;
    for (const SweepPointResult& point : result.points) {
        std::vector<QberRow> rows;
        for (int r = 0; r < 3; ++r) {
            for (int leg = 1; leg <= 3; ++leg) {
                const Hop hop{static_cast<Ring>(r), leg};
                QberRow row{hop.to_string(), point.hop_mean_qber[static_cast<size_t>(hop.index())],
                            QberBand::NoData};
                if (row.rate) {
                    if (*row.rate >= 0.25)
                        row.band = QberBand::AttackRange;
                    else if (*row.rate <= 0.089)
                        row.band = QberBand::NoiseBand;
                    else
                        row.band = QberBand::InBetween;
                }
                rows.push_back(std::move(row));
            }
        }
        report.push_back(std::move(rows));
    }
    return report;
}

std::string qber_band_name(QberBand band) {
    switch (band) {
    case QberBand::NoiseBand: return "noise-band";
    case QberBand::InBetween: return "in-between";
    case QberBand::AttackRange: return "attack-range";
    case QberBand::NoData: return "no-data";
    }
    throw std::logic_error("unreachable");
}

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

} // namespace

std::string experiment_to_csv(const ExperimentResult& result) {
    std::string csv = "sweep_value,trials,detection_rate,ci_low,ci_high,analytic,mean_qber,"
                      "key_agreement_rate,eta_paper,eta_exact\n";
    for (const SweepPointResult& p : result.points) {
        csv += fmt(p.sweep_value) + ',' + std::to_string(p.trials) + ',' + fmt(p.detection_rate) +
               ',' + fmt(p.ci_low) + ',' + fmt(p.ci_high) + ',' + fmt(p.analytic) + ',' +
               fmt(p.mean_qber) + ',' + fmt(p.key_agreement_rate) + ',' + fmt(p.eta_paper) + ',' +
               fmt(p.eta_exact) + '\n';
    }
    return csv;
}

ordered_json experiment_to_json(const ExperimentResult& result) {
    ordered_json j = ordered_json::object();

    ordered_json plan = ordered_json::object();
    plan["trials"] = result.plan.trials;
    plan["sweep"] = sweep_param_name(result.plan.sweep);
    plan["sweep_values"] = result.plan.sweep_values;
    plan["confidence_z"] = result.plan.confidence_z;
    plan["attack"] =
        result.plan.attack ? attack_to_json(*result.plan.attack) : ordered_json(nullptr);
    {
        // reuse the run-record parameter block for the base parameters
        RunRecord probe;
        probe.params = result.plan.base;
        plan["base_params"] = run_record_to_json(probe)["params"];
    }
    j["plan"] = std::move(plan);

    const auto bands = qber_report(result);
    ordered_json points = ordered_json::array();
    for (size_t pi = 0; pi < result.points.size(); ++pi) {
        const SweepPointResult& p = result.points[pi];
        ordered_json o = ordered_json::object();
        o["sweep_value"] = p.sweep_value ? ordered_json(*p.sweep_value) : ordered_json(nullptr);
        o["trials"] = p.trials;
        o["detection_rate"] = p.detection_rate;
        o["ci_low"] = p.ci_low;
        o["ci_high"] = p.ci_high;
        o["analytic"] = p.analytic ? ordered_json(*p.analytic) : ordered_json(nullptr);
        o["mean_qber"] = p.mean_qber;
        ordered_json hops = ordered_json::object();
        for (const QberRow& row : bands[pi]) {
            ordered_json h = ordered_json::object();
            h["rate"] = row.rate ? ordered_json(*row.rate) : ordered_json(nullptr);
            h["band"] = qber_band_name(row.band);
            hops[row.hop] = std::move(h);
        }
        o["hop_qber"] = std::move(hops);
        o["key_agreement_rate"] =
            p.key_agreement_rate ? ordered_json(*p.key_agreement_rate) : ordered_json(nullptr);
        o["verify_failure_rate"] =
            p.verify_failure_rate ? ordered_json(*p.verify_failure_rate) : ordered_json(nullptr);
        o["mean_key_length"] =
            p.mean_key_length ? ordered_json(*p.mean_key_length) : ordered_json(nullptr);
        o["eve_mean_bits_beyond_chance"] = p.eve_mean_bits_beyond_chance
                                               ? ordered_json(*p.eve_mean_bits_beyond_chance)
                                               : ordered_json(nullptr);
        o["eve_position_guess_rate"] = p.eve_position_guess_rate
                                           ? ordered_json(*p.eve_position_guess_rate)
                                           : ordered_json(nullptr);
        o["eta_paper"] = p.eta_paper;
        o["eta_exact"] = p.eta_exact;
        points.push_back(std::move(o));
    }
    j["points"] = std::move(points);
    return j;
}

ordered_json efficiency_to_json(const EfficiencyReport& paper, const EfficiencyReport& exact) {
    auto one = [](const EfficiencyReport& r) {
        ordered_json o = ordered_json::object();
        o["c"] = r.c;
        o["q"] = r.q;
        o["b"] = r.b;
        o["eta"] = r.eta;
        return o;
    };
    ordered_json j = ordered_json::object();
    j["paper"] = one(paper);
    j["exact"] = one(exact);
    return j;
}

} // namespace qka
