// Acceptance suite: every protocol-level guarantee the simulator claims,
// one pass/fail line each, with tolerances pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "qka/analysis.hpp"
#include "qka/config.hpp"

using namespace qka;
using clock_type = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int num, const std::string& name, bool ok, double seconds,
            const std::string& detail = "") {
    std::printf("%s %2d. %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", num, name.c_str(), seconds,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

struct Timer {
    clock_type::time_point start = clock_type::now();
    double elapsed() const {
        return std::chrono::duration<double>(clock_type::now() - start).count();
    }
};

std::string run_cli(const std::string& args, int* exit_code = nullptr) {
    const std::string cmd = std::string(QKA_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    std::string out;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
    const int status = pclose(pipe);
    if (exit_code) *exit_code = WEXITSTATUS(status);
    return out;
}

// --- criterion 1: encoding tables -------------------------------------------

void criterion_encoding_tables() {
    Timer timer;
    bool ok = true;
    std::string detail;
    const char* bell_names[4] = {"phi+", "phi-", "psi+", "psi-"};
    Rng rng(1);

    // Bell-state table: code a on Bell state c lands on Bell state a^c,
    // read out by a deterministic Bell measurement.
    for (int c = 0; c < 4 && ok; ++c) {
        for (int a = 0; a < 4 && ok; ++a) {
            const StateVector out = apply_pauli(make_state(bell_names[c]), PauliCode(a), 0);
            const std::array<int, 2> pair = {0, 1};
            const auto dist = measurement_distribution(out, BasisKind::Bell, pair);
            if (std::abs(dist[static_cast<size_t>(a ^ c)] - 1.0) > 1e-12) {
                ok = false;
                detail = "Bell case code " + PauliCode(a).to_string() + " on " + bell_names[c];
            }
            const MeasurementOutcome m = measure(out, BasisKind::Bell, pair, rng);
            if (m.code().value != (a ^ c)) ok = false;
        }
    }
    // Single-photon table: x bit of the code flips the Z value, z bit is
    // invisible (phase only).
    for (int bit = 0; bit < 2 && ok; ++bit) {
        for (int a = 0; a < 4 && ok; ++a) {
            const StateVector out = apply_pauli(make_state(bit ? "1" : "0"), PauliCode(a), 0);
            const std::array<int, 1> q = {0};
            const auto dist = measurement_distribution(out, BasisKind::Z, q);
            const int expect = bit ^ PauliCode(a).x_bit();
            if (std::abs(dist[static_cast<size_t>(expect)] - 1.0) > 1e-12) {
                ok = false;
                detail = "single-photon case code " + PauliCode(a).to_string() + " on |" +
                         std::to_string(bit) + ">";
            }
        }
    }
    const double s = timer.elapsed();
    report(1, "encoding tables reproduced exactly (16 Bell + 8 single-photon cases)",
           ok && s < 1.0, s, detail);
}

// --- criterion 2: key agreement ----------------------------------------------

void criterion_key_agreement() {
    Timer timer;
    bool ok = true;
    std::string detail;
    Rng meta(20240601);
    for (int t = 0; t < 1000 && ok; ++t) {
        ProtocolParams params;
        params.m = 1 + static_cast<int>(meta.next_below(16));
        params.l = static_cast<int>(meta.next_below(5));
        params.decoy_count = 8;
        params.seed = meta.next_u64();
        const RunRecord rec = run_protocol(params);
        if (rec.aborted || rec.derived_keys.size() != 3) {
            ok = false;
            detail = "honest run aborted at trial " + std::to_string(t);
            break;
        }
        std::vector<int> u;
        for (const Announcement& a : rec.announcements)
            u.insert(u.end(), a.single_positions.begin(), a.single_positions.end());
        std::sort(u.begin(), u.end());
        u.erase(std::unique(u.begin(), u.end()), u.end());
        const size_t expect_len = 2 * (static_cast<size_t>(params.n()) - u.size()) + u.size();
        if (rec.derived_keys[0].bits != rec.derived_keys[1].bits ||
            rec.derived_keys[1].bits != rec.derived_keys[2].bits ||
            rec.derived_keys[0].bits.size() != expect_len) {
            ok = false;
            detail = "key mismatch at trial " + std::to_string(t) + " (m=" +
                     std::to_string(params.m) + ", l=" + std::to_string(params.l) + ")";
        }
    }
    const double s = timer.elapsed();
    report(2, "key agreement over 1000 randomized honest runs", ok && s < 30.0, s, detail);
}

// --- criteria 3 and 4: resend-attack detection curves ------------------------

bool detection_curve(AttackKind kind, std::string& detail) {
    ExperimentPlan plan;
    plan.base.m = 8;
    plan.base.l = 2;
    plan.base.qber_threshold = 0.0; // any decoy error aborts, matching the closed form
    plan.base.seed = kind == AttackKind::InterceptResend ? 3005 : 3003;
    plan.trials = 10000;
    plan.sweep = SweepParam::DecoyCount;
    plan.sweep_values = {1, 2, 4, 8, 10, 12};
    AttackDescriptor attack;
    attack.kind = kind;
    attack.target_hops = {Hop{Ring::A, 1}};
    plan.attack = attack;

    const ExperimentResult res = run_experiment(plan);
    for (const SweepPointResult& p : res.points) {
        const double analytic = *p.analytic;
        const double sigma = std::sqrt(analytic * (1.0 - analytic) / p.trials);
        if (std::abs(p.detection_rate - analytic) > 3.0 * sigma) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "kn=%g empirical %.5f vs analytic %.5f (3sigma %.5f)",
                          *p.sweep_value, p.detection_rate, analytic, 3.0 * sigma);
            detail = buf;
            return false;
        }
    }
    return true;
}

void criterion_intercept_detection() {
    Timer timer;
    std::string detail;
    const bool ok = detection_curve(AttackKind::InterceptResend, detail);
    const double s = timer.elapsed();
    report(3, "intercept-resend detection matches 1-(1/2)^kn within 3 sigma", ok && s < 300.0, s,
           detail);
}

void criterion_measure_detection() {
    Timer timer;
    std::string detail;
    const bool ok = detection_curve(AttackKind::MeasureResend, detail);
    const double s = timer.elapsed();
    report(4, "measure-resend detection matches 1-(3/4)^kn within 3 sigma", ok && s < 300.0, s,
           detail);
}

// --- criterion 5: per-decoy disturbance --------------------------------------

double attacked_hop_error(AttackKind kind, uint64_t seed) {
    ExperimentPlan plan;
    plan.base.m = 4;
    plan.base.l = 0;
    plan.base.decoy_count = 100;
    plan.base.qber_threshold = 1.0; // observe the statistics without aborting
    plan.base.seed = seed;
    plan.trials = 400; // 40,000 decoys on the attacked hop, 4 sigma inside the 0.01 window
    AttackDescriptor attack;
    attack.kind = kind;
    attack.target_hops = {Hop{Ring::A, 1}};
    plan.attack = attack;
    const ExperimentResult res = run_experiment(plan);
    return *res.points[0].hop_mean_qber[Hop{Ring::A, 1}.index()];
}

void criterion_per_decoy_disturbance() {
    Timer timer;
    const double intercept = attacked_hop_error(AttackKind::InterceptResend, 5001);
    const double measure = attacked_hop_error(AttackKind::MeasureResend, 5002);
    const bool ok = std::abs(intercept - 0.50) < 0.01 && std::abs(measure - 0.25) < 0.01;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "intercept %.4f (want 0.50 +/- 0.01), measure %.4f (want 0.25 +/- 0.01)",
                  intercept, measure);
    report(5, "per-decoy disturbance anchors the 25% attack floor", ok, timer.elapsed(), buf);
}

// --- criterion 6: entangle-measure dichotomy ---------------------------------

double monte_carlo_decoy_error(const Mat4& u, int count, uint64_t seed) {
    StateStore store;
    TravelSequence seq{Ring::A, {}};
    DecoyRecord record;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        const auto state = static_cast<DecoyState>(rng.next_below(4));
        record.positions.push_back(i);
        record.states.push_back(state);
        seq.slots.push_back({SlotKind::Decoy, i, store.add_photon(decoy_state_vector(state))});
    }
    EveRecord eve{AttackKind::EntangleMeasure};
    entangle_measure(store, seq, u, rng, eve);
    return check_decoys(seq, record, store, rng);
}

void criterion_entangle_measure() {
    Timer timer;
    bool ok = true;
    std::string detail;

    Rng urng(6001);
    for (int i = 0; i < 100 && ok; ++i) {
        const Mat4 u = random_unitary4(urng);
        const double predicted = predicted_decoy_error(u);
        const double mc = monte_carlo_decoy_error(u, 50000, derive_seed(6002, i));
        if (std::abs(predicted - mc) > 0.01) {
            char buf[120];
            std::snprintf(buf, sizeof(buf), "unitary %d: predicted %.5f vs mc %.5f", i, predicted,
                          mc);
            detail = buf;
            ok = false;
        }
    }

    // Zero-disturbance family e^{ia}(I (x) V): no induced error, and the
    // retained ancillas are pure product states carrying no information.
    Rng zrng(6003);
    for (int i = 0; i < 20 && ok; ++i) {
        const Mat2 v = random_unitary2(zrng);
        const double alpha = zrng.next_double() * 6.28318530717958647692;
        const cx phase(std::cos(alpha), std::sin(alpha));
        Mat2 scaled = pauli_matrix(PauliCode(0));
        for (cx& e : scaled) e *= phase;
        const Mat4 u = kron(scaled, v);

        if (predicted_decoy_error(u) >= 1e-9) {
            ok = false;
            detail = "structured unitary " + std::to_string(i) + " has nonzero predicted error";
            break;
        }
        if (monte_carlo_decoy_error(u, 2000, derive_seed(6004, i)) != 0.0) {
            ok = false;
            detail = "structured unitary " + std::to_string(i) + " tripped a decoy";
            break;
        }
        const auto states = conditional_ancilla_states(u);
        for (size_t a = 0; a < states.size() && ok; ++a) {
            for (size_t b = a + 1; b < states.size(); ++b) {
                if (std::abs(overlap(std::span<const cx>(states[a]),
                                     std::span<const cx>(states[b]))) <= 1.0 - 1e-9) {
                    ok = false;
                    detail = "conditional ancilla states distinguishable at unitary " +
                             std::to_string(i);
                    break;
                }
            }
        }
    }
    const double s = timer.elapsed();
    report(6, "entangle-measure: closed form vs Monte Carlo, and the no-error/no-info dichotomy",
           ok && s < 120.0, s, detail);
}

// --- criterion 7: inside collusion --------------------------------------------

void criterion_inside_collusion() {
    Timer timer;
    bool ok = true;
    std::string detail;

    ExperimentPlan plan;
    plan.base.m = 8;
    plan.base.l = 2;
    plan.base.decoy_count = 4;
    plan.base.check_sample_size = 2;
    plan.base.seed = 7001;
    plan.trials = 20000;
    AttackDescriptor attack;
    attack.kind = AttackKind::InsideCollusion;
    attack.colluders = {Participant::A, Participant::C};
    attack.strategy = CollusionStrategy::RandomPairing;
    plan.attack = attack;
    const ExperimentResult res = run_experiment(plan);
    const double rate = *res.points[0].eve_position_guess_rate;
    const double expect = 1.0 / 45.0;
    if (std::abs(rate - expect) > 0.005) {
        ok = false;
        char buf[120];
        std::snprintf(buf, sizeof(buf), "recovery rate %.5f vs 1/C(10,2) = %.5f", rate, expect);
        detail = buf;
    }

    // l = 0 removes the misdirection entirely: naive alignment reads the
    // honest sub-key verbatim.
    if (ok) {
        ProtocolParams params;
        params.m = 8;
        params.l = 0;
        params.decoy_count = 4;
        params.seed = 7002;
        AttackDescriptor naive;
        naive.kind = AttackKind::InsideCollusion;
        naive.colluders = {Participant::A, Participant::C};
        naive.strategy = CollusionStrategy::NaiveAlign;
        const RunRecord rec = run_protocol(params, naive);
        if (!rec.eve || !rec.eve->inferred_key_guess ||
            *rec.eve->inferred_key_guess != rec.subkeys[1].bits()) {
            ok = false;
            detail = "naive alignment with l=0 failed to recover the honest key";
        }
    }
    const double s = timer.elapsed();
    char buf[100];
    if (ok) {
        std::snprintf(buf, sizeof(buf), "recovery rate %.5f vs 1/45 = %.5f",
                      *res.points[0].eve_position_guess_rate, 1.0 / 45.0);
        detail = buf;
    }
    report(7, "inside collusion: position-recovery odds and the l=0 degenerate case",
           ok && s < 180.0, s, detail);
}

// --- criterion 8: efficiency ---------------------------------------------------

void criterion_efficiency() {
    Timer timer;
    bool ok = true;
    std::string detail;

    ProtocolParams exact_case;
    exact_case.m = 1000;
    exact_case.l = 0;
    const double eta0 = efficiency(exact_case, EfficiencyConvention::Paper).eta;
    if (eta0 != 2.0 / 3.0) {
        ok = false;
        detail = "eta(n=1000, l=0) != 2/3 exactly";
    }

    ProtocolParams band_case;
    band_case.m = 990;
    band_case.l = 10;
    const double eta10 = efficiency(band_case, EfficiencyConvention::Paper).eta;
    if (eta10 < 0.65 || eta10 > 0.667) {
        ok = false;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "eta(n=1000, l=10) = %.6f outside [0.65, 0.667]", eta10);
        detail = buf;
    }
    if (ok) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "eta(l=0) = 2/3 exactly, eta(l=10) = %.6f", eta10);
        detail = buf;
    }
    report(8, "Cabello efficiency under the paper convention", ok, timer.elapsed(), detail);
}

// --- criterion 9: determinism ---------------------------------------------------

void criterion_determinism() {
    Timer timer;
    bool ok = true;
    std::string detail;

    ProtocolParams params;
    params.m = 8;
    params.l = 2;
    params.decoy_count = 8;
    params.seed = 9001;
    if (run_record_to_string(run_protocol(params)) !=
        run_record_to_string(run_protocol(params))) {
        ok = false;
        detail = "run_protocol not reproducible";
    }

    ExperimentPlan plan;
    plan.base = params;
    plan.base.qber_threshold = 0.0;
    plan.trials = 500;
    plan.sweep = SweepParam::DecoyCount;
    plan.sweep_values = {2, 4};
    AttackDescriptor attack;
    attack.kind = AttackKind::MeasureResend;
    attack.target_hops = {Hop{Ring::B, 2}};
    plan.attack = attack;
    const std::string serial = experiment_to_csv(run_experiment_serial(plan));
    if (ok && (serial != experiment_to_csv(run_experiment_parallel(plan, 3)) ||
               serial != experiment_to_csv(run_experiment_parallel(plan, 7)))) {
        ok = false;
        detail = "experiment results differ across worker counts";
    }

    if (ok) {
        const std::string flags = "sweep --sweep decoy_count --values 1,2 --trials 60 --seed 17 "
                                  "--attack intercept-resend --hops A1 --threshold 0 --format csv";
        const std::string once = run_cli(flags + " --workers 1");
        const std::string twice = run_cli(flags + " --workers 1");
        const std::string wide = run_cli(flags + " --workers 4");
        const std::string run1 = run_cli("run --seed 404 --m 6 --l 1 --decoys 6");
        const std::string run2 = run_cli("run --seed 404 --m 6 --l 1 --decoys 6");
        if (once.empty() || once != twice || once != wide || run1 != run2) {
            ok = false;
            detail = "CLI output not byte-identical across repeats or worker counts";
        }
    }
    report(9, "byte-identical output for identical seeds, any worker count", ok, timer.elapsed(),
           detail);
}

// --- criterion 10: noise band ----------------------------------------------------

void criterion_noise_band() {
    Timer timer;
    bool ok = true;
    std::string detail;
    char buf[120];
    for (const double p : {0.02, 0.089}) {
        ExperimentPlan plan;
        plan.base.m = 4;
        plan.base.l = 0;
        plan.base.decoy_count = 120;
        plan.base.qber_threshold = 1.0;
        plan.base.channel_flip_prob = p;
        plan.base.seed = 10001;
        plan.trials = 20; // 21,600 decoys across the nine hops
        const ExperimentResult res = run_experiment(plan);
        const double mean = res.points[0].mean_qber;
        if (std::abs(mean - p) > 0.01) {
            ok = false;
            std::snprintf(buf, sizeof(buf), "flip_prob %.3f measured %.4f", p, mean);
            detail = buf;
            break;
        }
        if (p == 0.089) {
            std::snprintf(buf, sizeof(buf), "measured %.4f at p=0.02-anchor and %.4f at p=0.089",
                          res.points[0].mean_qber, mean);
        }
    }
    if (ok) {
        detail = "measured decoy QBER tracks the injected 2%-8.9% channel noise";
    }
    report(10, "channel-noise band reproduced on decoy statistics", ok, timer.elapsed(), detail);
}

} // namespace

int main() {
    std::printf("acceptance suite\n");
    Timer total;
    criterion_encoding_tables();
    criterion_key_agreement();
    criterion_intercept_detection();
    criterion_measure_detection();
    criterion_per_decoy_disturbance();
    criterion_entangle_measure();
    criterion_inside_collusion();
    criterion_efficiency();
    criterion_determinism();
    criterion_noise_band();
    std::printf("%d of 10 criteria passed (%.1f s total)\n", 10 - g_failures, total.elapsed());
    return g_failures == 0 ? 0 : 1;
}
