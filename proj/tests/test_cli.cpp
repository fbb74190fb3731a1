#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "qka/config.hpp"
#include "qka/protocol.hpp"

using namespace qka;

namespace {

struct CommandResult {
    int exit_code;
    std::string output; // stdout only
};

CommandResult run_cli(const std::string& args) {
    const std::string cmd = std::string(QKA_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string write_temp_config(const std::string& body) {
    const std::string path = "/tmp/qka_test_config.txt";
    std::ofstream out(path);
    out << body;
    return path;
}

} // namespace

TEST_CASE("config file parsing") {
    CliConfig cfg;
    const std::string path = write_temp_config("# comment\n"
                                               "m = 5\n"
                                               "l = 1\n"
                                               "seed = 99\n"
                                               "qber_threshold = 0.2\n"
                                               "wavelength_filter = true\n"
                                               "attack = measure-resend\n"
                                               "hops = A1,B2\n"
                                               "\n"
                                               "trials = 50\n");
    apply_config_file(cfg, path);
    CHECK(cfg.params.m == 5);
    CHECK(cfg.params.l == 1);
    CHECK(cfg.params.seed == 99);
    CHECK(cfg.params.qber_threshold == 0.2);
    CHECK(cfg.params.wavelength_filter);
    CHECK(cfg.attack == "measure-resend");
    CHECK(cfg.hops == "A1,B2");
    CHECK(cfg.trials == 50);
}

TEST_CASE("config errors name the file, line, and key") {
    CliConfig cfg;

    const std::string unknown = write_temp_config("m = 4\nfoo = 1\n");
    CHECK_THROWS_WITH_AS(apply_config_file(cfg, unknown),
                         doctest::Contains(":2: unknown key 'foo'"), ConfigError);

    const std::string bad_value = write_temp_config("m = hello\n");
    CHECK_THROWS_WITH_AS(apply_config_file(cfg, bad_value), doctest::Contains(":1:"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(apply_config_file(cfg, bad_value), doctest::Contains("'m'"),
                         ConfigError);

    const std::string no_eq = write_temp_config("just words\n");
    CHECK_THROWS_AS(apply_config_file(cfg, no_eq), ConfigError);
    CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/qka.conf"), ConfigError);
}

TEST_CASE("attack building from config") {
    CliConfig cfg;
    CHECK(!build_attack(cfg).has_value()); // attack = none

    cfg.attack = "intercept-resend";
    cfg.hops = "A1";
    const auto a = build_attack(cfg);
    REQUIRE(a.has_value());
    CHECK(a->kind == AttackKind::InterceptResend);
    CHECK(a->targets(Hop{Ring::A, 1}));
    CHECK(!a->targets(Hop{Ring::A, 2}));

    cfg.hops = "all";
    CHECK(build_attack(cfg)->target_hops.size() == 9);

    cfg.attack = "entangle-measure";
    cfg.eve_unitary = "cnot";
    CHECK(build_attack(cfg)->eve_unitary.has_value());
    cfg.eve_unitary = "random:7";
    const Mat4 u = *build_attack(cfg)->eve_unitary;
    CHECK(unitarity_deviation(u) < kAlgebraTol);
    cfg.eve_unitary = "bogus";
    CHECK_THROWS_AS(build_attack(cfg), ConfigError);

    cfg.attack = "inside-collusion";
    cfg.colluders = "AC";
    cfg.strategy = "random-pairing";
    const auto c = build_attack(cfg);
    CHECK(c->colluders == std::pair{Participant::A, Participant::C});
    CHECK(c->strategy == CollusionStrategy::RandomPairing);
    cfg.colluders = "AA";
    CHECK_THROWS_AS(build_attack(cfg), ConfigError);
    cfg.colluders = "AXY";
    CHECK_THROWS_AS(build_attack(cfg), ConfigError);

    cfg.attack = "intercept-resend";
    cfg.colluders = "AC";
    cfg.hops = "A1";
    cfg.resend_distribution = "1,0,0";
    CHECK_THROWS_AS(build_attack(cfg), ConfigError);
    cfg.resend_distribution = "0.7,0.1,0.1,0.1";
    CHECK(build_attack(cfg)->resend_distribution[0] == 0.7);

    cfg.attack = "bogus-attack";
    CHECK_THROWS_AS(build_attack(cfg), ConfigError);
}

TEST_CASE("plan building") {
    CliConfig cfg;
    cfg.sweep = "decoy_count";
    cfg.sweep_values = "1,2,4";
    cfg.trials = 10;
    const ExperimentPlan plan = build_plan(cfg);
    CHECK(plan.sweep == SweepParam::DecoyCount);
    CHECK(plan.sweep_values == std::vector<double>{1, 2, 4});
    CHECK(plan.trials == 10);

    cfg.sweep = "bogus";
    CHECK_THROWS_AS(build_plan(cfg), ConfigError);
    cfg.sweep = "decoy_count";
    cfg.sweep_values = "1,x";
    CHECK_THROWS_AS(build_plan(cfg), ConfigError);
}

TEST_CASE("hop parsing") {
    CHECK(parse_hops("").empty());
    CHECK(parse_hops("A1").size() == 1);
    CHECK(parse_hops("A1,C3,B2").size() == 3);
    CHECK_THROWS_AS(parse_hops("D1"), ConfigError);
    CHECK_THROWS_AS(parse_hops("A4"), ConfigError);
    CHECK(Hop::from_string("B2").to_string() == "B2");
}

TEST_CASE("cli run is deterministic and parseable") {
    const std::string flags = "run --seed 42 --m 6 --l 2 --decoys 8";
    const CommandResult first = run_cli(flags);
    const CommandResult second = run_cli(flags);
    CHECK(first.exit_code == 0);
    CHECK(first.output == second.output);

    const auto j = nlohmann::ordered_json::parse(first.output);
    const RunRecord rec = run_record_from_json(j);
    CHECK(rec.params.seed == 42);
    CHECK(rec.params.m == 6);
    CHECK(!rec.aborted);
    REQUIRE(rec.derived_keys.size() == 3);
    CHECK(rec.derived_keys[0].bits == rec.derived_keys[1].bits);
    // re-serializing reproduces the exact bytes
    CHECK(run_record_to_string(rec) == first.output);
}

TEST_CASE("cli run with an attack reports the adversary") {
    const CommandResult res = run_cli("run --seed 7 --attack intercept-resend --hops A1");
    CHECK(res.exit_code == 0); // a detected attack is still a completed simulation
    const auto j = nlohmann::ordered_json::parse(res.output);
    CHECK(!j["eve"].is_null());
    CHECK(j["attack"]["kind"] == "intercept-resend");
}

TEST_CASE("cli config errors exit nonzero with a diagnostic") {
    CHECK(run_cli("run --m 0").exit_code != 0);
    CHECK(run_cli("run --attack bogus").exit_code != 0);
    CHECK(run_cli("sweep --trials 5").exit_code != 0); // sweep parameter missing
    CHECK(run_cli("run --format csv").exit_code != 0);
    const std::string bad = write_temp_config("nonsense = 1\n");
    CHECK(run_cli("run --config " + bad).exit_code != 0);
}

TEST_CASE("cli sweep emits the pinned csv schema and respects workers") {
    const std::string flags = "sweep --sweep decoy_count --values 1,2 --trials 40 "
                              "--attack intercept-resend --hops A1 --threshold 0 --seed 11 "
                              "--format csv";
    const CommandResult serial = run_cli(flags + " --workers 1");
    const CommandResult parallel = run_cli(flags + " --workers 4");
    CHECK(serial.exit_code == 0);
    CHECK(serial.output.rfind("sweep_value,trials,detection_rate,ci_low,ci_high,analytic,"
                              "mean_qber,key_agreement_rate,eta_paper,eta_exact\n",
                              0) == 0);
    CHECK(serial.output == parallel.output);
}

TEST_CASE("cli efficiency prints both conventions") {
    const CommandResult res = run_cli("efficiency --m 1000 --l 0");
    CHECK(res.exit_code == 0);
    const auto j = nlohmann::ordered_json::parse(res.output);
    CHECK(j["paper"]["eta"].get<double>() == 2.0 / 3.0);
    CHECK(j["exact"]["eta"].get<double>() <= j["paper"]["eta"].get<double>());
}

TEST_CASE("QKA_SEED provides the default seed and flags win") {
    const CommandResult env_only = run_cli("run --m 4 --l 1 --decoys 4");
    (void)env_only;
    CommandResult from_env{};
    {
        const std::string cmd = std::string("QKA_SEED=4242 ") + QKA_CLI_PATH +
                                " run --m 4 --l 1 --decoys 4 2>/dev/null";
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        char buf[4096];
        size_t got;
        while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) from_env.output.append(buf, got);
        from_env.exit_code = WEXITSTATUS(pclose(pipe));
    }
    CHECK(from_env.exit_code == 0);
    const auto j = nlohmann::ordered_json::parse(from_env.output);
    CHECK(j["params"]["seed"].get<uint64_t>() == 4242);

    // explicit flag beats the environment
    CommandResult flag_wins{};
    {
        const std::string cmd = std::string("QKA_SEED=4242 ") + QKA_CLI_PATH +
                                " run --m 4 --l 1 --decoys 4 --seed 1 2>/dev/null";
        FILE* pipe = popen(cmd.c_str(), "r");
        REQUIRE(pipe != nullptr);
        char buf[4096];
        size_t got;
        while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) flag_wins.output.append(buf, got);
        flag_wins.exit_code = WEXITSTATUS(pclose(pipe));
    }
    CHECK(nlohmann::ordered_json::parse(flag_wins.output)["params"]["seed"].get<uint64_t>() == 1);
}

TEST_CASE("help lists every configuration flag") {
    const CommandResult res = run_cli("--help");
    for (const char* flag :
         {"--config", "--m", "--l", "--decoys", "--threshold", "--check-sample", "--seed",
          "--flip-prob", "--wavelength-filter", "--pns", "--attack", "--hops", "--eve-unitary",
          "--colluders", "--strategy", "--resend-dist", "--trials", "--sweep", "--values",
          "--confidence-z", "--workers", "--format", "--out"}) {
        CAPTURE(flag);
        CHECK(res.output.find(flag) != std::string::npos);
    }
}

TEST_CASE("config file feeds the run and flags override it") {
    const std::string path = write_temp_config("m = 4\nl = 1\ndecoy_count = 4\nseed = 9\n");
    const CommandResult from_file = run_cli("run --config " + path);
    CHECK(from_file.exit_code == 0);
    auto j = nlohmann::ordered_json::parse(from_file.output);
    CHECK(j["params"]["m"] == 4);
    CHECK(j["params"]["seed"] == 9);

    const CommandResult overridden = run_cli("run --config " + path + " --seed 10");
    j = nlohmann::ordered_json::parse(overridden.output);
    CHECK(j["params"]["seed"] == 10);
}

TEST_CASE("out flag writes the same bytes to a file") {
    const std::string path = "/tmp/qka_test_out.json";
    std::remove(path.c_str());
    const CommandResult direct = run_cli("run --seed 3 --m 4 --l 0 --decoys 2");
    const CommandResult to_file =
        run_cli("run --seed 3 --m 4 --l 0 --decoys 2 --out " + path);
    CHECK(to_file.exit_code == 0);
    CHECK(to_file.output.empty());
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(contents == direct.output);
}
