#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "segwave/cli.hpp"
#include "segwave/config.hpp"
#include "segwave/io.hpp"

using namespace segwave;
namespace fs = std::filesystem;

namespace {

const char* small_config = R"(
[phenotypes]
alpha = 10, 0
mu = 1e-4, 2e-4
omega = 1, 2
p_bar = 4e4

[grid]
length = 3
dx = 0.1
tau = 1e-4

[initial]
amplitude = 38800, 19400
decay = 6e-2
boundaries = 0, 1, 3

[run]
t_end = 0.05
snapshot_times = 0, 0.05
track_interval = 0.01
levels = 0.2
fit_start = 0
dt_max = 1e-4
seed = 3
replicates = 2
)";

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("segwave_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "segwave");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::main_entry(static_cast<int>(argv.size()), argv.data());
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("parse and canonical round trip") {
        const auto config = parse_config(small_config);
        CHECK(config.params.count() == 2);
        CHECK(config.grid.cells == 30);
        CHECK(config.run.replicates == 2);
        CHECK(config.run.resolved_fit_end() == doctest::Approx(0.05));
        const auto text = canonical(config);
        CHECK(canonical(parse_config(text)) == text);
        CHECK(config_hash(config) == config_hash(parse_config(text)));
        CHECK(config_hash(config).size() == 64);
    }

    TEST_CASE("sha256 known digest") {
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("measurement times merge outputs with the tracking cadence") {
        const auto config = parse_config(small_config);
        const auto times = config.measurement_times();
        REQUIRE(times.size() == 6);
        CHECK(times.front() == 0.0);
        CHECK(times.back() == doctest::Approx(0.05));
    }

    TEST_CASE("config errors") {
        CHECK_THROWS_AS(parse_config(replace(small_config, "seed = 3", "seed = 3\ncolour = red")), ConfigError);
        CHECK_THROWS_AS(parse_config(replace(small_config, "p_bar = 4e4", "")), ConfigError);
        CHECK_THROWS_AS(parse_config(replace(small_config, "omega = 1, 2", "omega = 1, x")), ConfigError);
        CHECK_THROWS_AS(parse_config(std::string(small_config) + "\n[extra]\nkey = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(replace(small_config, "seed = 3", "sampler = fancy")), ConfigError);
    }

    TEST_CASE("every preset parses") {
        const auto names = preset_names();
        CHECK(names.size() == 10);
        for (const auto& name : names) {
            CAPTURE(name);
            const auto config = load_config(preset_path(name));
            CHECK(config.run.snapshot_times == std::vector<double>{50, 100, 150});
            const auto initial = build_initial(config.initial, config.grid, config.params);
            const auto p = pressure(initial, config.params);
            CHECK(*std::max_element(p.begin(), p.end()) <= config.params.p_bar);
        }
        CHECK(load_config(preset_path("fig6-top")).params.omega == std::vector<double>{1, 2, 3, 4});
        CHECK(load_config(preset_path("fig3-ibm")).run.replicates == 10);
    }
}

TEST_SUITE("io") {
    TEST_CASE("snapshot CSV round trip is exact") {
        const auto config = parse_config(small_config);
        auto f = build_initial(config.initial, config.grid, config.params);
        f.n[1][7] = 1.0 / 3.0;
        f.t = 0.1 + 0.2;
        std::vector<FieldState> snaps{f, f};
        snaps[1].t = 2.0 / 3.0;
        const auto dir = scratch("csv");
        io::write_snapshots_csv(dir / "s.csv", snaps, config.params, config.grid);
        const auto back = io::read_snapshots_csv(dir / "s.csv");
        REQUIRE(back.size() == 2);
        for (std::size_t s = 0; s < 2; ++s) {
            CHECK(back[s].t == snaps[s].t);
            CHECK(back[s].n == snaps[s].n);
        }
        const auto text = slurp(dir / "s.csv");
        CHECK(text.rfind("time,x,n_1,n_2,p\n", 0) == 0);
    }
}

TEST_SUITE("cli") {
    TEST_CASE("ibm runs are byte-identical for a fixed seed") {
        const auto dir = scratch("det");
        const auto cfg = write_file(dir / "c.ini", small_config);
        CHECK(invoke({"ibm", "--config", cfg.string(), "--replicates", "1", "--seed", "7", "--out", (dir / "a").string()}) == 0);
        CHECK(invoke({"ibm", "--config", cfg.string(), "--replicates", "1", "--seed", "7", "--out", (dir / "b").string()}) == 0);
        CHECK(invoke({"ibm", "--config", cfg.string(), "--replicates", "1", "--seed", "8", "--out", (dir / "c").string()}) == 0);
        const auto a = slurp(dir / "a" / "snapshots.csv");
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "b" / "snapshots.csv"));
        CHECK(a != slurp(dir / "c" / "snapshots.csv"));
        const auto manifest = io::read_json(dir / "a" / "manifest.json");
        CHECK(manifest["seeds"][0] == 7);
        CHECK(manifest["config_hash"].get<std::string>().size() == 64);
    }

    TEST_CASE("pde runs reproduce and t_end zero keeps the initial snapshot") {
        const auto dir = scratch("pde");
        const auto cfg = write_file(dir / "c.ini", small_config);
        CHECK(invoke({"pde", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
        CHECK(invoke({"pde", "--config", cfg.string(), "--out", (dir / "b").string()}) == 0);
        CHECK(slurp(dir / "a" / "snapshots.csv") == slurp(dir / "b" / "snapshots.csv"));

        auto zero = replace(small_config, "t_end = 0.05", "t_end = 0");
        zero = replace(zero, "snapshot_times = 0, 0.05", "snapshot_times = 0");
        zero = replace(zero, "fit_start = 0", "");
        const auto zcfg = write_file(dir / "z.ini", zero);
        CHECK(invoke({"pde", "--config", zcfg.string(), "--out", (dir / "z").string()}) == 0);
        const auto snaps = io::read_snapshots_csv(dir / "z" / "snapshots.csv");
        REQUIRE(snaps.size() == 1);
        CHECK(snaps[0].t == 0.0);
    }

    TEST_CASE("zero amplitudes give all-zero output") {
        const auto dir = scratch("zero");
        const auto cfg = write_file(dir / "c.ini", replace(small_config, "amplitude = 38800, 19400", "amplitude = 0, 0"));
        CHECK(invoke({"ibm", "--config", cfg.string(), "--out", (dir / "i").string()}) == 0);
        for (const auto& s : io::read_snapshots_csv(dir / "i" / "snapshots.csv"))
            for (const auto& n : s.n)
                for (double v : n) CHECK(v == 0.0);
    }

    TEST_CASE("predict in measured mode") {
        const auto dir = scratch("predict");
        const auto cfg = write_file(dir / "c.ini", replace(small_config, "mu = 1e-4, 2e-4", "mu = 1, 2"));
        CHECK(invoke({"predict", "--config", cfg.string(), "--p0", "2", "--masses", "1", "--out", dir.string()}) == 0);
        const auto wave = io::read_json(dir / "prediction.json");
        CHECK(wave["c"].get<double>() == doctest::Approx(2.0));
    }

    TEST_CASE("exit codes") {
        const auto dir = scratch("codes");
        CHECK(invoke({"pde", "--config", (dir / "missing.ini").string()}) == 2);
        CHECK(invoke({"pde", "--preset", "no-such-preset"}) == 2);
        CHECK(invoke({"bogus"}) == 2);
        CHECK(invoke({"pde", "--unknown-flag"}) == 2);
        const auto bad = write_file(dir / "bad.ini", replace(small_config, "seed = 3", "seed = 3\ncolour = red"));
        CHECK(invoke({"pde", "--config", bad.string(), "--out", (dir / "o").string()}) == 2);
        const auto steps = write_file(dir / "steps.ini", replace(small_config, "seed = 3", "seed = 3\nmax_steps = 2"));
        CHECK(invoke({"pde", "--config", steps.string(), "--out", (dir / "o").string()}) == 3);
        const auto unordered = write_file(dir / "mu.ini", replace(small_config, "mu = 1e-4, 2e-4", "mu = 2e-4, 1e-4"));
        CHECK(invoke({"predict", "--config", unordered.string(), "--out", (dir / "p").string()}) == 2);

        setenv("SEGWAVE_THREADS", "zero", 1);
        const auto good = write_file(dir / "good.ini", small_config);
        CHECK(invoke({"ibm", "--config", good.string(), "--out", (dir / "t").string()}) == 2);
        setenv("SEGWAVE_THREADS", "2", 1);
        CHECK(cli::thread_count() == 2);
        unsetenv("SEGWAVE_THREADS");
    }
}
