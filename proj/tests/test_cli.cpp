#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

#include "geosmr/geo.hpp"
#include "geosmr/strings.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "geosmr_cli_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string(GEOSMR_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ostringstream outbuf, errbuf;
    outbuf << std::ifstream(out).rdbuf();
    errbuf << std::ifstream(err).rdbuf();
    r.out = outbuf.str();
    r.err = errbuf.str();
    return r;
}

std::size_t count_lines(const std::string& text) {
    std::size_t lines = 0;
    for (char c : text) {
        if (c == '\n') ++lines;
    }
    return lines;
}

}  // namespace

TEST_CASE("estimate reproduces the fixture numbers end to end") {
    // Bundled matrix replaced by an explicit fixture file.
    const fs::path rtt = scratch_dir() / "fixture_rtt.csv";
    {
        std::ofstream f(rtt);
        f << "region,a,b,c,cl\n"
             "a,0,20,40,10\n"
             "b,20,0,60,30\n"
             "c,40,60,0,50\n"
             "cl,10,30,50,0\n";
    }
    const fs::path reg = scratch_dir() / "fixture_regions.csv";
    {
        std::ofstream f(reg);
        f << "region,lat,lon\na,0,0\nb,0,10\nc,0,20\ncl,0,30\n";
    }
    const std::string base = "--rtt " + rtt.string() + " --regions " + reg.string();

    RunResult r = run_cli("estimate " + base +
                          " --protocol multipaxos --replicas a,b,c --leader a --clients cl --p-w 1");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("cl,multipaxos,30,30,30,0,10,,a") != std::string::npos);
    CHECK(r.out.find("avg,multipaxos,30") != std::string::npos);

    RunResult ep = run_cli("estimate " + base +
                           " --protocol epaxos --replicas a,b,c --clients cl --p-slow 0.2");
    REQUIRE(ep.exit_code == 0);
    CHECK(ep.out.find("cl,epaxos,35,35,30,25,10,,a") != std::string::npos);

    RunResult dom = run_cli("estimate " + base +
                            " --protocol domino --replicas a,b,c --leader a --clients cl");
    REQUIRE(dom.exit_code == 0);
    CHECK(dom.out.find("mencius") != std::string::npos);  // branch column
}

TEST_CASE("unknown regions are named in the diagnostic and exit nonzero") {
    RunResult r = run_cli("estimate --protocol multipaxos --replicas tokyo,atlantis --clients tokyo");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("atlantis") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("estimate --replicas tokyo").exit_code == 1);          // missing --protocol
    CHECK(run_cli("sweep --axis sideways").exit_code == 1);              // bad axis
    CHECK(run_cli("map --mode hybrid").exit_code == 1);                  // bad mode
    CHECK(run_cli("nonsense").exit_code == 1);                           // unknown subcommand
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("io errors exit 3") {
    CHECK(run_cli("map --rtt /nonexistent/rtt.csv").exit_code == 3);
    CHECK(run_cli("map --out /nonexistent/dir/out.csv").exit_code == 3);
}

TEST_CASE("map emits the default 55-cell grid") {
    RunResult r = run_cli("map");
    REQUIRE(r.exit_code == 0);
    CHECK(count_lines(r.out) == 56);  // header + 55 cells
    CHECK(r.out.rfind("n,p_slow,winner(s),mp_ms,me_ms,fp_ms,do_ms,ep_ms\n", 0) == 0);
    // n=7 cells are infeasible on the bundled registry and warned about.
    CHECK(r.err.find("n=7") != std::string::npos);

    RunResult strict = run_cli("map --strict");
    CHECK(strict.exit_code == 2);

    RunResult feasible_strict = run_cli("map --strict --n-values 3,4");
    CHECK(feasible_strict.exit_code == 0);
}

TEST_CASE("distance sweep emits 30 rows") {
    RunResult r = run_cli("sweep --axis distance");
    REQUIRE(r.exit_code == 0);
    CHECK(count_lines(r.out) == 31);  // header + 6 values x 5 protocols
}

TEST_CASE("search respects the distance constraint") {
    RunResult r = run_cli("search --protocol mencius --n 3 --min-distance 3000");
    REQUIRE(r.exit_code == 0);
    auto lines = geosmr::split(r.out, '\n');
    REQUIRE(lines.size() >= 2);
    auto cells = geosmr::split(lines[1], ',');
    REQUIRE(cells.size() == 7);
    std::vector<std::string> placement;
    for (auto part : geosmr::split(cells[4], ';')) placement.emplace_back(part);
    REQUIRE(placement.size() == 3);
    CHECK(geosmr::min_pairwise_distance_km(placement, geosmr::RegionRegistry::builtin()) >=
          3000.0);

    RunResult infeasible = run_cli("search --protocol mencius --n 3 --min-distance 25000 --strict");
    CHECK(infeasible.exit_code == 2);
}

TEST_CASE("verify passes on the bundled matrix") {
    RunResult r = run_cli("verify --samples 25 --seed 7");
    REQUIRE(r.exit_code == 0);
    CHECK(count_lines(r.out) == 7);  // header + five n rows + overall row
    CHECK(r.out.find("false") == std::string::npos);
}

TEST_CASE("fixed seeds give byte-identical outputs") {
    for (const char* cmd :
         {"verify --samples 10 --seed 3", "map --n-values 3,4", "sweep --axis slow-path --n 4",
          "recommend --n 4 --p-slow 0.6 --mode full --format json"}) {
        RunResult a = run_cli(cmd);
        RunResult b = run_cli(cmd);
        REQUIRE(a.exit_code == 0);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("json and csv outputs agree") {
    RunResult csv = run_cli("recommend --n 3 --p-slow 0.2");
    RunResult js = run_cli("recommend --n 3 --p-slow 0.2 --format json");
    REQUIRE(csv.exit_code == 0);
    REQUIRE(js.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(js.out);
    CHECK(j["schema_version"] == 1);
    auto lines = geosmr::split(csv.out, '\n');
    REQUIRE(lines.size() >= 6);
    for (std::size_t i = 0; i < 5; ++i) {
        auto cells = geosmr::split(lines[i + 1], ',');
        REQUIRE(cells.size() == 4);
        const auto& row = j["ranking"][i];
        CHECK(std::string(cells[1]) == row["protocol"].get<std::string>());
        CHECK(geosmr::parse_double(cells[2], "latency") == row["latency_ms"].get<double>());
    }
}

TEST_CASE("exec-delay overrides the full-response constants") {
    // Zeroing every delay makes full-response output identical to status.
    RunResult status = run_cli("recommend --n 3 --p-slow 0.2 --mode status");
    RunResult zeroed = run_cli(
        "recommend --n 3 --p-slow 0.2 --mode full --exec-delay multipaxos=0 "
        "--exec-delay mencius=0 --exec-delay fastpaxos=0 --exec-delay domino=0 "
        "--exec-delay epaxos=0");
    REQUIRE(status.exit_code == 0);
    REQUIRE(zeroed.exit_code == 0);
    // Same ranking and latencies; only the mode-dependent guideline notes may
    // differ.
    auto ranking_of = [](const std::string& out) {
        std::string acc;
        for (auto line : geosmr::split(out, '\n')) {
            auto cells = geosmr::split(line, ',');
            if (cells.size() == 4) {
                acc += std::string(cells[0]) + "," + std::string(cells[1]) + "," +
                       std::string(cells[2]) + "\n";
            }
        }
        return acc;
    };
    CHECK(ranking_of(status.out) == ranking_of(zeroed.out));

    CHECK(run_cli("map --mode full --exec-delay mencius").exit_code == 1);
    CHECK(run_cli("map --mode full --exec-delay mencius=-4").exit_code == 1);
}

TEST_CASE("symmetrize flag averages directed pairs") {
    const fs::path rtt = scratch_dir() / "asym_rtt.csv";
    {
        std::ofstream f(rtt);
        f << "region,a,b\na,0,10\nb,20,0\n";
    }
    const fs::path reg = scratch_dir() / "asym_regions.csv";
    {
        std::ofstream f(reg);
        f << "region,lat,lon\na,0,0\nb,0,10\n";
    }
    // owd(a,b)=7.5 after symmetrize; n=1 round trip = 15.
    RunResult r = run_cli("estimate --rtt " + rtt.string() + " --regions " + reg.string() +
                          " --symmetrize --protocol multipaxos --replicas b --leader b --clients a");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("a,multipaxos,15,") != std::string::npos);
}

TEST_CASE("ping-log input is accepted") {
    const fs::path log = scratch_dir() / "pings.txt";
    {
        std::ofstream f(log);
        f << "a b 10\na b 30\nb a 20\n";
    }
    const fs::path reg = scratch_dir() / "ping_regions.csv";
    {
        std::ofstream f(reg);
        f << "region,lat,lon\na,0,0\nb,0,10\n";
    }
    // owd(a,b) = mean(10,30)/2 = 10; round trip via owd(a,b)+owd(b,a) = 20.
    RunResult r = run_cli("estimate --rtt " + log.string() + " --regions " + reg.string() +
                          " --protocol multipaxos --replicas b --leader b --clients a");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("a,multipaxos,20,") != std::string::npos);
}

TEST_CASE("GEOSMR_REGISTRY environment override") {
    const fs::path reg = scratch_dir() / "env_regions.csv";
    {
        std::ofstream f(reg);
        // Two regions close together: distance filter at 3000 km must fail.
        f << "region,lat,lon\nx1,0,0\nx2,0,1\nx3,0,2\n";
    }
    const std::string cmd = "GEOSMR_REGISTRY=" + reg.string() + " " + GEOSMR_CLI_PATH +
                            " search --protocol mencius --n 3 --min-distance 3000 --strict"
                            " --clients x1";
    const fs::path out = scratch_dir() / "env_out.txt";
    const int status = std::system((cmd + " > " + out.string() + " 2>&1").c_str());
    CHECK(WEXITSTATUS(status) == 2);
}
