// geosmr: latency planning for geo-replicated state machine replication.
//
// Subcommands: estimate, search, sweep, map, recommend, verify. All outputs
// are deterministic for a fixed seed; CSV and JSON mirrors carry the same
// values.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geosmr/geo.hpp"
#include "geosmr/model.hpp"
#include "geosmr/placement.hpp"
#include "geosmr/rtt.hpp"
#include "geosmr/scenarios.hpp"
#include "geosmr/sim.hpp"
#include "geosmr/strings.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
    std::string rtt_path;
    std::string registry_path;
    bool symmetrize_rtt = false;
    std::string format = "csv";
    std::string out_path;
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--rtt", opt.rtt_path,
                    "RTT file (matrix CSV or ping log); default: bundled synthetic matrix");
    cmd->add_option("--regions", opt.registry_path,
                    "region registry CSV; default: $GEOSMR_REGISTRY or the built-in registry");
    cmd->add_flag("--symmetrize", opt.symmetrize_rtt, "average each directed RTT pair");
    cmd->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", opt.out_path, "output path; default: stdout");
    cmd->add_flag("--strict", opt.strict, "exit 2 if any requested cell is infeasible");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw geosmr::IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct World {
    geosmr::RegionRegistry registry;
    geosmr::RttMatrix rtt;
    geosmr::DelayModel delay;
};

World load_world(const CommonOptions& opt) {
    geosmr::RegionRegistry registry;
    if (!opt.registry_path.empty()) {
        registry = geosmr::RegionRegistry::parse_csv(read_file(opt.registry_path));
    } else if (const char* env = std::getenv("GEOSMR_REGISTRY"); env && *env) {
        registry = geosmr::RegionRegistry::parse_csv(read_file(env));
    } else {
        registry = geosmr::RegionRegistry::builtin();
    }

    geosmr::RttMatrix rtt = opt.rtt_path.empty() ? geosmr::synthetic_rtt(registry)
                                                 : geosmr::load_rtt(read_file(opt.rtt_path));
    if (opt.symmetrize_rtt) rtt = geosmr::symmetrize(std::move(rtt));
    geosmr::DelayModel delay(rtt);
    return {std::move(registry), std::move(rtt), std::move(delay)};
}

void write_output(const CommonOptions& opt, const std::string& text) {
    if (opt.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.out_path, std::ios::binary);
    if (!out) throw geosmr::IoError("cannot open '" + opt.out_path + "' for writing");
    out << text;
    if (!out) throw geosmr::IoError("failed writing '" + opt.out_path + "'");
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> names;
    for (std::string_view part : geosmr::split(csv, ',')) {
        part = geosmr::trim(part);
        if (!part.empty()) names.push_back(geosmr::canonical_region(part));
    }
    return names;
}

geosmr::ClientDistribution parse_clients(const std::string& spec) {
    const std::string s = geosmr::to_lower(geosmr::trim(spec));
    if (s == "global") return geosmr::ClientDistribution::global();
    if (s == "us") return geosmr::ClientDistribution::us();
    auto names = parse_name_list(spec);
    if (names.empty()) throw geosmr::ValidationError("--clients must name regions or global|us");
    return geosmr::ClientDistribution::custom(std::move(names));
}

geosmr::ReadPolicy parse_read_policy(const std::string& s) {
    if (s == "nearest") return geosmr::ReadPolicy::NearestReplica;
    if (s == "leader") return geosmr::ReadPolicy::LeaderOnly;
    throw geosmr::ValidationError("--read-policy must be nearest or leader");
}

geosmr::ServiceMode parse_mode(const std::string& s,
                               const std::vector<std::string>& exec_delays) {
    geosmr::ServiceMode mode;
    if (s == "status") {
        mode = geosmr::ServiceMode::status();
    } else if (s == "full") {
        mode = geosmr::ServiceMode::full();
    } else {
        throw geosmr::ValidationError("--mode must be status or full");
    }
    for (const auto& spec : exec_delays) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw geosmr::ValidationError("--exec-delay expects protocol=ms, got '" + spec + "'");
        }
        const geosmr::ProtocolKind p = geosmr::parse_protocol(spec.substr(0, eq));
        const double ms = geosmr::parse_double(spec.substr(eq + 1), "--exec-delay");
        if (ms < 0.0) throw geosmr::ValidationError("--exec-delay must be non-negative");
        mode.commit_to_exec_ms[static_cast<std::size_t>(p)] = ms;
    }
    return mode;
}

// Deterministic sampling helpers; bounded draws use modulo so reports are
// reproducible across standard libraries.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) { return rng() % bound; }

std::vector<geosmr::RegionIndex> sample_placement(std::mt19937_64& rng, std::uint32_t universe,
                                                  std::uint32_t n) {
    std::vector<geosmr::RegionIndex> pool(universe);
    for (std::uint32_t i = 0; i < universe; ++i) pool[i] = i;
    for (std::uint32_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::uint32_t>(draw(rng, universe - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<geosmr::RegionIndex> out(pool.begin(), pool.begin() + n);
    std::sort(out.begin(), out.end());
    return out;
}

// ---- estimate ----

struct EstimateArgs {
    CommonOptions common;
    std::string protocol;
    std::string replicas_csv;
    std::string leader = "best";
    std::string clients = "global";
    double p_slow = 0.2;
    double p_write = 1.0;
    std::string read_policy = "nearest";
};

int cmd_estimate(const EstimateArgs& args) {
    World world = load_world(args.common);
    const geosmr::DelayModel& d = world.delay;
    const geosmr::ProtocolKind protocol = geosmr::parse_protocol(args.protocol);
    const geosmr::ReadPolicy policy = parse_read_policy(args.read_policy);

    geosmr::Placement placement;
    for (const auto& name : parse_name_list(args.replicas_csv)) {
        placement.replicas.push_back(d.index_of(name));
    }
    if (placement.replicas.empty()) throw geosmr::ValidationError("--replicas must name regions");
    for (std::size_t i = 0; i < placement.replicas.size(); ++i) {
        for (std::size_t j = i + 1; j < placement.replicas.size(); ++j) {
            if (placement.replicas[i] == placement.replicas[j]) {
                throw geosmr::ValidationError("--replicas has a duplicate region '" +
                                              d.name(placement.replicas[i]) + "'");
            }
        }
    }

    geosmr::Workload workload =
        geosmr::make_workload(parse_clients(args.clients), d, args.p_write, args.p_slow);

    if (geosmr::needs_leader(protocol)) {
        if (args.leader == "best") {
            const auto choice = geosmr::best_leader(d, protocol, placement, workload, policy);
            for (std::uint32_t pos = 0; pos < placement.replicas.size(); ++pos) {
                if (placement.replicas[pos] == choice.leader) placement.leader_pos = pos;
            }
        } else {
            const geosmr::RegionIndex leader = d.index_of(args.leader);
            for (std::uint32_t pos = 0; pos < placement.replicas.size(); ++pos) {
                if (placement.replicas[pos] == leader) placement.leader_pos = pos;
            }
            if (!placement.leader_pos) {
                throw geosmr::LeaderNotInPlacementError("--leader '" + args.leader +
                                                        "' is not in --replicas");
            }
        }
    }

    std::string csv = "client,protocol,el_ms,write_ms,fast_ms,slow_ms,read_ms,domino_branch,leader\n";
    json jrows = json::array();
    double sum = 0.0;
    for (geosmr::RegionIndex c : workload.clients) {
        const double el = geosmr::estimate(d, protocol, placement, c, workload, policy);
        sum += el;
        geosmr::ProtocolEstimate pe = geosmr::protocol_estimate(
            d, protocol, placement.replicas, placement.leader_region(), c, workload.p_slow);
        const double read =
            geosmr::read_latency(d, placement.replicas, c, policy, placement.leader_region());
        const std::string branch = pe.domino_branch ? to_string(*pe.domino_branch) : "";
        const std::string leader_name = pe.leader_used ? d.name(*pe.leader_used) : "";

        csv += d.name(c);
        csv += ',';
        csv += to_string(protocol);
        csv += ',';
        csv += geosmr::format_double(el);
        csv += ',';
        csv += geosmr::format_double(pe.total_ms);
        csv += ',';
        csv += geosmr::format_double(pe.fast_ms);
        csv += ',';
        csv += geosmr::format_double(pe.slow_ms);
        csv += ',';
        csv += geosmr::format_double(read);
        csv += ',';
        csv += branch;
        csv += ',';
        csv += leader_name;
        csv += '\n';

        jrows.push_back({{"client", d.name(c)},
                         {"el_ms", el},
                         {"write_ms", pe.total_ms},
                         {"fast_ms", pe.fast_ms},
                         {"slow_ms", pe.slow_ms},
                         {"read_ms", read},
                         {"domino_branch", branch.empty() ? json(nullptr) : json(branch)},
                         {"leader", leader_name.empty() ? json(nullptr) : json(leader_name)}});
    }
    const double avg = sum / static_cast<double>(workload.clients.size());
    csv += "avg,";
    csv += to_string(protocol);
    csv += ',';
    csv += geosmr::format_double(avg);
    csv += ",,,,,,\n";

    if (args.common.format == "json") {
        json j;
        j["schema_version"] = geosmr::kSchemaVersion;
        j["kind"] = "estimate";
        j["protocol"] = to_string(protocol);
        json pl = json::array();
        for (geosmr::RegionIndex r : placement.replicas) pl.push_back(d.name(r));
        j["placement"] = std::move(pl);
        j["leader"] =
            placement.leader_region() ? json(d.name(*placement.leader_region())) : json(nullptr);
        j["p_slow"] = workload.p_slow;
        j["p_w"] = workload.p_write;
        j["rows"] = std::move(jrows);
        j["el_avg_ms"] = avg;
        write_output(args.common, j.dump(2) + "\n");
    } else {
        write_output(args.common, csv);
    }
    return kExitOk;
}

// ---- search ----

struct SearchArgs {
    CommonOptions common;
    std::string protocol;
    std::uint32_t n = 3;
    double min_distance_km = 0.0;
    std::string clients = "global";
    double p_slow = 0.2;
    double p_write = 1.0;
    std::string leader = "best";
    std::string read_policy = "nearest";
};

int cmd_search(const SearchArgs& args) {
    World world = load_world(args.common);
    const geosmr::DelayModel& d = world.delay;

    geosmr::PlacementQuery q;
    q.universe = geosmr::full_universe(d);
    q.n = args.n;
    q.min_distance_km = args.min_distance_km;
    q.protocol = geosmr::parse_protocol(args.protocol);
    q.workload = geosmr::make_workload(parse_clients(args.clients), d, args.p_write, args.p_slow);
    q.read_policy = parse_read_policy(args.read_policy);
    if (args.leader == "best") {
        q.leader_policy = geosmr::LeaderPolicy::Best;
    } else {
        q.leader_policy = geosmr::LeaderPolicy::Fixed;
        q.fixed_leader = d.index_of(args.leader);
    }

    std::string csv = "n,min_distance_km,protocol,latency_ms,placement,leader,n_candidates\n";
    json j;
    j["schema_version"] = geosmr::kSchemaVersion;
    j["kind"] = "search";

    bool infeasible = false;
    try {
        geosmr::PlacementResult r = geosmr::optimal_placement(q, d, world.registry);
        std::vector<std::string> names;
        for (geosmr::RegionIndex idx : r.placement.replicas) names.push_back(d.name(idx));
        csv += std::to_string(args.n) + "," + geosmr::format_double(args.min_distance_km) + "," +
               to_string(q.protocol) + "," + geosmr::format_double(r.latency_ms) + ",";
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) csv += ';';
            csv += names[i];
        }
        csv += ",";
        csv += r.leader ? d.name(*r.leader) : "";
        csv += "," + std::to_string(r.n_candidates) + "\n";

        j["result"] = {{"n", args.n},
                       {"min_distance_km", args.min_distance_km},
                       {"protocol", to_string(q.protocol)},
                       {"latency_ms", r.latency_ms},
                       {"placement", names},
                       {"leader", r.leader ? json(d.name(*r.leader)) : json(nullptr)},
                       {"n_candidates", r.n_candidates}};
    } catch (const geosmr::NoFeasiblePlacementError& e) {
        std::cerr << "warning: " << e.what() << "\n";
        infeasible = true;
        j["result"] = nullptr;
    }

    write_output(args.common, args.common.format == "json" ? j.dump(2) + "\n" : csv);
    return infeasible && args.common.strict ? kExitInfeasible : kExitOk;
}

// ---- sweep / map / recommend ----

struct SweepArgs {
    CommonOptions common;
    std::vector<std::string> exec_delays;
    std::string axis = "distance";
    std::string values_csv;
    std::uint32_t n = 3;
    double min_distance_km = 3000.0;
    double p_slow = 0.2;
    double p_write = 1.0;
    std::string clients = "global";
    std::string mode = "status";
    std::string read_policy = "nearest";
};

int cmd_sweep(const SweepArgs& args) {
    World world = load_world(args.common);

    geosmr::SweepSpec spec;
    switch (geosmr::parse_axis(args.axis)) {
        case geosmr::SweepAxis::Distance: spec = geosmr::SweepSpec::distance(); break;
        case geosmr::SweepAxis::ReplicaCount: spec = geosmr::SweepSpec::replica_count(); break;
        case geosmr::SweepAxis::SlowPathRate: spec = geosmr::SweepSpec::slow_path_rate(); break;
    }
    if (!args.values_csv.empty()) {
        spec.values.clear();
        for (std::string_view part : geosmr::split(args.values_csv, ',')) {
            spec.values.push_back(geosmr::parse_double(part, "--values"));
        }
    }
    spec.n = args.n;
    spec.min_distance_km = args.min_distance_km;
    spec.p_slow = args.p_slow;
    spec.p_write = args.p_write;
    spec.read_policy = parse_read_policy(args.read_policy);

    auto rows = geosmr::run_sweep(spec, parse_clients(args.clients), parse_mode(args.mode, args.exec_delays),
                                  world.delay, world.registry);
    std::size_t infeasible = 0;
    for (const auto& r : rows) {
        if (!r.latency_ms) {
            ++infeasible;
            std::cerr << "warning: no feasible placement for axis value "
                      << geosmr::format_double(r.axis_value) << " (" << to_string(r.protocol)
                      << ")\n";
        }
    }
    write_output(args.common, args.common.format == "json"
                                  ? geosmr::sweep_to_json(spec, rows).dump(2) + "\n"
                                  : geosmr::sweep_to_csv(rows));
    return infeasible > 0 && args.common.strict ? kExitInfeasible : kExitOk;
}

struct MapArgs {
    CommonOptions common;
    std::vector<std::string> exec_delays;
    std::string n_values_csv = "3,4,5,6,7";
    std::string p_slow_values_csv;
    double min_distance_km = 3000.0;
    double p_write = 1.0;
    std::string clients = "global";
    std::string mode = "status";
    std::string read_policy = "nearest";
};

int cmd_map(const MapArgs& args) {
    World world = load_world(args.common);

    std::vector<std::uint32_t> n_values;
    for (std::string_view part : geosmr::split(args.n_values_csv, ',')) {
        n_values.push_back(
            static_cast<std::uint32_t>(geosmr::parse_double(part, "--n-values")));
    }
    std::vector<double> ps_values = geosmr::default_p_slow_values();
    if (!args.p_slow_values_csv.empty()) {
        ps_values.clear();
        for (std::string_view part : geosmr::split(args.p_slow_values_csv, ',')) {
            ps_values.push_back(geosmr::parse_double(part, "--p-slow-values"));
        }
    }

    auto cells = geosmr::protocol_map(n_values, ps_values, parse_clients(args.clients),
                                      parse_mode(args.mode, args.exec_delays), args.min_distance_km, world.delay,
                                      world.registry, args.p_write,
                                      parse_read_policy(args.read_policy));
    std::size_t infeasible = 0;
    for (const auto& c : cells) {
        if (c.winners.empty()) {
            ++infeasible;
            std::cerr << "warning: no feasible placement for n=" << c.n
                      << " p_slow=" << geosmr::format_double(c.p_slow) << "\n";
        }
    }
    write_output(args.common, args.common.format == "json"
                                  ? geosmr::map_to_json(cells).dump(2) + "\n"
                                  : geosmr::map_to_csv(cells));
    return infeasible > 0 && args.common.strict ? kExitInfeasible : kExitOk;
}

struct RecommendArgs {
    CommonOptions common;
    std::vector<std::string> exec_delays;
    std::uint32_t n = 3;
    double min_distance_km = 3000.0;
    double p_slow = 0.2;
    double p_write = 1.0;
    std::string clients = "global";
    std::string mode = "status";
    std::string read_policy = "nearest";
};

int cmd_recommend(const RecommendArgs& args) {
    World world = load_world(args.common);

    geosmr::RecommendInputs in;
    in.mode = parse_mode(args.mode, args.exec_delays);
    in.n = args.n;
    in.min_distance_km = args.min_distance_km;
    in.p_slow = args.p_slow;
    in.dist = parse_clients(args.clients);
    in.p_write = args.p_write;
    in.read_policy = parse_read_policy(args.read_policy);

    auto ranking = geosmr::recommend(in, world.delay, world.registry);
    std::size_t infeasible = 0;
    for (const auto& r : ranking) {
        if (!r.latency_ms) ++infeasible;
    }
    if (infeasible > 0) {
        std::cerr << "warning: no feasible placement for n=" << in.n << " at "
                  << geosmr::format_double(in.min_distance_km) << " km\n";
    }
    write_output(args.common,
                 args.common.format == "json"
                     ? geosmr::recommendations_to_json(in, ranking).dump(2) + "\n"
                     : geosmr::recommendations_to_csv(ranking));
    return infeasible > 0 && args.common.strict ? kExitInfeasible : kExitOk;
}

// ---- verify ----

struct VerifyArgs {
    CommonOptions common;
    std::uint64_t seed = 42;
    std::uint32_t samples = 500;
};

int cmd_verify(const VerifyArgs& args) {
    World world = load_world(args.common);
    const geosmr::DelayModel& d = world.delay;
    if (d.size() < 7) throw geosmr::ValidationError("verify needs a matrix with >= 7 regions");

    std::mt19937_64 rng(args.seed);
    std::string csv = "n,samples,max_abs_diff_ms,pass\n";
    json jrows = json::array();
    double global_max = 0.0;

    for (std::uint32_t n = 3; n <= 7; ++n) {
        double max_diff = 0.0;
        for (std::uint32_t s = 0; s < args.samples; ++s) {
            const auto replicas = sample_placement(rng, d.size(), n);
            const auto client = static_cast<geosmr::RegionIndex>(draw(rng, d.size()));
            const auto leader_pos = static_cast<std::uint32_t>(draw(rng, n));
            const double p_slow = static_cast<double>(s % 11) / 10.0;

            geosmr::Placement placement{replicas, leader_pos};
            geosmr::Workload w;
            w.clients = {client};
            w.p_write = 1.0;
            w.p_slow = p_slow;

            for (geosmr::ProtocolKind p : geosmr::kAllProtocols) {
                for (const auto& rep :
                     geosmr::des_compare(d, p, placement, w, geosmr::ReadPolicy::NearestReplica)) {
                    max_diff = std::max(max_diff, rep.abs_diff_ms);
                }
            }
            // Isolated slow paths, on top of the composed totals above.
            const geosmr::RegionIndex leader = replicas[leader_pos];
            max_diff = std::max(
                max_diff,
                std::abs(geosmr::slow_path(d, replicas, leader, client) -
                         geosmr::des_run(d, geosmr::ProtocolKind::FastPaxos, replicas, leader,
                                         client, geosmr::SimPath::Slow)));
            const geosmr::RegionIndex coord = geosmr::opt_leader(d, replicas, client);
            max_diff = std::max(
                max_diff,
                std::abs(geosmr::slow_path(d, replicas, coord, client) -
                         geosmr::des_run(d, geosmr::ProtocolKind::EPaxos, replicas, std::nullopt,
                                         client, geosmr::SimPath::Slow)));
        }
        global_max = std::max(global_max, max_diff);
        const bool pass = max_diff <= 1e-9;
        csv += std::to_string(n) + "," + std::to_string(args.samples) + "," +
               geosmr::format_double(max_diff) + "," + (pass ? "true" : "false") + "\n";
        jrows.push_back({{"n", n},
                         {"samples", args.samples},
                         {"max_abs_diff_ms", max_diff},
                         {"pass", pass}});
    }

    const bool pass = global_max <= 1e-9;
    if (args.common.format == "json") {
        json j;
        j["schema_version"] = geosmr::kSchemaVersion;
        j["kind"] = "verify";
        j["seed"] = args.seed;
        j["samples_per_n"] = args.samples;
        j["rows"] = std::move(jrows);
        j["max_abs_diff_ms"] = global_max;
        j["pass"] = pass;
        write_output(args.common, j.dump(2) + "\n");
    } else {
        csv += "all," + std::to_string(args.samples * 5) + "," +
               geosmr::format_double(global_max) + "," + (pass ? "true" : "false") + "\n";
        write_output(args.common, csv);
    }
    return pass ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latency planning for geo-replicated state machine replication"};
    app.require_subcommand(1);

    EstimateArgs est;
    CLI::App* estimate = app.add_subcommand("estimate", "latency of one placement and protocol");
    add_common(estimate, est.common);
    estimate->add_option("--protocol", est.protocol, "protocol name")->required();
    estimate->add_option("--replicas", est.replicas_csv, "comma-separated replica regions")
        ->required();
    estimate->add_option("--leader", est.leader, "leader region, or 'best'")
        ->capture_default_str();
    estimate->add_option("--clients", est.clients, "global|us|comma-separated regions")
        ->capture_default_str();
    estimate->add_option("--p-slow", est.p_slow, "slow-path rate")->capture_default_str();
    estimate->add_option("--p-w", est.p_write, "write probability")->capture_default_str();
    estimate->add_option("--read-policy", est.read_policy, "nearest|leader")
        ->capture_default_str();

    SearchArgs search;
    CLI::App* search_cmd = app.add_subcommand("search", "optimal placement under constraints");
    add_common(search_cmd, search.common);
    search_cmd->add_option("--protocol", search.protocol, "protocol name")->required();
    search_cmd->add_option("--n", search.n, "replica count")->capture_default_str();
    search_cmd->add_option("--min-distance", search.min_distance_km,
                           "minimum pairwise replica distance (km)")
        ->capture_default_str();
    search_cmd->add_option("--clients", search.clients, "global|us|regions")
        ->capture_default_str();
    search_cmd->add_option("--p-slow", search.p_slow, "slow-path rate")->capture_default_str();
    search_cmd->add_option("--p-w", search.p_write, "write probability")->capture_default_str();
    search_cmd->add_option("--leader", search.leader, "leader region, or 'best'")
        ->capture_default_str();
    search_cmd->add_option("--read-policy", search.read_policy, "nearest|leader")
        ->capture_default_str();

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "optimal latency along one axis");
    add_common(sweep_cmd, sweep.common);
    sweep_cmd->add_option("--axis", sweep.axis, "distance|replicas|slow-path")
        ->capture_default_str();
    sweep_cmd->add_option("--values", sweep.values_csv, "override axis values (comma list)");
    sweep_cmd->add_option("--n", sweep.n, "fixed replica count")->capture_default_str();
    sweep_cmd->add_option("--min-distance", sweep.min_distance_km, "fixed distance filter (km)")
        ->capture_default_str();
    sweep_cmd->add_option("--p-slow", sweep.p_slow, "fixed slow-path rate")->capture_default_str();
    sweep_cmd->add_option("--p-w", sweep.p_write, "write probability")->capture_default_str();
    sweep_cmd->add_option("--clients", sweep.clients, "global|us|regions")->capture_default_str();
    sweep_cmd->add_option("--mode", sweep.mode, "status|full")->capture_default_str();
    sweep_cmd->add_option("--exec-delay", sweep.exec_delays,
                          "override a commit-to-execution delay, protocol=ms (repeatable)");
    sweep_cmd->add_option("--read-policy", sweep.read_policy, "nearest|leader")
        ->capture_default_str();

    MapArgs map_args;
    CLI::App* map_cmd = app.add_subcommand("map", "optimal protocol per (n, p_slow) cell");
    add_common(map_cmd, map_args.common);
    map_cmd->add_option("--n-values", map_args.n_values_csv, "replica counts (comma list)")
        ->capture_default_str();
    map_cmd->add_option("--p-slow-values", map_args.p_slow_values_csv,
                        "slow-path rates (comma list); default 0..1 step 0.1");
    map_cmd->add_option("--min-distance", map_args.min_distance_km, "distance filter (km)")
        ->capture_default_str();
    map_cmd->add_option("--p-w", map_args.p_write, "write probability")->capture_default_str();
    map_cmd->add_option("--clients", map_args.clients, "global|us|regions")
        ->capture_default_str();
    map_cmd->add_option("--mode", map_args.mode, "status|full")->capture_default_str();
    map_cmd->add_option("--exec-delay", map_args.exec_delays,
                        "override a commit-to-execution delay, protocol=ms (repeatable)");
    map_cmd->add_option("--read-policy", map_args.read_policy, "nearest|leader")
        ->capture_default_str();

    RecommendArgs rec;
    CLI::App* rec_cmd = app.add_subcommand("recommend", "ranked protocols with guideline notes");
    add_common(rec_cmd, rec.common);
    rec_cmd->add_option("--n", rec.n, "replica count")->capture_default_str();
    rec_cmd->add_option("--min-distance", rec.min_distance_km, "distance filter (km)")
        ->capture_default_str();
    rec_cmd->add_option("--p-slow", rec.p_slow, "slow-path rate")->capture_default_str();
    rec_cmd->add_option("--p-w", rec.p_write, "write probability")->capture_default_str();
    rec_cmd->add_option("--clients", rec.clients, "global|us|regions")->capture_default_str();
    rec_cmd->add_option("--mode", rec.mode, "status|full")->capture_default_str();
    rec_cmd->add_option("--exec-delay", rec.exec_delays,
                        "override a commit-to-execution delay, protocol=ms (repeatable)");
    rec_cmd->add_option("--read-policy", rec.read_policy, "nearest|leader")
        ->capture_default_str();

    VerifyArgs ver;
    CLI::App* ver_cmd = app.add_subcommand("verify", "model vs discrete-event oracle equivalence");
    add_common(ver_cmd, ver.common);
    ver_cmd->add_option("--seed", ver.seed, "sampling seed")->capture_default_str();
    ver_cmd->add_option("--samples", ver.samples, "placements per replica count")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(est);
        if (search_cmd->parsed()) return cmd_search(search);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
        if (map_cmd->parsed()) return cmd_map(map_args);
        if (rec_cmd->parsed()) return cmd_recommend(rec);
        if (ver_cmd->parsed()) return cmd_verify(ver);
    } catch (const geosmr::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const geosmr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
