#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "geosmr/model.hpp"
#include "helpers.hpp"

using namespace geosmr;
using geosmr::test::asymmetric_fixture;
using geosmr::test::colocated_fixture;
using geosmr::test::first_n;
using geosmr::test::uniform_fixture;

namespace {

constexpr double kRel = 1e-12;

struct Fixture {
    DelayModel d;
    std::vector<RegionIndex> replicas;
    RegionIndex client;

    explicit Fixture(const RttMatrix& m)
        : d(m), replicas(first_n(m.regions.size() - 1)),
          client(static_cast<RegionIndex>(m.regions.size() - 1)) {}
};

}  // namespace

TEST_CASE("find_kth returns the k-th smallest with duplicates") {
    std::vector<double> v1 = {5, 3, 9};
    CHECK(find_kth(v1, 1) == 3.0);
    CHECK(find_kth(v1, 2) == 5.0);
    CHECK(find_kth(v1, 3) == 9.0);
    std::vector<double> v2 = {4, 4, 7};
    CHECK(find_kth(v2, 2) == 4.0);
    CHECK_THROWS_AS(find_kth(v1, 0), std::out_of_range);
    CHECK_THROWS_AS(find_kth(v1, 4), std::out_of_range);
}

TEST_CASE("quorum sizes") {
    CHECK(majority_quorum(1) == 1);
    CHECK(majority_quorum(3) == 2);
    CHECK(majority_quorum(4) == 3);
    CHECK(majority_quorum(7) == 4);
    CHECK(fast_quorum(1) == 1);
    CHECK(fast_quorum(3) == 3);
    CHECK(fast_quorum(4) == 3);
    CHECK(fast_quorum(5) == 4);
    CHECK(fast_quorum(6) == 5);
    CHECK(fast_quorum(7) == 6);
}

TEST_CASE("opt_leader picks the nearest replica, lowest index on ties") {
    Fixture f(asymmetric_fixture());
    CHECK(opt_leader(f.d, f.replicas, f.client) == 0);  // delays 5/15/25

    Fixture co(colocated_fixture(3, 10.0));
    CHECK(opt_leader(co.d, co.replicas, co.client) == 0);  // zero delay is minimal

    Fixture uni(uniform_fixture(3, 10.0));
    CHECK(opt_leader(uni.d, uni.replicas, uni.client) == 0);  // all equal: first wins
}

TEST_CASE("multi_paxos") {
    SECTION("n=1 is one client round trip") {
        Fixture f(uniform_fixture(1, 7.0));
        CHECK_THAT(multi_paxos(f.d, f.replicas, 0, f.client),
                   Catch::Matchers::WithinRel(14.0, kRel));
    }
    SECTION("uniform delta gives 4 delta") {
        Fixture f(uniform_fixture(3, 10.0));
        CHECK_THAT(multi_paxos(f.d, f.replicas, 0, f.client),
                   Catch::Matchers::WithinRel(40.0, kRel));
    }
    SECTION("asymmetric fixture gives 30 ms") {
        Fixture f(asymmetric_fixture());
        CHECK_THAT(multi_paxos(f.d, f.replicas, 0, f.client),
                   Catch::Matchers::WithinRel(30.0, kRel));
        CHECK_THAT(multi_paxos(f.d, f.replicas, 1, f.client),
                   Catch::Matchers::WithinRel(50.0, kRel));
        CHECK_THAT(multi_paxos(f.d, f.replicas, 2, f.client),
                   Catch::Matchers::WithinRel(90.0, kRel));
    }
    SECTION("leader must be a replica") {
        Fixture f(asymmetric_fixture());
        CHECK_THROWS_AS(multi_paxos(f.d, f.replicas, f.client, f.client),
                        LeaderNotInPlacementError);
    }
}

TEST_CASE("mencius") {
    SECTION("co-located client finishes after one inter-replica round trip") {
        Fixture f(colocated_fixture(3, 10.0));
        CHECK_THAT(mencius(f.d, f.replicas, f.client), Catch::Matchers::WithinRel(20.0, kRel));
    }
    SECTION("uniform delta equals multi_paxos") {
        Fixture f(uniform_fixture(3, 10.0));
        CHECK_THAT(mencius(f.d, f.replicas, f.client), Catch::Matchers::WithinRel(40.0, kRel));
        CHECK(mencius(f.d, f.replicas, f.client) == multi_paxos(f.d, f.replicas, 0, f.client));
    }
    SECTION("asymmetric fixture gives 30 ms") {
        Fixture f(asymmetric_fixture());
        CHECK_THAT(mencius(f.d, f.replicas, f.client), Catch::Matchers::WithinRel(30.0, kRel));
    }
}

TEST_CASE("fast_path") {
    SECTION("uniform delta is one client round trip") {
        Fixture f(uniform_fixture(3, 10.0));
        CHECK_THAT(fast_path(f.d, f.replicas, f.client), Catch::Matchers::WithinRel(20.0, kRel));
    }
    SECTION("n=3 needs every replica") {
        Fixture f(asymmetric_fixture());  // round trips 10/30/50
        CHECK_THAT(fast_path(f.d, f.replicas, f.client), Catch::Matchers::WithinRel(50.0, kRel));
    }
    SECTION("n=4 tolerates the slowest replica") {
        RttMatrix m;
        m.regions = {"r0", "r1", "r2", "r3", "cl"};
        m.rtt_ms.assign(25, 0.0);
        auto set = [&](std::size_t i, std::size_t j, double v) {
            m.rtt_ms[i * 5 + j] = v;
            m.rtt_ms[j * 5 + i] = v;
        };
        set(4, 0, 10.0);
        set(4, 1, 20.0);
        set(4, 2, 30.0);
        set(4, 3, 40.0);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) set(i, j, 10.0);
        Fixture f(m);
        // client round trips {10,20,30,40}: fast quorum of 3 ends at 30.
        CHECK_THAT(fast_path(f.d, f.replicas, f.client), Catch::Matchers::WithinRel(30.0, kRel));
    }
}

TEST_CASE("slow_path") {
    SECTION("n=1 is a single response hop") {
        Fixture f(uniform_fixture(1, 7.0));
        CHECK_THAT(slow_path(f.d, f.replicas, 0, f.client), Catch::Matchers::WithinRel(7.0, kRel));
    }
    SECTION("uniform delta: the clock starts at the leader") {
        Fixture f(uniform_fixture(3, 10.0));
        CHECK_THAT(slow_path(f.d, f.replicas, 0, f.client), Catch::Matchers::WithinRel(30.0, kRel));
    }
    SECTION("asymmetric fixture, leader a, gives 25 ms") {
        Fixture f(asymmetric_fixture());
        CHECK_THAT(slow_path(f.d, f.replicas, 0, f.client), Catch::Matchers::WithinRel(25.0, kRel));
    }
}

TEST_CASE("fast_paxos composition") {
    Fixture f(asymmetric_fixture());
    SECTION("p_slow=0 degenerates to the fast path") {
        ProtocolEstimate e = fast_paxos(f.d, f.replicas, 0, f.client, 0.0);
        CHECK(e.total_ms == fast_path(f.d, f.replicas, f.client));
        CHECK(e.slow_ms == slow_path(f.d, f.replicas, 0, f.client));
    }
    SECTION("uniform delta at p_slow=1 gives 5 delta") {
        Fixture u(uniform_fixture(3, 10.0));
        CHECK_THAT(fast_paxos(u.d, u.replicas, 0, u.client, 1.0).total_ms,
                   Catch::Matchers::WithinRel(50.0, kRel));
    }
    SECTION("asymmetric fixture at p_slow=0.2 gives 55 ms") {
        CHECK_THAT(fast_paxos(f.d, f.replicas, 0, f.client, 0.2).total_ms,
                   Catch::Matchers::WithinRel(55.0, kRel));
    }
    SECTION("p_slow outside [0,1] is rejected") {
        CHECK_THROWS_AS(fast_paxos(f.d, f.replicas, 0, f.client, 1.5), ValidationError);
        CHECK_THROWS_AS(fast_paxos(f.d, f.replicas, 0, f.client, -0.1), ValidationError);
    }
}

TEST_CASE("domino") {
    SECTION("uniform delta takes the fast branch") {
        Fixture f(uniform_fixture(3, 10.0));
        ProtocolEstimate e = domino(f.d, f.replicas, 0, f.client, 0.0);
        REQUIRE(e.domino_branch == DominoBranch::FastPaxos);
        CHECK_THAT(e.total_ms, Catch::Matchers::WithinRel(20.0, kRel));
        CHECK(e.min_multi_paxos_ms == 40.0);
    }
    SECTION("asymmetric fixture takes the Mencius branch at 30 ms") {
        Fixture f(asymmetric_fixture());
        ProtocolEstimate e = domino(f.d, f.replicas, 0, f.client, 0.2);
        REQUIRE(e.domino_branch == DominoBranch::Mencius);
        CHECK_THAT(e.total_ms, Catch::Matchers::WithinRel(30.0, kRel));
        CHECK(e.slow_ms == 0.0);
        CHECK(e.leader_used == 0);
    }
    SECTION("branch condition ignores the caller's p_slow") {
        Fixture f(uniform_fixture(3, 10.0));
        ProtocolEstimate e = domino(f.d, f.replicas, 0, f.client, 1.0);
        REQUIRE(e.domino_branch == DominoBranch::FastPaxos);
        CHECK_THAT(e.total_ms, Catch::Matchers::WithinRel(50.0, kRel));
    }
}

TEST_CASE("epaxos") {
    SECTION("p_slow=0 coincides with mencius exactly") {
        Fixture f(asymmetric_fixture());
        CHECK(epaxos(f.d, f.replicas, f.client, 0.0).total_ms == mencius(f.d, f.replicas, f.client));
    }
    SECTION("asymmetric fixture at p_slow=0.2 gives 35 ms") {
        Fixture f(asymmetric_fixture());
        CHECK_THAT(epaxos(f.d, f.replicas, f.client, 0.2).total_ms,
                   Catch::Matchers::WithinRel(35.0, kRel));
    }
    SECTION("co-located client at p_slow=1") {
        // Coordinator and slow-path leader are both the co-located replica, so
        // each phase ends with the coordinator's free response hop: 2d + 2d.
        Fixture f(colocated_fixture(3, 10.0));
        ProtocolEstimate e = epaxos(f.d, f.replicas, f.client, 1.0);
        CHECK_THAT(e.fast_ms, Catch::Matchers::WithinRel(20.0, kRel));
        CHECK_THAT(e.slow_ms, Catch::Matchers::WithinRel(20.0, kRel));
        CHECK_THAT(e.total_ms, Catch::Matchers::WithinRel(40.0, kRel));
    }
}

TEST_CASE("read latency") {
    Fixture f(asymmetric_fixture());
    SECTION("nearest replica") {
        CHECK(read_latency(f.d, f.replicas, f.client, ReadPolicy::NearestReplica) == 10.0);
        Fixture co(colocated_fixture(3, 10.0));
        CHECK(read_latency(co.d, co.replicas, co.client, ReadPolicy::NearestReplica) == 0.0);
    }
    SECTION("leader only") {
        CHECK(read_latency(f.d, f.replicas, f.client, ReadPolicy::LeaderOnly, RegionIndex{1}) ==
              30.0);
        CHECK_THROWS_AS(read_latency(f.d, f.replicas, f.client, ReadPolicy::LeaderOnly),
                        MissingLeaderError);
        CHECK_THROWS_AS(
            read_latency(f.d, f.replicas, f.client, ReadPolicy::LeaderOnly, f.client),
            LeaderNotInPlacementError);
    }
}

TEST_CASE("estimate blends write and read terms") {
    Fixture f(asymmetric_fixture());
    Placement placement{f.replicas, 0};
    Workload w;
    w.clients = {f.client};

    SECTION("p_w=1 equals the write latency") {
        w.p_write = 1.0;
        CHECK(estimate(f.d, ProtocolKind::MultiPaxos, placement, f.client, w,
                       ReadPolicy::NearestReplica) == 30.0);
    }
    SECTION("p_w=0 equals the read latency") {
        w.p_write = 0.0;
        CHECK(estimate(f.d, ProtocolKind::MultiPaxos, placement, f.client, w,
                       ReadPolicy::NearestReplica) == 10.0);
    }
    SECTION("p_w=0.5 averages them") {
        w.p_write = 0.5;
        CHECK(estimate(f.d, ProtocolKind::MultiPaxos, placement, f.client, w,
                       ReadPolicy::NearestReplica) == 20.0);
    }
    SECTION("leader-based protocols demand a leader") {
        Placement leaderless{f.replicas, std::nullopt};
        w.p_write = 1.0;
        CHECK_THROWS_AS(estimate(f.d, ProtocolKind::MultiPaxos, leaderless, f.client, w,
                                 ReadPolicy::NearestReplica),
                        MissingLeaderError);
        CHECK_THROWS_AS(estimate(f.d, ProtocolKind::Domino, leaderless, f.client, w,
                                 ReadPolicy::NearestReplica),
                        MissingLeaderError);
        CHECK_NOTHROW(estimate(f.d, ProtocolKind::Mencius, leaderless, f.client, w,
                               ReadPolicy::NearestReplica));
    }
}

TEST_CASE("el_avg weights the client multiset") {
    // Two distinguishable clients against a single replica: EL is the client's
    // round trip, so the averages are easy to state.
    RttMatrix m;
    m.regions = {"r0", "c1", "c2"};
    m.rtt_ms = {
        0, 10, 40,
        10, 0, 0,
        40, 0, 0,
    };
    DelayModel d(m);
    Placement placement{{0}, 0};
    Workload w;
    w.p_write = 1.0;

    w.clients = {1};
    CHECK(el_avg(d, ProtocolKind::MultiPaxos, placement, w, ReadPolicy::NearestReplica) == 10.0);
    w.clients = {1, 2};
    CHECK(el_avg(d, ProtocolKind::MultiPaxos, placement, w, ReadPolicy::NearestReplica) == 25.0);
    w.clients = {1, 1, 2};
    CHECK(el_avg(d, ProtocolKind::MultiPaxos, placement, w, ReadPolicy::NearestReplica) == 20.0);
    w.clients = {};
    CHECK_THROWS_AS(el_avg(d, ProtocolKind::MultiPaxos, placement, w, ReadPolicy::NearestReplica),
                    ValidationError);
}

TEST_CASE("best_leader") {
    Fixture f(asymmetric_fixture());
    Workload w;
    w.clients = {f.client};

    SECTION("exhaustive scan matches per-leader evaluation") {
        Placement placement{f.replicas, std::nullopt};
        LeaderChoice choice = best_leader(f.d, ProtocolKind::MultiPaxos, placement, w,
                                          ReadPolicy::NearestReplica);
        CHECK(choice.leader == 0);
        CHECK(choice.el_avg_ms == 30.0);
    }
    SECTION("single replica") {
        Placement placement{{2}, std::nullopt};
        CHECK(best_leader(f.d, ProtocolKind::MultiPaxos, placement, w, ReadPolicy::NearestReplica)
                  .leader == 2);
    }
    SECTION("uniform fixture ties break to the first replica") {
        Fixture u(uniform_fixture(3, 10.0));
        Workload wu;
        wu.clients = {u.client};
        Placement placement{u.replicas, std::nullopt};
        CHECK(best_leader(u.d, ProtocolKind::MultiPaxos, placement, wu, ReadPolicy::NearestReplica)
                  .leader == 0);
    }
    SECTION("rejected for protocols without a leader") {
        Placement placement{f.replicas, std::nullopt};
        CHECK_THROWS_AS(best_leader(f.d, ProtocolKind::Mencius, placement, w,
                                    ReadPolicy::NearestReplica),
                        NotLeaderBasedError);
        CHECK_THROWS_AS(best_leader(f.d, ProtocolKind::EPaxos, placement, w,
                                    ReadPolicy::NearestReplica),
                        NotLeaderBasedError);
    }
}

TEST_CASE("model properties over random delay matrices") {
    std::mt19937 rng(20240812);
    std::uniform_real_distribution<double> prob(0.0, 1.0);

    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 1 + rng() % 7;
        RttMatrix m = test::random_rtt(n + 1, rng);
        DelayModel d(m);
        std::vector<RegionIndex> replicas = first_n(n);
        const RegionIndex client = static_cast<RegionIndex>(n);
        const RegionIndex leader = replicas[rng() % n];
        const double p = prob(rng);

        // Affinity: totals are exactly affine in p_slow with slope slow_ms.
        {
            ProtocolEstimate fp = fast_paxos(d, replicas, leader, client, p);
            CHECK(fp.total_ms == fp.fast_ms + fp.slow_ms * p);
            CHECK(fp.fast_ms == fast_paxos(d, replicas, leader, client, 0.0).total_ms);
            ProtocolEstimate ep = epaxos(d, replicas, client, p);
            CHECK(ep.total_ms == ep.fast_ms + ep.slow_ms * p);
            CHECK(ep.fast_ms == epaxos(d, replicas, client, 0.0).total_ms);
        }

        // Mencius is multi_paxos at the proximity-optimal leader; EPaxos at
        // p_slow=0 coincides with it.
        CHECK(mencius(d, replicas, client) ==
              multi_paxos(d, replicas, opt_leader(d, replicas, client), client));
        CHECK(epaxos(d, replicas, client, 0.0).total_ms == mencius(d, replicas, client));

        // Domino always returns one of its two branches.
        {
            ProtocolEstimate e = domino(d, replicas, leader, client, p);
            const double me = mencius(d, replicas, client);
            const double fp = fast_paxos(d, replicas, leader, client, p).total_ms;
            CHECK((e.total_ms == me || e.total_ms == fp));
        }

        // Scaling every delay by a power of two scales every latency exactly.
        {
            RttMatrix scaled = m;
            for (double& v : scaled.rtt_ms) v *= 2.0;
            DelayModel d2(scaled);
            CHECK(multi_paxos(d2, replicas, leader, client) ==
                  2.0 * multi_paxos(d, replicas, leader, client));
            CHECK(mencius(d2, replicas, client) == 2.0 * mencius(d, replicas, client));
            CHECK(fast_paxos(d2, replicas, leader, client, p).total_ms ==
                  2.0 * fast_paxos(d, replicas, leader, client, p).total_ms);
            CHECK(domino(d2, replicas, leader, client, p).total_ms ==
                  2.0 * domino(d, replicas, leader, client, p).total_ms);
            CHECK(epaxos(d2, replicas, client, p).total_ms ==
                  2.0 * epaxos(d, replicas, client, p).total_ms);
        }

        // Arbitrary positive scaling holds to rounding error.
        {
            RttMatrix scaled = m;
            for (double& v : scaled.rtt_ms) v *= 3.7;
            DelayModel d2(scaled);
            CHECK_THAT(multi_paxos(d2, replicas, leader, client),
                       Catch::Matchers::WithinRel(3.7 * multi_paxos(d, replicas, leader, client),
                                                  1e-12));
            CHECK_THAT(epaxos(d2, replicas, client, p).total_ms,
                       Catch::Matchers::WithinRel(3.7 * epaxos(d, replicas, client, p).total_ms,
                                                  1e-12));
        }

        // Fixed-leader latencies never decrease when delays grow pointwise.
        {
            RttMatrix grown = m;
            std::uniform_real_distribution<double> bump(0.0, 30.0);
            for (std::size_t i = 0; i < grown.regions.size(); ++i) {
                for (std::size_t j = 0; j < grown.regions.size(); ++j) {
                    if (i != j) grown.at(i, j) += bump(rng);
                }
            }
            DelayModel d2(grown);
            CHECK(multi_paxos(d2, replicas, leader, client) >=
                  multi_paxos(d, replicas, leader, client));
            CHECK(fast_path(d2, replicas, client) >= fast_path(d, replicas, client));
            CHECK(slow_path(d2, replicas, leader, client) >=
                  slow_path(d, replicas, leader, client));
            CHECK(fast_paxos(d2, replicas, leader, client, p).total_ms >=
                  fast_paxos(d, replicas, leader, client, p).total_ms);
        }
    }
}

TEST_CASE("estimate decompositions satisfy the total invariant") {
    std::mt19937 rng(5);
    for (int iter = 0; iter < 50; ++iter) {
        const std::size_t n = 2 + rng() % 6;
        RttMatrix m = test::random_rtt(n + 1, rng);
        DelayModel d(m);
        std::vector<RegionIndex> replicas = first_n(n);
        const RegionIndex client = static_cast<RegionIndex>(n);
        const double p = static_cast<double>(rng() % 11) / 10.0;

        for (ProtocolKind proto : kAllProtocols) {
            ProtocolEstimate e =
                protocol_estimate(d, proto, replicas, replicas[0], client, p);
            if (proto == ProtocolKind::MultiPaxos || proto == ProtocolKind::Mencius) {
                CHECK(e.slow_ms == 0.0);
                CHECK(e.total_ms == e.fast_ms);
            } else if (proto == ProtocolKind::Domino &&
                       e.domino_branch == DominoBranch::Mencius) {
                CHECK(e.slow_ms == 0.0);
                CHECK(e.total_ms == e.fast_ms);
            } else {
                CHECK(e.total_ms == e.fast_ms + e.slow_ms * p);
            }
        }
    }
}
