#pragma once

#include <random>
#include <string>
#include <vector>

#include "geosmr/model.hpp"
#include "geosmr/rtt.hpp"

namespace geosmr::test {

// OWD fixture from the worked 3-replica example: leader A with
// owd(A,B)=10, owd(A,C)=20, owd(B,C)=30, client at 5/15/25.
// Region order: a=0, b=1, c=2, client=3.
inline RttMatrix asymmetric_fixture() {
    RttMatrix m;
    m.regions = {"a", "b", "c", "cl"};
    m.rtt_ms = {
        0,  20, 40, 10,
        20, 0,  60, 30,
        40, 60, 0,  50,
        10, 30, 50, 0,
    };
    return m;
}

// n replicas plus one client, every one-way delay equal to delta.
inline RttMatrix uniform_fixture(std::size_t n_replicas, double delta) {
    RttMatrix m;
    for (std::size_t i = 0; i < n_replicas; ++i) m.regions.push_back("r" + std::to_string(i));
    m.regions.push_back("cl");
    const std::size_t n = m.regions.size();
    m.rtt_ms.assign(n * n, 2.0 * delta);
    for (std::size_t i = 0; i < n; ++i) m.rtt_ms[i * n + i] = 0.0;
    return m;
}

// Same, but the client shares a location with replica 0.
inline RttMatrix colocated_fixture(std::size_t n_replicas, double delta) {
    RttMatrix m = uniform_fixture(n_replicas, delta);
    const std::size_t n = m.regions.size();
    const std::size_t client = n - 1;
    m.rtt_ms[client * n + 0] = 0.0;
    m.rtt_ms[0 * n + client] = 0.0;
    return m;
}

inline RttMatrix random_rtt(std::size_t n, std::mt19937& rng, bool symmetric = false) {
    RttMatrix m;
    for (std::size_t i = 0; i < n; ++i) m.regions.push_back("x" + std::to_string(i));
    m.rtt_ms.assign(n * n, 0.0);
    std::uniform_real_distribution<double> dist(1.0, 200.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (symmetric && j < i) {
                m.rtt_ms[i * n + j] = m.rtt_ms[j * n + i];
            } else {
                m.rtt_ms[i * n + j] = dist(rng);
            }
        }
    }
    return m;
}

inline std::vector<RegionIndex> first_n(std::size_t n) {
    std::vector<RegionIndex> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<RegionIndex>(i);
    return v;
}

}  // namespace geosmr::test
