#include "fedmr/partition.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <json.hpp>

#include "fedmr/error.hpp"
#include "fedmr/rng.hpp"

namespace fedmr {

namespace {

// Largest-remainder allocation of `total` items according to proportions,
// ties broken by client index so the result is deterministic.
std::vector<std::size_t> apportion(const std::vector<double>& proportions, std::size_t total) {
    std::size_t n = proportions.size();
    std::vector<std::size_t> counts(n, 0);
    std::vector<std::pair<double, std::size_t>> remainders(n);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double exact = proportions[i] * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(exact);
        assigned += counts[i];
        remainders[i] = {exact - static_cast<double>(counts[i]), i};
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; assigned < total; ++i, ++assigned) {
        counts[remainders[i % n].second] += 1;
    }
    return counts;
}

std::vector<std::vector<std::size_t>> dirichlet_attempt(const Dataset& dataset, const PartitionSpec& spec,
                                                        std::mt19937_64& rng) {
    std::size_t n_clients = static_cast<std::size_t>(spec.num_clients);
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.ys[i])].push_back(i);
    }

    std::vector<std::vector<std::size_t>> clients(n_clients);
    std::gamma_distribution<double> gamma(spec.alpha, 1.0);
    for (auto& class_indices : by_class) {
        if (class_indices.empty()) continue;
        std::shuffle(class_indices.begin(), class_indices.end(), rng);
        // p_c ~ Dir(alpha * 1_N) via normalized gamma draws.
        std::vector<double> p(n_clients);
        double sum = 0.0;
        for (double& v : p) {
            v = gamma(rng);
            sum += v;
        }
        if (sum <= 0.0) {
            // All-zero draw (possible for tiny alpha): give everything to one client.
            p.assign(n_clients, 0.0);
            p[std::uniform_int_distribution<std::size_t>(0, n_clients - 1)(rng)] = 1.0;
        } else {
            for (double& v : p) v /= sum;
        }
        std::vector<std::size_t> counts = apportion(p, class_indices.size());
        std::size_t cursor = 0;
        for (std::size_t c = 0; c < n_clients; ++c) {
            for (std::size_t k = 0; k < counts[c]; ++k) clients[c].push_back(class_indices[cursor++]);
        }
    }
    return clients;
}

// Moves samples from the largest shards onto deficient ones until every
// client meets the minimum. Round-robin over the surplus keeps it stable.
void repair_minimum(std::vector<std::vector<std::size_t>>& clients, std::size_t min_samples) {
    while (true) {
        std::size_t smallest = 0, largest = 0;
        for (std::size_t c = 1; c < clients.size(); ++c) {
            if (clients[c].size() < clients[smallest].size()) smallest = c;
            if (clients[c].size() > clients[largest].size()) largest = c;
        }
        if (clients[smallest].size() >= min_samples) return;
        if (clients[largest].size() <= min_samples) {
            fail(ErrorCode::invalid_argument, "partition repair failed: not enough samples to satisfy the minimum");
        }
        clients[smallest].push_back(clients[largest].back());
        clients[largest].pop_back();
    }
}

} // namespace

std::vector<std::vector<std::size_t>> partition_indices(const Dataset& dataset, const PartitionSpec& spec,
                                                        std::uint64_t seed) {
    if (spec.num_clients < 1) fail(ErrorCode::invalid_argument, "partition: num_clients must be positive");
    if (spec.min_samples_per_client < 1) fail(ErrorCode::invalid_argument, "partition: min_samples_per_client must be >= 1");
    std::size_t n = dataset.size();
    std::size_t n_clients = static_cast<std::size_t>(spec.num_clients);
    std::size_t min_needed = n_clients * static_cast<std::size_t>(spec.min_samples_per_client);
    if (n < min_needed) {
        fail(ErrorCode::invalid_argument, "partition: dataset has " + std::to_string(n) + " samples but " +
                                              std::to_string(min_needed) + " are required for " +
                                              std::to_string(n_clients) + " clients");
    }

    auto rng = make_rng(seed);
    std::vector<std::vector<std::size_t>> clients;

    if (spec.scheme == PartitionSpec::Scheme::iid) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        clients.assign(n_clients, {});
        std::size_t base = n / n_clients, extra = n % n_clients;
        std::size_t cursor = 0;
        for (std::size_t c = 0; c < n_clients; ++c) {
            std::size_t take = base + (c < extra ? 1 : 0);
            clients[c].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                              order.begin() + static_cast<std::ptrdiff_t>(cursor + take));
            cursor += take;
        }
    } else {
        if (spec.alpha <= 0.0) fail(ErrorCode::invalid_argument, "partition: dirichlet alpha must be > 0");
        constexpr int kMaxAttempts = 20;
        std::size_t min_samples = static_cast<std::size_t>(spec.min_samples_per_client);
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            clients = dirichlet_attempt(dataset, spec, rng);
            bool ok = std::all_of(clients.begin(), clients.end(),
                                  [&](const auto& v) { return v.size() >= min_samples; });
            if (ok) break;
            if (attempt == kMaxAttempts - 1) repair_minimum(clients, min_samples);
        }
    }

    for (auto& shard : clients) std::sort(shard.begin(), shard.end());
    return clients;
}

std::vector<ClientShard> make_shards(const Dataset& dataset, const std::vector<std::vector<std::size_t>>& indices) {
    std::vector<ClientShard> shards;
    shards.reserve(indices.size());
    for (std::size_t c = 0; c < indices.size(); ++c) {
        shards.push_back(ClientShard{static_cast<int>(c), dataset.subset(indices[c])});
    }
    return shards;
}

std::string partition_manifest_json(const PartitionSpec& spec, std::uint64_t seed,
                                    const std::vector<std::vector<std::size_t>>& indices) {
    nlohmann::json j;
    j["scheme"] = spec.scheme == PartitionSpec::Scheme::iid ? "iid" : "dirichlet";
    if (spec.scheme == PartitionSpec::Scheme::dirichlet) {
        j["alpha"] = spec.alpha;
        j["convention"] = "per-class-over-clients";
    }
    j["num_clients"] = spec.num_clients;
    j["min_samples_per_client"] = spec.min_samples_per_client;
    j["seed"] = seed;
    nlohmann::json clients = nlohmann::json::object();
    for (std::size_t c = 0; c < indices.size(); ++c) {
        clients[std::to_string(c)] = indices[c];
    }
    j["clients"] = std::move(clients);
    return j.dump(2);
}

} // namespace fedmr
