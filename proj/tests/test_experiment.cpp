#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fedmr/error.hpp"
#include "fedmr/experiment.hpp"
#include "fedmr/rng.hpp"
#include "fedmr/runio.hpp"
#include "test_support.hpp"

using namespace fedmr;

namespace {

// Small deterministic setup shared by the orchestrator tests.
struct Fixture {
    std::vector<ClientShard> shards;
    Dataset test;
    ExperimentConfig cfg;

    explicit Fixture(int clients = 6, std::size_t per_shard = 12) {
        auto rng = std::mt19937_64(100);
        for (int c = 0; c < clients; ++c) {
            shards.push_back(testsupport::make_shard(c, per_shard, 3, 3, rng));
        }
        ClientShard t = testsupport::make_shard(-1, 60, 3, 3, rng);
        test = t.data;

        cfg.algorithm = Algorithm::fedmr;
        cfg.num_clients = clients;
        cfg.participation_fraction = 0.5;
        cfg.rounds = 4;
        cfg.eval_every = 1;
        cfg.model.kind = ModelSpec::Kind::mlp;
        cfg.model.hidden = {6};
        cfg.local.epochs = 1;
        cfg.local.batch_size = 6;
        cfg.local.learning_rate = 0.05;
        cfg.local.momentum = 0.9;
    }
};

} // namespace

TEST_CASE("sample_clients with K = N returns everyone in order") {
    std::vector<int> all = sample_clients(5, 5, 7, 3);
    CHECK(all == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("sample_clients is deterministic and duplicate-free") {
    for (int round = 1; round <= 20; ++round) {
        std::vector<int> a = sample_clients(10, 4, 99, round);
        std::vector<int> b = sample_clients(10, 4, 99, round);
        CHECK(a == b);
        std::set<int> unique(a.begin(), a.end());
        CHECK(unique.size() == 4);
        for (int id : a) CHECK((id >= 0 && id < 10));
    }
    CHECK(sample_clients(10, 4, 99, 1) != sample_clients(10, 4, 98, 1));
}

TEST_CASE("sample_clients selection frequency is uniform") {
    const int n = 10, k = 2, rounds = 10000;
    std::map<int, int> counts;
    for (int r = 1; r <= rounds; ++r) {
        for (int id : sample_clients(n, k, 12345, r)) counts[id]++;
    }
    for (int id = 0; id < n; ++id) {
        double freq = static_cast<double>(counts[id]) / rounds; // expect k/n = 0.2
        CHECK(std::abs(freq - 0.2) <= 0.01);
    }
}

TEST_CASE("sample_clients rejects K > N") {
    CHECK_THROWS_AS(sample_clients(3, 4, 1, 1), Error);
    CHECK_THROWS_AS(sample_clients(3, 0, 1, 1), Error);
}

TEST_CASE("participant count rounds the participation fraction") {
    ExperimentConfig cfg;
    cfg.num_clients = 20;
    cfg.participation_fraction = 0.1;
    CHECK(cfg.participants() == 2);
    cfg.participation_fraction = 0.01;
    CHECK(cfg.participants() == 1); // clamped to at least one client
    cfg.num_clients = 100;
    cfg.participation_fraction = 0.1;
    CHECK(cfg.participants() == 10);
}

TEST_CASE("zero rounds returns the averaged initial models and no records") {
    Fixture fx;
    fx.cfg.rounds = 0;
    RunResult r = run_experiment(fx.cfg, fx.shards, fx.test);
    CHECK(r.records.empty());

    int k = fx.cfg.participants();
    std::vector<LayeredModel> inits;
    for (int i = 0; i < k; ++i) {
        inits.push_back(build_model(fx.cfg.model, fx.test.feature_shape(), fx.test.num_classes,
                                    model_init_seed(fx.cfg.seeds.init, i)));
    }
    CHECK(models_bit_equal(r.final_model, global_model_gen(inits)));
}

TEST_CASE("config inconsistencies are rejected before training") {
    Fixture fx;
    fx.cfg.pretrain_rounds = 10; // > rounds
    CHECK_THROWS_AS(run_experiment(fx.cfg, fx.shards, fx.test), Error);
    fx.cfg.pretrain_rounds = 0;
    fx.cfg.num_clients = 7; // shard count mismatch
    CHECK_THROWS_AS(run_experiment(fx.cfg, fx.shards, fx.test), Error);
}

TEST_CASE("every round logs 2K transfers and K distinct clients") {
    Fixture fx;
    RunResult r = run_experiment(fx.cfg, fx.shards, fx.test);
    int k = fx.cfg.participants();
    REQUIRE(r.records.size() == 4);
    for (const RoundRecord& rec : r.records) {
        CHECK(rec.transfers == 2 * k);
        CHECK(rec.clients.size() == static_cast<std::size_t>(k));
        std::set<int> unique(rec.clients.begin(), rec.clients.end());
        CHECK(unique.size() == rec.clients.size());
        CHECK(rec.client_loss.size() == rec.clients.size());
    }
}

TEST_CASE("stage tags are pretrain up to the switch point, recombine after") {
    Fixture fx;
    fx.cfg.rounds = 6;
    fx.cfg.pretrain_rounds = 3;
    RunResult r = run_experiment(fx.cfg, fx.shards, fx.test);
    for (const RoundRecord& rec : r.records) {
        CHECK(rec.stage == (rec.round <= 3 ? "pretrain" : "recombine"));
        if (rec.stage == "recombine") CHECK_FALSE(rec.layer_perms.empty());
        if (rec.stage == "pretrain") CHECK(rec.layer_perms.empty());
    }
}

TEST_CASE("two-stage prefix matches pure fedavg round for round") {
    Fixture fx;
    fx.cfg.rounds = 5;
    fx.cfg.pretrain_rounds = 3;
    fx.cfg.algorithm = Algorithm::fedmr;
    RunResult staged = run_experiment(fx.cfg, fx.shards, fx.test);

    ExperimentConfig avg_cfg = fx.cfg;
    avg_cfg.algorithm = Algorithm::fedavg;
    avg_cfg.pretrain_rounds = 0;
    RunResult avg = run_experiment(avg_cfg, fx.shards, fx.test);

    for (int i = 0; i < 3; ++i) {
        CHECK(records_equal(staged.records[static_cast<std::size_t>(i)], avg.records[static_cast<std::size_t>(i)]));
    }
    CHECK_FALSE(records_equal(staged.records[3], avg.records[3]));
}

TEST_CASE("replay yields identical records") {
    Fixture fx;
    RunResult a = run_experiment(fx.cfg, fx.shards, fx.test);
    RunResult b = run_experiment(fx.cfg, fx.shards, fx.test);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(records_equal(a.records[i], b.records[i]));
    CHECK(models_bit_equal(a.final_model, b.final_model));
}

TEST_CASE("worker-pool fan-out is schedule independent") {
    Fixture fx;
    fx.cfg.threads = 1;
    RunResult seq = run_experiment(fx.cfg, fx.shards, fx.test);
    fx.cfg.threads = 3;
    RunResult par = run_experiment(fx.cfg, fx.shards, fx.test);
    REQUIRE(seq.records.size() == par.records.size());
    for (std::size_t i = 0; i < seq.records.size(); ++i) CHECK(records_equal(seq.records[i], par.records[i]));
    CHECK(models_bit_equal(seq.final_model, par.final_model));
}

TEST_CASE("a K = 1 recombination round is exactly solo training") {
    Fixture fx(4, 14);
    fx.cfg.participation_fraction = 0.25; // K = 1
    fx.cfg.rounds = 3;
    RunResult r = run_experiment(fx.cfg, fx.shards, fx.test);

    // replay by hand: single model chain through the sampled clients
    LayeredModel w = build_model(fx.cfg.model, fx.test.feature_shape(), fx.test.num_classes,
                                 model_init_seed(fx.cfg.seeds.init, 0));
    for (int round = 1; round <= 3; ++round) {
        std::vector<int> who = sample_clients(fx.cfg.num_clients, 1, fx.cfg.seeds.sampling, round);
        REQUIRE(who == r.records[static_cast<std::size_t>(round - 1)].clients);
        std::uint64_t seed = batch_order_seed(fx.cfg.seeds.data, round, who[0]);
        w = client_update(w, fx.shards[static_cast<std::size_t>(who[0])], fx.cfg.local, seed).model;
    }
    CHECK(models_bit_equal(r.final_model, w));
}

TEST_CASE("fedavg with full participation reproduces the centralized oracle") {
    // equal shards, full batch, one epoch, momentum 0, every client active
    auto rng = std::mt19937_64(500);
    const int clients = 3;
    const std::size_t per_shard = 10;
    std::vector<ClientShard> shards;
    for (int c = 0; c < clients; ++c) shards.push_back(testsupport::make_shard(c, per_shard, 3, 3, rng));
    Dataset test = testsupport::make_shard(-1, 30, 3, 3, rng).data;

    ExperimentConfig cfg;
    cfg.algorithm = Algorithm::fedavg;
    cfg.num_clients = clients;
    cfg.participation_fraction = 1.0;
    cfg.rounds = 1;
    cfg.identical_init = true; // all clients start from the same w0
    cfg.model.hidden = {5};
    cfg.local.epochs = 1;
    cfg.local.batch_size = 1000;
    cfg.local.learning_rate = 0.1;
    cfg.local.momentum = 0.0;

    RunResult r = run_experiment(cfg, shards, test);

    LayeredModel w0 = build_model(cfg.model, test.feature_shape(), test.num_classes,
                                  model_init_seed(cfg.seeds.init, 0));
    Dataset merged;
    merged.num_classes = 3;
    merged.xs = Tensor({per_shard * clients, 3});
    merged.ys.resize(per_shard * clients);
    for (int c = 0; c < clients; ++c) {
        for (std::size_t i = 0; i < per_shard; ++i) {
            std::size_t dst = static_cast<std::size_t>(c) * per_shard + i;
            merged.ys[dst] = shards[static_cast<std::size_t>(c)].data.ys[i];
            for (std::size_t f = 0; f < 3; ++f) {
                merged.xs.data[dst * 3 + f] = shards[static_cast<std::size_t>(c)].data.xs.data[i * 3 + f];
            }
        }
    }
    auto [loss, grads] = loss_and_grad(w0, merged.xs, merged.ys);
    grads.scale(0.1);
    LayeredModel centralized = w0;
    for (std::size_t li = 0; li < centralized.layers.size(); ++li) {
        if (!centralized.layers[li].has_params()) continue;
        for (std::size_t i = 0; i < centralized.layers[li].weight.data.size(); ++i) {
            centralized.layers[li].weight.data[i] -= grads.weight[li].data[i];
        }
        for (std::size_t i = 0; i < centralized.layers[li].bias.data.size(); ++i) {
            centralized.layers[li].bias.data[i] -= grads.bias[li].data[i];
        }
    }
    for (std::size_t li = 0; li < centralized.layers.size(); ++li) {
        if (!centralized.layers[li].has_params()) continue;
        for (std::size_t i = 0; i < centralized.layers[li].weight.data.size(); ++i) {
            CHECK(std::abs(r.final_model.layers[li].weight.data[i] - centralized.layers[li].weight.data[i]) < 1e-10);
        }
    }
}

TEST_CASE("eval cadence controls which rounds carry metrics") {
    Fixture fx;
    fx.cfg.rounds = 5;
    fx.cfg.eval_every = 2;
    RunResult r = run_experiment(fx.cfg, fx.shards, fx.test);
    for (const RoundRecord& rec : r.records) {
        bool expect = rec.round % 2 == 0 || rec.round == 5;
        CHECK(rec.evaluated == expect);
    }
    std::string csv = metrics_csv(r);
    CHECK(csv.rfind("round,stage,accuracy,loss\n", 0) == 0);
    // rows: rounds 2, 4, 5
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("no-MR rounds record a whole-model permutation") {
    Fixture fx;
    fx.cfg.algorithm = Algorithm::fedmr_no_mr;
    RunResult r = run_experiment(fx.cfg, fx.shards, fx.test);
    for (const RoundRecord& rec : r.records) {
        CHECK(rec.layer_perms.empty());
        std::vector<int> sorted = rec.dispatch_perm;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == static_cast<int>(i));
    }
}
