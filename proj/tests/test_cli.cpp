#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli_app.hpp"

using namespace readorder;
namespace fs = std::filesystem;

namespace {

struct result {
    int code;
    std::string out, err;
};

result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("readorder_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    fs::path dir;
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_F(CliTest, UsageErrorsExitOne) {
    auto r = run({});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(json::parse(r.err)["error"]["code"], 1);
    EXPECT_EQ(run({"bogus"}).code, 1);
    EXPECT_EQ(run({"gen", "--count", "3"}).code, 1);  // missing -o
    EXPECT_EQ(run({"gen", "-o", path("x.jsonl"), "--kind", "spiral"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, DataErrorsExitTwo) {
    auto r = run({"eval", "--pred", path("missing.jsonl"), "--gold", path("missing.jsonl")});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.err)["error"]["kind"], "data");
    std::ofstream(path("bad.jsonl")) << "{\"id\": 1}\n";
    EXPECT_EQ(run({"stats", "--data", path("bad.jsonl")}).code, 2);
}

TEST_F(CliTest, NumericErrorExitsThree) {
    ASSERT_EQ(run({"gen", "--count", "4", "--seed", "1", "-o", path("p.jsonl")}).code, 0);
    auto r = run({"train", "--data", path("p.jsonl"), "-o", path("m.ckpt"), "--lr", "1e30", "--epochs", "3",
                  "--hidden", "16", "--heads", "2", "--ffn", "16", "--warmup", "0"});
    EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(CliTest, GenIsDeterministicAndAlignRecoversPages) {
    const std::vector<std::string> gen{"gen", "--kind", "two_column", "--count", "6", "--seed", "7"};
    auto a = gen, b = gen;
    a.insert(a.end(), {"-o", path("a.jsonl"), "--lines-out", path("l.jsonl"), "--seq-out", path("s.jsonl"),
                       "--layout-out", path("y.jsonl")});
    b.insert(b.end(), {"-o", path("b.jsonl"), "--jobs", "3"});
    ASSERT_EQ(run(a).code, 0);
    ASSERT_EQ(run(b).code, 0);
    EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));

    ASSERT_EQ(run({"align", "--seq", path("s.jsonl"), "--layout", path("y.jsonl"), "-o", path("aligned.jsonl")}).code, 0);
    EXPECT_EQ(slurp(path("aligned.jsonl")), slurp(path("a.jsonl")));

    auto st = run({"stats", "--data", path("a.jsonl")});
    ASSERT_EQ(st.code, 0);
    const auto j = json::parse(st.out);
    EXPECT_EQ(j["pages"], 6);
    EXPECT_EQ(j["histogram"].size(), 4u);
}

TEST_F(CliTest, EvalOfGoldAgainstItselfIsPerfect) {
    ASSERT_EQ(run({"gen", "--count", "5", "-o", path("p.jsonl")}).code, 0);
    // A page file doubles as a prediction file: every record has id and its
    // own order is the identity.
    std::ofstream pred(path("gold_pred.jsonl"));
    for (const auto& p : read_pages(path("p.jsonl")))
        pred << dump_line(to_json(order_prediction{p.id, identity_order(p.size())})) << '\n';
    pred.close();
    auto r = run({"eval", "--pred", path("gold_pred.jsonl"), "--gold", path("p.jsonl")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["avg_bleu"], 1.0);
    EXPECT_EQ(j["avg_ard"], 0.0);
}

TEST_F(CliTest, TrainPredictEvalPipeline) {
    ASSERT_EQ(run({"gen", "--count", "50", "--seed", "3", "-o", path("p.jsonl"), "--lines-out", path("l.jsonl")}).code, 0);
    std::ofstream(path("cfg.json")) << R"({"hidden_dim": 16, "heads": 2, "ffn_dim": 32, "epochs": 5, "lr": 0.5})";
    // The flag overrides the config file's learning rate.
    auto t = run({"train", "--data", path("p.jsonl"), "-o", path("m.ckpt"), "--config", path("cfg.json"), "--lr", "3e-3",
                  "--epochs", "1", "--report", path("train.json")});
    ASSERT_EQ(t.code, 0) << t.err;
    const auto rep = json::parse(slurp(path("train.json")));
    EXPECT_EQ(rep["epochs"], 1);
    EXPECT_EQ(rep["lr"], 3e-3);

    json meta;
    const auto m = model::load_model(path("m.ckpt"), &meta);
    EXPECT_EQ(m.config().hidden_dim, 16);

    auto pr = run({"predict", "--data", path("p.jsonl"), "--method", "model", "--model", path("m.ckpt"), "-o",
                   path("pred.jsonl"), "--beam", "2", "--jobs", "2"});
    ASSERT_EQ(pr.code, 0) << pr.err;
    auto ev = run({"eval", "--pred", path("pred.jsonl"), "--gold", path("p.jsonl"), "-o", path("eval.json")});
    ASSERT_EQ(ev.code, 0) << ev.err;
    const auto j = json::parse(slurp(path("eval.json")));
    EXPECT_EQ(j["per_page"].size(), 50u);
    EXPECT_GE(j["avg_bleu"].get<double>(), 0.0);

    auto hp = run({"predict", "--data", path("p.jsonl")});
    ASSERT_EQ(hp.code, 0);
    std::ofstream(path("h.jsonl")) << hp.out;
    auto ad = run({"adapt-lines", "--tokens", path("p.jsonl"), "--lines", path("l.jsonl"), "--order", path("h.jsonl")});
    ASSERT_EQ(ad.code, 0) << ad.err;
    EXPECT_EQ(std::count(ad.out.begin(), ad.out.end(), '\n'), 50);

    auto svg = run({"render", "--data", path("p.jsonl"), "--pred", path("h.jsonl"), "-o", path("p.svg")});
    ASSERT_EQ(svg.code, 0) << svg.err;
    EXPECT_EQ(slurp(path("p.svg")).rfind("<svg", 0), 0u);
    EXPECT_EQ(run({"render", "--data", path("p.jsonl"), "--id", "nope"}).code, 2);
    EXPECT_EQ(run({"predict", "--data", path("p.jsonl"), "--method", "model"}).code, 1);
}
