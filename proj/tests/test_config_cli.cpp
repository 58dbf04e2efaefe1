#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "dkn/config.hpp"
#include "dkn/pipeline.hpp"
#include "dkn/serialize.hpp"
#include "test_util.hpp"

using namespace dkn;

TEST_CASE("config defaults survive a render/parse round trip") {
    RunConfig def;
    RunConfig back = parse_config_text(def.render());
    CHECK(back.render() == def.render());
    CHECK(back.hash() == def.hash());
}

TEST_CASE("config parsing") {
    SUBCASE("partial configs keep defaults elsewhere") {
        RunConfig cfg = parse_config_text("[bank]\nn1 = 4\n[data]\ndim = 8\n");
        CHECK(cfg.bank.n1 == 4);
        CHECK(cfg.data.dim == 8);
        CHECK(cfg.f.epochs == 10000);
        CHECK(cfg.g.epochs == 5000);
    }
    SUBCASE("unknown keys are rejected with the line number") {
        try {
            parse_config_text("[bank]\nn1 = 4\nchunks = 3\n");
            FAIL("expected InvalidInput");
        } catch (const InvalidInput& e) {
            std::string msg = e.what();
            CHECK(msg.find("line 3") != std::string::npos);
            CHECK(msg.find("bank.chunks") != std::string::npos);
        }
    }
    SUBCASE("malformed values name the key") {
        try {
            parse_config_text("[f]\nepochs = soon\n");
            FAIL("expected InvalidInput");
        } catch (const InvalidInput& e) {
            CHECK(std::string(e.what()).find("f.epochs") != std::string::npos);
        }
    }
    SUBCASE("duplicates and stray keys are rejected") {
        CHECK_THROWS_AS(parse_config_text("[bank]\nn1 = 4\nn1 = 8\n"), InvalidInput);
        CHECK_THROWS_AS(parse_config_text("n1 = 4\n"), InvalidInput);
    }
    SUBCASE("semantic validation applies") {
        CHECK_THROWS_AS(parse_config_text("[bank]\nn1 = 3\n"), InvalidInput);  // 3 ∤ 16
    }
    SUBCASE("comments and blank lines are ignored") {
        RunConfig cfg = parse_config_text("# comment\n\n[eval]\nthreads = 2 ; inline\n");
        CHECK(cfg.eval.threads == 2);
    }
}

TEST_CASE("reseeding from a master seed is deterministic and complete") {
    RunConfig a, b;
    a.reseed(1234);
    b.reseed(1234);
    CHECK(a.data.seed == b.data.seed);
    CHECK(a.render() == b.render());
    RunConfig c;
    c.reseed(1235);
    CHECK(c.data.seed != a.data.seed);
    CHECK(c.split.seed != a.split.seed);
    CHECK(c.f.seed != a.f.seed);
    CHECK(c.g.seed != a.g.seed);
}

TEST_CASE("tiny end-to-end pipeline through the command layer") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "dkn_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string out1 = (dir / "run1").string();
    std::string out2 = (dir / "run2").string();

    RunConfig cfg;
    cfg.data.path = (dir / "toy.dknpair").string();
    cfg.data.n = 260;
    cfg.data.dim = 8;
    cfg.data.positive_fraction = 0.2;
    cfg.data.separation = 8.0;
    cfg.bank.n1 = 2;
    cfg.split.labeled_count = 160;
    cfg.f.units = 6;
    cfg.f.layers = 3;
    cfg.f.epochs = 25;
    cfg.f.initial_step = 0.05;
    cfg.g.epochs = 15;
    cfg.g.initial_step = 0.05;
    cfg.eval.threads = 2;

    cmd_gen_data(cfg, out1);
    CHECK(fs::exists(cfg.data.path));
    cmd_train_f(cfg, out1);
    CHECK(fs::exists(fs::path(out1) / "f.dknc"));
    CHECK(fs::exists(fs::path(out1) / "f_training_log.tsv"));
    cmd_build_cascade(cfg, (fs::path(out1) / "f.dknc").string(), out1);
    CHECK(fs::exists(fs::path(out1) / "cascade.dknc"));
    cmd_eval(cfg, (fs::path(out1) / "cascade.dknc").string(), out1);
    std::string report1 =
        testutil::read_file_bytes((fs::path(out1) / "report.tsv").string());
    CHECK(report1.find("cascade") != std::string::npos);
    CHECK(report1.find("\t-\t") != std::string::npos);  // untimed columns stay dashes

    // a second identical run produces byte-identical artifacts and reports
    cmd_train_f(cfg, out2);
    cmd_build_cascade(cfg, (fs::path(out2) / "f.dknc").string(), out2);
    cmd_eval(cfg, (fs::path(out2) / "cascade.dknc").string(), out2);
    CHECK(testutil::read_file_bytes((fs::path(out1) / "f.dknc").string()) ==
          testutil::read_file_bytes((fs::path(out2) / "f.dknc").string()));
    CHECK(testutil::read_file_bytes((fs::path(out1) / "cascade.dknc").string()) ==
          testutil::read_file_bytes((fs::path(out2) / "cascade.dknc").string()));
    CHECK(report1 == testutil::read_file_bytes((fs::path(out2) / "report.tsv").string()));

    // the stage map renders from grid-enabled data
    RunConfig map_cfg = cfg;
    map_cfg.data.path = (dir / "toy_grid.dknpair").string();
    map_cfg.data.n = 260;
    map_cfg.data.grid_rows = 13;
    map_cfg.data.grid_cols = 20;
    cmd_gen_data(map_cfg, out1);
    cmd_map(map_cfg, (fs::path(out1) / "cascade.dknc").string(), out1);
    CHECK(fs::exists(fs::path(out1) / "map.pgm"));
    CHECK(fs::exists(fs::path(out1) / "map_counts.tsv"));

    fs::remove_all(dir);
}

TEST_CASE("distill command trains a single stage against the teacher") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "dkn_distill_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string out = (dir / "run").string();

    RunConfig cfg;
    cfg.data.path = (dir / "toy.dknpair").string();
    cfg.data.n = 200;
    cfg.data.dim = 8;
    cfg.data.positive_fraction = 0.25;
    cfg.data.separation = 8.0;
    cfg.bank.n1 = 2;
    cfg.split.labeled_count = 140;
    cfg.f.units = 4;
    cfg.f.layers = 3;
    cfg.f.epochs = 15;
    cfg.f.initial_step = 0.05;
    cfg.g.epochs = 8;
    cfg.g.initial_step = 0.05;

    cmd_gen_data(cfg, out);
    cmd_train_f(cfg, out);
    cmd_distill(cfg, 1, (fs::path(out) / "f.dknc").string(), out);
    CHECK(fs::exists(fs::path(out) / "stage1.dknc"));
    Cascade stage = load_cascade((fs::path(out) / "stage1.dknc").string());
    CHECK(stage.stages.size() == 1);
    CHECK(stage.stages[0].net.arch.layer_sizes == std::vector<int>{2, 2, 2, 2, 1});

    // stage 6 cannot be distilled; it is the teacher
    CHECK_THROWS_AS(cmd_distill(cfg, 6, (fs::path(out) / "f.dknc").string(), out),
                    InvalidInput);
    fs::remove_all(dir);
}
