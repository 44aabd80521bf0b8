#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "rnm/dataset.hpp"

using namespace rnm;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("rnm_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("load a 3-node citation toy file") {
    TempDir dir;
    write_file(dir.file("nodes.tsv"),
               "n1\tAG\t0 2\n"
               "n2\tAI\t1\n"
               "n3\tAG\t\n");
    write_file(dir.file("edges.tsv"), "n1\tn2\nn2\tn3\n");
    auto ds = data::load_citation(dir.file("nodes.tsv"), dir.file("edges.tsv"), {"AG", "AI"});
    CHECK(ds.size() == 3);
    CHECK(ds.feature_dim == 3);
    CHECK(ds.n_classes == 2);
    CHECK(ds.evidence.size() == 2);
    CHECK(ds.evidence[0].predicate == "Cite");
    CHECK(ds.evidence[0].constants == std::vector<std::string>{"n1", "n2"});
    CHECK(ds.label_of(0) == 0);
    CHECK(ds.label_of(1) == 1);
    CHECK(ds.feature(0, 0) == 1.0);
    CHECK(ds.feature(0, 1) == 0.0);
}

TEST_CASE("citation loader reports malformed input with line numbers") {
    TempDir dir;
    SUBCASE("bad node line") {
        write_file(dir.file("nodes.tsv"), "n1\tAG\t0\njustonefield\n");
        write_file(dir.file("edges.tsv"), "");
        try {
            data::load_citation(dir.file("nodes.tsv"), dir.file("edges.tsv"), {"AG"});
            FAIL("expected error");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find(":2") != std::string::npos);
        }
    }
    SUBCASE("edge referencing a missing node") {
        write_file(dir.file("nodes.tsv"), "n1\tAG\t0\n");
        write_file(dir.file("edges.tsv"), "n1\tmissing\n");
        CHECK_THROWS_WITH_AS(
            data::load_citation(dir.file("nodes.tsv"), dir.file("edges.tsv"), {"AG"}),
            doctest::Contains("missing"), std::runtime_error);
    }
    SUBCASE("unknown label with fixed class set") {
        write_file(dir.file("nodes.tsv"), "n1\tZZ\t0\n");
        write_file(dir.file("edges.tsv"), "");
        CHECK_THROWS(data::load_citation(dir.file("nodes.tsv"), dir.file("edges.tsv"), {"AG"}));
    }
}

TEST_CASE("split_dataset is deterministic and drops crossing evidence in separate worlds") {
    TempDir dir;
    std::string nodes;
    std::string edges;
    for (int i = 0; i < 40; ++i)
        nodes += "n" + std::to_string(i) + "\t" + (i % 2 ? "AG" : "AI") + "\t0\n";
    for (int i = 0; i + 1 < 40; ++i)
        edges += "n" + std::to_string(i) + "\tn" + std::to_string(i + 1) + "\n";
    write_file(dir.file("nodes.tsv"), nodes);
    write_file(dir.file("edges.tsv"), edges);
    auto ds = data::load_citation(dir.file("nodes.tsv"), dir.file("edges.tsv"), {"AG", "AI"});

    auto a = data::split_dataset(ds, 0.5, 0.1, data::SplitMode::SeparateWorlds, 9);
    auto b = data::split_dataset(ds, 0.5, 0.1, data::SplitMode::SeparateWorlds, 9);
    CHECK(a.split == b.split);

    auto t = data::split_dataset(ds, 0.5, 0.1, data::SplitMode::Transductive, 9);
    CHECK(t.evidence.size() == ds.evidence.size());  // transductive keeps everything
    CHECK(a.evidence.size() < ds.evidence.size());

    for (const auto& atom : a.evidence) {
        bool any_test = false, any_train = false;
        for (const auto& c : atom.constants) {
            auto idx = a.pattern_index(c);
            REQUIRE(idx);
            (a.split[*idx] == data::Split::Test ? any_test : any_train) = true;
        }
        CHECK_FALSE((any_test && any_train));
    }

    // supervision masks follow the split
    for (size_t p = 0; p < t.size(); ++p) {
        bool observed = t.y_observed[p][0] != 0;
        CHECK(observed == (t.split[p] == data::Split::Train));
    }
}

TEST_CASE("following pairs generator") {
    SUBCASE("p = 1.0 makes every link consecutive") {
        auto ds = data::generate_following_pairs(50, {1.0, 5});
        CHECK(ds.size() == 50);
        CHECK(ds.feature_dim == 32);
        CHECK(ds.evidence.size() == 50);
        for (const auto& link : ds.evidence) {
            int a = *ds.pattern_index(link.constants[0]);
            int b = *ds.pattern_index(link.constants[1]);
            CHECK(ds.label_of(b) == ds.label_of(a) + 1);
        }
    }
    SUBCASE("p = 0.1 puts the predictive fraction near 0.1") {
        auto ds = data::generate_following_pairs(60, {0.1, 6});
        int good = 0;
        for (const auto& link : ds.evidence) {
            int a = *ds.pattern_index(link.constants[0]);
            int b = *ds.pattern_index(link.constants[1]);
            good += ds.label_of(b) == ds.label_of(a) + 1 ? 1 : 0;
        }
        double fraction = static_cast<double>(good) / ds.evidence.size();
        CHECK(fraction == doctest::Approx(0.1).epsilon(0.26));  // 2/sqrt(60) band
    }
    SUBCASE("same seed, same dataset") {
        auto a = data::generate_following_pairs(20, {0.5, 7});
        auto b = data::generate_following_pairs(20, {0.5, 7});
        CHECK(a.features == b.features);
        CHECK(a.evidence.size() == b.evidence.size());
        for (size_t i = 0; i < a.evidence.size(); ++i)
            CHECK(a.evidence[i].constants == b.evidence[i].constants);
    }
    SUBCASE("impossible predictive fraction is an error") {
        // 2 images yield at most one consecutive ordered pair but 2 links are
        // requested at p = 1.0
        CHECK_THROWS_WITH_AS(data::generate_following_pairs(2, {1.0, 11}),
                             doctest::Contains("class variety"), std::runtime_error);
    }
}

TEST_CASE("idx archives round-trip") {
    TempDir dir;
    std::vector<std::vector<double>> images = {{0.0, 0.5, 1.0, 0.25}, {1.0, 0.0, 0.0, 1.0}};
    std::vector<int> labels = {3, 7};
    data::write_idx_images(dir.file("img.idx"), images, 2, 2);
    data::write_idx_labels(dir.file("lab.idx"), labels);
    auto rimages = data::load_idx_images(dir.file("img.idx"));
    auto rlabels = data::load_idx_labels(dir.file("lab.idx"));
    REQUIRE(rimages.size() == 2);
    CHECK(rlabels == labels);
    for (size_t i = 0; i < 2; ++i)
        for (size_t j = 0; j < 4; ++j)
            CHECK(rimages[i][j] == doctest::Approx(images[i][j]).epsilon(1.0 / 255));
    CHECK_THROWS(data::load_idx_images(dir.file("lab.idx")));  // wrong magic
}

TEST_CASE("dense format round-trips") {
    TempDir dir;
    auto ds = data::generate_following_pairs(20, {1.0, 3});
    data::write_dense(ds, dir.file("patterns.tsv"), dir.file("links.tsv"));
    auto loaded = data::load_dense(dir.file("patterns.tsv"), dir.file("links.tsv"),
                                   ds.class_names);
    CHECK(loaded.size() == ds.size());
    CHECK(loaded.feature_dim == ds.feature_dim);
    CHECK(loaded.evidence.size() == ds.evidence.size());
    for (size_t p = 0; p < ds.size(); ++p) {
        CHECK(loaded.label_of(p) == ds.label_of(p));
        for (size_t j = 0; j < ds.feature_dim; ++j)
            CHECK(loaded.feature(p, j) == ds.feature(p, j));
    }
}
