#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rnm::data {

enum class Split { Train, Valid, Test };

struct EvidenceAtom {
    std::string predicate;
    std::vector<std::string> constants;
    bool value = true;
};

// A set of input patterns with (possibly partial) supervision, evidence ground
// atoms, and a per-pattern split assignment. Patterns populate one KB domain.
struct Dataset {
    std::string pattern_domain;
    std::vector<std::string> pattern_ids;  // constant names; order = pattern index

    size_t feature_dim = 0;
    bool binary_features = false;
    std::vector<std::vector<double>> features;      // dense rows (empty if binary)
    std::vector<std::vector<int>> active_features;  // sparse 0/1 rows (binary only)

    bool one_label = true;
    int n_classes = 0;
    std::vector<std::string> class_names;        // aligned with network heads
    std::vector<std::vector<int8_t>> y;          // pattern x class, ground truth
    std::vector<std::vector<int8_t>> y_observed; // usable as supervision
    std::vector<Split> split;

    std::vector<EvidenceAtom> evidence;

    size_t size() const { return pattern_ids.size(); }
    std::optional<int> pattern_index(const std::string& id) const;
    int label_of(int pattern) const;  // one-label: positive class, -1 if none
    double feature(int pattern, int j) const;

    // Throws on any violated invariant (dimension mismatches, one-label rows
    // with != 1 positive, masks inconsistent with shapes).
    void check() const;
};

Dataset load_citation(const std::string& nodes_path, const std::string& edges_path,
                      const std::vector<std::string>& class_names = {},
                      const std::string& evidence_predicate = "Cite",
                      const std::string& pattern_domain = "papers");

// Dense text format written by gen-data: "id<TAB>label<TAB>v1 v2 ... vD".
Dataset load_dense(const std::string& patterns_path, const std::string& links_path,
                   const std::vector<std::string>& class_names = {},
                   const std::string& evidence_predicate = "link",
                   const std::string& pattern_domain = "images");
void write_dense(const Dataset& dataset, const std::string& patterns_path,
                 const std::string& links_path);

enum class SplitMode { SeparateWorlds, Transductive };

// Reassigns splits at the given absolute fractions (test gets the remainder).
// SeparateWorlds drops every evidence atom whose patterns cross the
// {train,valid} / {test} boundary; Transductive keeps all evidence and only
// masks the supervision of valid/test patterns.
Dataset split_dataset(const Dataset& dataset, double train_fraction, double valid_fraction,
                      SplitMode mode, uint64_t seed);

// Restriction to the patterns selected by `keep` (re-indexed); evidence atoms
// referencing dropped patterns are removed.
Dataset subset_dataset(const Dataset& dataset, const std::vector<bool>& keep);

struct NoiseSpec {
    double predictive_fraction = 1.0;  // fraction of links with digit(dst) = digit(src)+1
    uint64_t seed = 0;
};

enum class PairSource { Synthetic, RawImageFiles };

struct FollowingPairsOptions {
    int links_per_image = 1;
    int feature_dim = 32;        // synthetic source
    double class_mean_scale = 3.0;
    double noise_sigma = 1.0;
    std::string images_path;     // raw source: idx image archive
    std::string labels_path;     // raw source: idx label archive
};

// Digit classification patterns plus a noisy directed `link` relation where a
// fraction p of links connect consecutive digits. All labels observed, split
// Train; callers re-tag for their protocol.
Dataset generate_following_pairs(int n_images, const NoiseSpec& noise,
                                 PairSource source = PairSource::Synthetic,
                                 const FollowingPairsOptions& options = {});

// idx archives (big-endian, magic 0x00000803 for images, 0x00000801 for labels).
std::vector<std::vector<double>> load_idx_images(const std::string& path);
std::vector<int> load_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const std::vector<std::vector<double>>& images,
                      int rows, int cols);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

}  // namespace rnm::data
