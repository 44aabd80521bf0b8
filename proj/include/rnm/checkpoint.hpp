#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rnm/net.hpp"

namespace rnm::checkpoint {

// Portable text checkpoint (version header, hexfloat payload) holding the
// network, its optimizer state, and the per-rule weights. Round-trips are
// bit-exact.
struct Checkpoint {
    net::Mlp mlp;
    net::AdamState adam;
    std::vector<double> lambda;
    std::vector<std::string> head_names;
    bool one_label = true;
    std::string mode = "baseline";
    std::string tnorm = "product";
};

void save(const Checkpoint& ckpt, std::ostream& out);
void save_file(const Checkpoint& ckpt, const std::string& path);
Checkpoint load(std::istream& in);
Checkpoint load_file(const std::string& path);

}  // namespace rnm::checkpoint
