#pragma once

// Synthetic corpus generator: four families of small netlists, one per
// violation class, engineered to be structurally separable (distinct cell
// mixes and naming conventions per family). Each design comes with a
// lint-clean repaired twin so reference indexes can be built from any split.

#include <string>
#include <vector>

#include "dftforge/lint.hpp"

namespace gen_designs {

struct GenDesign {
    std::string id;
    dftforge::DftErrorKind kind;
    std::string buggy_json;
    std::string fixed_json;
};

std::vector<GenDesign> generate_corpus(std::size_t per_family, std::uint64_t seed);

} // namespace gen_designs
