#pragma once

#include <array>
#include <cstdint>

#include "cg/dataset.hpp"

namespace cg {

// Indices 0-5 name the original positives, 6-11 the original negatives. The
// first six entries of the result form the new positive set.
std::array<int, 12> category_permutation(std::uint64_t seed);

// Pools the 12 support images and repartitions them 6/6 uniformly at random.
// The query, its file and the gold label are untouched. `seed` is the per-problem seed.
BongardProblem shuffle_categories(const BongardProblem& p, std::uint64_t seed);

// Permutes the action order inside each shape of the query; supports and gold
// label are untouched.
BongardProblem shuffle_query_sequence(const BongardProblem& p, std::uint64_t seed);

// Seed used for a problem in a perturbed run: derive_seed(run_seed, problem id).
std::uint64_t perturbation_seed(std::uint64_t run_seed, std::string_view problem_id);

}  // namespace cg
