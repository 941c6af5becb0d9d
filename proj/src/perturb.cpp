#include "cg/perturb.hpp"

#include <numeric>

#include "cg/rng.hpp"

namespace cg {

std::array<int, 12> category_permutation(std::uint64_t seed) {
  std::array<int, 12> idx{};
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<int>(idx));
  return idx;
}

BongardProblem shuffle_categories(const BongardProblem& p, std::uint64_t seed) {
  p.validate();
  const auto perm = category_permutation(seed);
  const bool has_files = p.positive_files.size() == kSupportPerClass && p.negative_files.size() == kSupportPerClass;
  auto image_at = [&](int i) -> const BongardImage& { return i < 6 ? p.positives[i] : p.negatives[i - 6]; };
  auto file_at = [&](int i) -> const std::filesystem::path& {
    return i < 6 ? p.positive_files[i] : p.negative_files[i - 6];
  };

  BongardProblem out = p;
  for (std::size_t k = 0; k < kSupportPerClass; ++k) {
    out.positives[k] = image_at(perm[k]);
    out.negatives[k] = image_at(perm[k + 6]);
    if (has_files) {
      out.positive_files[k] = file_at(perm[k]);
      out.negative_files[k] = file_at(perm[k + 6]);
    }
  }
  return out;
}

BongardProblem shuffle_query_sequence(const BongardProblem& p, std::uint64_t seed) {
  BongardProblem out = p;
  Rng rng(seed);
  for (auto& shape : out.query.shapes) rng.shuffle(std::span<BasicAction>(shape.actions));
  return out;
}

std::uint64_t perturbation_seed(std::uint64_t run_seed, std::string_view problem_id) {
  return derive_seed(run_seed, problem_id);
}

}  // namespace cg
