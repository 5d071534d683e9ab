#pragma once

// Helpers shared by the unit tests and the acceptance runner: fixture access,
// random matrix builders and brute-force reference implementations that do
// not reuse any library ranking code.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "eventrec/artist_space.hpp"
#include "eventrec/event_graph.hpp"
#include "eventrec/fusion.hpp"
#include "eventrec/ingest.hpp"
#include "eventrec/linalg.hpp"

namespace testing_support {

std::filesystem::path fixture(const std::string& relative);
eventrec::MusicEventGraph two_path_graph();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

eventrec::SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, std::mt19937_64& rng);
// Product of two dense Gaussian factors: rank exactly `rank` with probability 1.
eventrec::SparseMatrix exact_rank(std::size_t rows, std::size_t cols, std::size_t rank, std::mt19937_64& rng);

// Correctly ordered (relevant, non-relevant) pairs over all such pairs.
double pair_count_auc(std::span<const bool> relevant_in_rank_order);

struct OracleItem {
  std::string id;
  double score;
};

// Reference late fusion written from the definitions: full sorts, no shared
// helpers with the library.
std::vector<OracleItem> oracle_average_cosine(std::span<const eventrec::LatentVector> prefs,
                                              std::span<const eventrec::Candidate> candidates);
std::vector<OracleItem> oracle_average_rank(std::span<const eventrec::LatentVector> prefs,
                                            std::span<const eventrec::Candidate> candidates);
std::vector<std::string> oracle_interleave(std::span<const eventrec::LatentVector> prefs,
                                           std::span<const eventrec::Candidate> candidates);

// A small generated world for tests that need a realistic corpus quickly.
eventrec::GeneratorConfig small_world_config(std::uint64_t seed = 7);

}  // namespace testing_support
