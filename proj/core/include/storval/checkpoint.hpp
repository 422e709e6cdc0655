#pragma once

#include <filesystem>
#include <string>

#include "storval/discretization.hpp"
#include "storval/sddp.hpp"

namespace storval {

/// JSON array of {stage, node, cuts: [{intercept, grad_wealth, grad_energy, iteration}]},
/// one entry per (stage, node) pool. Cut values are costs above -1/rho, as
/// held by CutPool. Doubles are written with round-trip precision.
std::string cuts_to_json(const CutPool& pool, int indent = -1);

/// Inverse of cuts_to_json. The pool is sized from `chain`; entries outside
/// it raise DataError, as does malformed JSON.
CutPool cuts_from_json(const std::string& text, const MarkovChain& chain);

void save_checkpoint(const std::filesystem::path& path, const CutPool& pool);
CutPool load_checkpoint(const std::filesystem::path& path, const MarkovChain& chain);

}  // namespace storval
