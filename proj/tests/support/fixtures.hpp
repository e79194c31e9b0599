#pragma once
// Small trained models shared by unit tests; built once per process.

#include <string>
#include <vector>

#include "himol/inversion.hpp"
#include "himol/seq/backbone.hpp"

namespace himol::testing {

// E=32 backbone pretrained briefly on a mixed toy corpus.
const seq::Backbone& small_backbone();

// Acyclic toy molecules used as an inversion dataset.
std::vector<std::string> small_dataset(std::size_t n);

// Inversion state on small_dataset(8) with K=3.
const inversion::HierarchicalEmbeddings& small_state();

}  // namespace himol::testing
