#pragma once

// Seeded property batteries behind `ifista verify lemmas` and `ifista verify prox-certs`.

#include <cstdint>
#include <string>
#include <vector>

namespace ifista::app {

struct SuiteCheck {
    std::string name;
    std::size_t instances = 0;
    std::size_t failures = 0;
    double worst = 0.0;      // largest observed excess over the bound
    double tolerance = 0.0;
    bool pass() const { return failures == 0; }
};

/// Bihari-LaSalle, square-root recurrence (10/9 and constant-2 forms, max-sqrt
/// form), the Bihari cross-check of the recurrence, and the weighted-average
/// round trip.
std::vector<SuiteCheck> run_lemma_suite(std::uint64_t seed, std::size_t instances = 1000);

/// Perturbation- and dual-mode prox certificates checked against exact proxes.
std::vector<SuiteCheck> run_prox_cert_suite(std::uint64_t seed, std::size_t calls_per_mode = 500);

}  // namespace ifista::app
