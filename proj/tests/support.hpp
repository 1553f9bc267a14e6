#pragma once

#include "lsmvos/aic.hpp"
#include "lsmvos_check/oracles.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace lsmvos::test {

inline AicPass random_pass(AicAxis axis, std::size_t cin, std::size_t cout, std::mt19937_64& rng) {
    AicPass p;
    p.axis = axis;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t k = kAicKernelSizes[i];
        p.kernels[i] = axis == AicAxis::Width ? check::random_tensor({cout, cin, 1, k}, rng, 0.3f)
                                              : check::random_tensor({cout, cin, k, 1}, rng, 0.3f);
    }
    p.bias = check::random_tensor({cout}, rng, 0.1f);
    p.select_weight = check::random_tensor({3, cin, 1, 1}, rng, 0.5f);
    p.select_bias = check::random_tensor({3}, rng, 0.5f);
    return p;
}

inline Aic2dParams random_aic(std::size_t cin, std::size_t cout, std::mt19937_64& rng) {
    return Aic2dParams(random_pass(AicAxis::Width, cin, cout, rng), random_pass(AicAxis::Height, cout, cout, rng));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("lsmvos_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace lsmvos::test
