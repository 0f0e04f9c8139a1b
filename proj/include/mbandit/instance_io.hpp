#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mbandit/core.hpp"
#include "mbandit/posterior.hpp"

namespace mbandit {

/// Contents of an instance file: the instance plus an optional prior block.
struct InstanceFile {
    BanditInstance instance;
    std::optional<PriorConfig> prior;
};

/// Parses the JSON instance format documented in README.md. Structural errors
/// throw std::invalid_argument naming the offending field; model invariants are
/// checked separately by validate_instance.
InstanceFile parse_instance(const std::string& text);
InstanceFile load_instance(const std::filesystem::path& path);

std::string dump_instance(const BanditInstance& instance,
                          const std::optional<PriorConfig>& prior = std::nullopt);

}  // namespace mbandit
