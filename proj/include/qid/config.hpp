#pragma once

// Flat key=value run configuration with dotted section keys. Unspecified
// fields take the reference defaults (Omega12=1.0, Omega23=0.8, eps=eta=1/3,
// Gamma=4, gamma=1, two-phase horizon 50/200).

#include <optional>
#include <string>

#include "qid/analysis.hpp"
#include "qid/observers.hpp"
#include "qid/plant.hpp"
#include "qid/sim.hpp"

namespace qid::cli {

struct RunConfig {
    plant::PlantParams params;
    observers::Gains12 gains12;
    observers::Gains23 gains23;
    sim::SimConfig sim;
    sim::InitConditions init;
    analysis::LabFrameParams labframe;

    bool noise_enabled = false;
    plant::NoiseSpec noise;

    bool emit_plots = false;
    std::string out_dir = ".";

    std::optional<plant::NoiseSpec> noise_opt() const {
        if (noise_enabled) return noise;
        return std::nullopt;
    }

    void validate() const;
};

// Parses the key=value document; unknown keys raise ParseError, invariant
// violations raise ValidationError.
RunConfig parse_config(const std::string& text);

std::string serialize_config(const RunConfig& cfg);

RunConfig load_config_file(const std::string& path);

}  // namespace qid::cli
