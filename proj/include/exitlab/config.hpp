#pragma once

#include "exitlab/geometry.hpp"
#include "exitlab/montecarlo.hpp"
#include "exitlab/small_deviation.hpp"
#include "exitlab/spectral.hpp"
#include "exitlab/tailfit.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace exitlab::config {

struct DomainConfig {
    geometry::DomainKind kind = geometry::DomainKind::Cross;
    double half_width = 1.0;
    /// Cavities for strip_with_cavity, pieces for union_of_rects.
    std::vector<geometry::Rect> rects;
    double half_diagonal = 2.0;
    geometry::Point start{0.0, 0.0};
};

struct SpectralConfig {
    /// Coarse to fine; two or more spacings enable extrapolation.
    std::vector<double> h{1.0 / 16.0, 1.0 / 32.0};
    double arm_length = 12.0;
    double length_step = 4.0;
    double tol = 1e-8;
    int k_max = 6;
    double stability = 1e-3;
    double margin = 1e-3;
    bool write_v0 = false;
};

struct McConfig {
    std::vector<double> horizons{0.5, 1.0, 2.0, 4.0};
    std::uint64_t n = 1000000;
    std::uint64_t seed = 1;
    montecarlo::StepPolicy policy;
};

struct FitConfig {
    tailfit::TheoremOptions theorem;
};

struct SmallDeviationConfig {
    double r = 0.4;
    SurvivalSource source = SurvivalSource::MonteCarlo;
};

struct OutputConfig {
    std::string dir = ".";
};

/// key = value entries grouped in [domain], [spectral], [mc], [fit],
/// [small_deviation] and [output] sections.
struct RunConfig {
    DomainConfig domain;
    SpectralConfig spectral;
    McConfig mc;
    FitConfig fit;
    SmallDeviationConfig small_deviation;
    OutputConfig output;

    geometry::Domain build_domain() const;
    spectral::SpectrumOptions spectrum_options() const;
    /// Every setting as sorted `section.key=value` lines (output excluded).
    std::string canonical() const;
    /// FNV-1a 64 of canonical(), as 16 hex digits.
    std::string hash() const;
};

using Overrides = std::vector<std::pair<std::string, std::string>>;

/// Parses and validates; `overrides` (section.key, value) take precedence
/// over the file. Throws ConfigError naming the offending key.
RunConfig parse(std::istream& in, const Overrides& overrides = {});
RunConfig load(const std::string& path, const Overrides& overrides = {});
/// Defaults plus overrides.
RunConfig from_overrides(const Overrides& overrides);

/// Every accepted `section.key`.
std::vector<std::string> known_keys();

std::uint64_t fnv1a64(const std::string& text);

}  // namespace exitlab::config
