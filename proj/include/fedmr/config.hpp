#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fedmr/experiment.hpp"

namespace fedmr {

// Dataset side of a run configuration.
struct DataConfig {
    enum class Source { synthetic, idx };
    Source source = Source::synthetic;
    SyntheticSpec::Kind kind = SyntheticSpec::Kind::blobs;
    std::int64_t samples = 2000;
    std::int64_t classes = 4;
    std::int64_t features = 16;
    double noise = 0.2;
    std::int64_t test_samples = 500;
    std::string images;      // IDX training images
    std::string labels;      // IDX training labels
    std::string test_images; // IDX test images
    std::string test_labels; // IDX test labels
};

// Full experiment configuration, loadable from sectioned key = value text
// (a TOML subset: sections, scalars, integer arrays, # comments). Every
// field has a default, so an empty config runs the reference protocol.
struct Config {
    ExperimentConfig experiment;
    DataConfig data;
    PartitionSpec partition;

    static Config defaults() { return Config{}; }
    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text, const std::string& source_name);

    // key is "section.key"; a bare key is accepted when unambiguous.
    void apply_override(const std::string& key, const std::string& value_text);

    // Throws a validation_error naming every offending field.
    void validate() const;

    // Canonical text with all defaults applied. Parsing it back yields an
    // identical configuration; runs are content-addressed by its hash.
    std::string resolved_text() const;
    std::string section_text(const std::string& section) const;
    std::string get(const std::string& key) const;
    std::string hash() const; // fnv1a-64 over resolved_text, 16 hex chars
};

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
std::uint64_t fnv1a64(const std::string& text);

} // namespace fedmr
