#include "fedmr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fedmr/error.hpp"

namespace fedmr {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

using Value = std::variant<std::int64_t, double, bool, std::string, std::vector<std::int64_t>>;

std::string value_to_text(const Value& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    if (std::holds_alternative<std::string>(v)) return "\"" + std::get<std::string>(v) + "\"";
    const auto& arr = std::get<std::vector<std::int64_t>>(v);
    std::string s = "[";
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(arr[i]);
    }
    return s + "]";
}

// ---------------------------------------------------------------------------
// Schema: one entry per configurable field, binding parse/apply/emit.

enum class FieldType { integer, floating, boolean, text, int_array };

struct FieldDef {
    const char* section;
    const char* key;
    FieldType type;
    std::function<void(Config&, const Value&)> set;
    std::function<Value(const Config&)> get;
};

std::int64_t as_int(const Value& v) { return std::get<std::int64_t>(v); }
double as_float(const Value& v) {
    if (std::holds_alternative<std::int64_t>(v)) return static_cast<double>(std::get<std::int64_t>(v));
    return std::get<double>(v);
}

std::uint64_t as_seed(const Value& v) {
    std::int64_t x = as_int(v);
    if (x < 0) fail(ErrorCode::validation_error, "seed values must be non-negative");
    return static_cast<std::uint64_t>(x);
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "fedmr") return Algorithm::fedmr;
    if (s == "fedavg") return Algorithm::fedavg;
    if (s == "fedprox") return Algorithm::fedprox;
    if (s == "fedmr_no_mr") return Algorithm::fedmr_no_mr;
    fail(ErrorCode::validation_error, "unknown algorithm '" + s + "' (expected fedmr|fedavg|fedprox|fedmr_no_mr)");
}

const std::vector<FieldDef>& schema() {
    static const std::vector<FieldDef> defs = [] {
        std::vector<FieldDef> f;
        auto add = [&](const char* sec, const char* key, FieldType ty, auto setter, auto getter) {
            f.push_back(FieldDef{sec, key, ty, setter, getter});
        };

        add("experiment", "algorithm", FieldType::text,
            [](Config& c, const Value& v) { c.experiment.algorithm = parse_algorithm(std::get<std::string>(v)); },
            [](const Config& c) { return Value{std::string(algorithm_name(c.experiment.algorithm))}; });
        add("experiment", "num_clients", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.num_clients = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.num_clients)}; });
        add("experiment", "participation_fraction", FieldType::floating,
            [](Config& c, const Value& v) { c.experiment.participation_fraction = as_float(v); },
            [](const Config& c) { return Value{c.experiment.participation_fraction}; });
        add("experiment", "rounds", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.rounds = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.rounds)}; });
        add("experiment", "pretrain_rounds", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.pretrain_rounds = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.pretrain_rounds)}; });
        add("experiment", "eval_every", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.eval_every = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.eval_every)}; });
        add("experiment", "identical_init", FieldType::boolean,
            [](Config& c, const Value& v) { c.experiment.identical_init = std::get<bool>(v); },
            [](const Config& c) { return Value{c.experiment.identical_init}; });
        add("experiment", "threads", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.threads = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.threads)}; });

        add("local", "epochs", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.local.epochs = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.local.epochs)}; });
        add("local", "batch_size", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.local.batch_size = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.local.batch_size)}; });
        add("local", "learning_rate", FieldType::floating,
            [](Config& c, const Value& v) { c.experiment.local.learning_rate = as_float(v); },
            [](const Config& c) { return Value{c.experiment.local.learning_rate}; });
        add("local", "momentum", FieldType::floating,
            [](Config& c, const Value& v) { c.experiment.local.momentum = as_float(v); },
            [](const Config& c) { return Value{c.experiment.local.momentum}; });
        add("local", "prox_mu", FieldType::floating,
            [](Config& c, const Value& v) { c.experiment.local.prox_mu = as_float(v); },
            [](const Config& c) { return Value{c.experiment.local.prox_mu}; });

        add("data", "source", FieldType::text,
            [](Config& c, const Value& v) {
                const std::string& s = std::get<std::string>(v);
                if (s == "synthetic") c.data.source = DataConfig::Source::synthetic;
                else if (s == "idx") c.data.source = DataConfig::Source::idx;
                else fail(ErrorCode::validation_error, "unknown data source '" + s + "' (expected synthetic|idx)");
            },
            [](const Config& c) {
                return Value{std::string(c.data.source == DataConfig::Source::synthetic ? "synthetic" : "idx")};
            });
        add("data", "kind", FieldType::text,
            [](Config& c, const Value& v) {
                const std::string& s = std::get<std::string>(v);
                if (s == "blobs") c.data.kind = SyntheticSpec::Kind::blobs;
                else if (s == "spiral") c.data.kind = SyntheticSpec::Kind::spiral;
                else fail(ErrorCode::validation_error, "unknown synthetic kind '" + s + "' (expected blobs|spiral)");
            },
            [](const Config& c) {
                return Value{std::string(c.data.kind == SyntheticSpec::Kind::blobs ? "blobs" : "spiral")};
            });
        add("data", "samples", FieldType::integer,
            [](Config& c, const Value& v) { c.data.samples = as_int(v); },
            [](const Config& c) { return Value{c.data.samples}; });
        add("data", "classes", FieldType::integer,
            [](Config& c, const Value& v) { c.data.classes = as_int(v); },
            [](const Config& c) { return Value{c.data.classes}; });
        add("data", "features", FieldType::integer,
            [](Config& c, const Value& v) { c.data.features = as_int(v); },
            [](const Config& c) { return Value{c.data.features}; });
        add("data", "noise", FieldType::floating,
            [](Config& c, const Value& v) { c.data.noise = as_float(v); },
            [](const Config& c) { return Value{c.data.noise}; });
        add("data", "test_samples", FieldType::integer,
            [](Config& c, const Value& v) { c.data.test_samples = as_int(v); },
            [](const Config& c) { return Value{c.data.test_samples}; });
        add("data", "images", FieldType::text,
            [](Config& c, const Value& v) { c.data.images = std::get<std::string>(v); },
            [](const Config& c) { return Value{c.data.images}; });
        add("data", "labels", FieldType::text,
            [](Config& c, const Value& v) { c.data.labels = std::get<std::string>(v); },
            [](const Config& c) { return Value{c.data.labels}; });
        add("data", "test_images", FieldType::text,
            [](Config& c, const Value& v) { c.data.test_images = std::get<std::string>(v); },
            [](const Config& c) { return Value{c.data.test_images}; });
        add("data", "test_labels", FieldType::text,
            [](Config& c, const Value& v) { c.data.test_labels = std::get<std::string>(v); },
            [](const Config& c) { return Value{c.data.test_labels}; });

        add("partition", "scheme", FieldType::text,
            [](Config& c, const Value& v) {
                const std::string& s = std::get<std::string>(v);
                if (s == "iid") c.partition.scheme = PartitionSpec::Scheme::iid;
                else if (s == "dirichlet") c.partition.scheme = PartitionSpec::Scheme::dirichlet;
                else fail(ErrorCode::validation_error, "unknown partition scheme '" + s + "' (expected iid|dirichlet)");
            },
            [](const Config& c) {
                return Value{std::string(c.partition.scheme == PartitionSpec::Scheme::iid ? "iid" : "dirichlet")};
            });
        add("partition", "alpha", FieldType::floating,
            [](Config& c, const Value& v) { c.partition.alpha = as_float(v); },
            [](const Config& c) { return Value{c.partition.alpha}; });
        add("partition", "min_samples_per_client", FieldType::integer,
            [](Config& c, const Value& v) { c.partition.min_samples_per_client = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.partition.min_samples_per_client)}; });

        add("model", "kind", FieldType::text,
            [](Config& c, const Value& v) {
                const std::string& s = std::get<std::string>(v);
                if (s == "mlp") c.experiment.model.kind = ModelSpec::Kind::mlp;
                else if (s == "cnn") c.experiment.model.kind = ModelSpec::Kind::cnn;
                else fail(ErrorCode::validation_error, "unknown model kind '" + s + "' (expected mlp|cnn)");
            },
            [](const Config& c) {
                return Value{std::string(c.experiment.model.kind == ModelSpec::Kind::mlp ? "mlp" : "cnn")};
            });
        add("model", "hidden", FieldType::int_array,
            [](Config& c, const Value& v) {
                const auto& arr = std::get<std::vector<std::int64_t>>(v);
                c.experiment.model.hidden.assign(arr.begin(), arr.end());
            },
            [](const Config& c) {
                std::vector<std::int64_t> arr(c.experiment.model.hidden.begin(), c.experiment.model.hidden.end());
                return Value{arr};
            });
        add("model", "conv_channels", FieldType::int_array,
            [](Config& c, const Value& v) {
                const auto& arr = std::get<std::vector<std::int64_t>>(v);
                c.experiment.model.conv_channels.assign(arr.begin(), arr.end());
            },
            [](const Config& c) {
                std::vector<std::int64_t> arr(c.experiment.model.conv_channels.begin(),
                                              c.experiment.model.conv_channels.end());
                return Value{arr};
            });
        add("model", "kernel", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.model.kernel = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.model.kernel)}; });
        add("model", "pool", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.model.pool = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.model.pool)}; });
        add("model", "dense_hidden", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.model.dense_hidden = static_cast<int>(as_int(v)); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.model.dense_hidden)}; });

        add("seeds", "init", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.seeds.init = as_seed(v); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.seeds.init)}; });
        add("seeds", "data", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.seeds.data = as_seed(v); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.seeds.data)}; });
        add("seeds", "sampling", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.seeds.sampling = as_seed(v); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.seeds.sampling)}; });
        add("seeds", "recombine", FieldType::integer,
            [](Config& c, const Value& v) { c.experiment.seeds.recombine = as_seed(v); },
            [](const Config& c) { return Value{static_cast<std::int64_t>(c.experiment.seeds.recombine)}; });
        return f;
    }();
    return defs;
}

const FieldDef* find_field(const std::string& section, const std::string& key) {
    for (const FieldDef& f : schema()) {
        if (section == f.section && key == f.key) return &f;
    }
    return nullptr;
}

const char* field_type_name(FieldType t) {
    switch (t) {
        case FieldType::integer: return "integer";
        case FieldType::floating: return "number";
        case FieldType::boolean: return "boolean";
        case FieldType::text: return "string";
        case FieldType::int_array: return "integer array";
    }
    return "?";
}

bool value_matches(FieldType t, const Value& v) {
    switch (t) {
        case FieldType::integer: return std::holds_alternative<std::int64_t>(v);
        case FieldType::floating: return std::holds_alternative<double>(v) || std::holds_alternative<std::int64_t>(v);
        case FieldType::boolean: return std::holds_alternative<bool>(v);
        case FieldType::text: return std::holds_alternative<std::string>(v);
        case FieldType::int_array: return std::holds_alternative<std::vector<std::int64_t>>(v);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Parsing

struct Cursor {
    const std::string& name;
    int line;
    int col;
};

[[noreturn]] void parse_fail(const Cursor& at, const std::string& message) {
    fail(ErrorCode::parse_error,
         at.name + ":" + std::to_string(at.line) + ":" + std::to_string(at.col) + ": " + message);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool is_bare_word(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.' && c != '/') return false;
    }
    return !std::isdigit(static_cast<unsigned char>(s[0]));
}

Value parse_scalar(const std::string& raw, const Cursor& at) {
    std::string s = trim(raw);
    if (s.empty()) parse_fail(at, "missing value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') parse_fail(at, "unterminated string");
        return Value{s.substr(1, s.size() - 2)};
    }
    if (s == "true") return Value{true};
    if (s == "false") return Value{false};
    if (s.front() == '[') {
        if (s.back() != ']') parse_fail(at, "unterminated array");
        std::vector<std::int64_t> arr;
        std::string body = s.substr(1, s.size() - 2);
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) parse_fail(at, "empty array element");
            std::int64_t x = 0;
            auto res = std::from_chars(item.data(), item.data() + item.size(), x);
            if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
                parse_fail(at, "array elements must be integers, got '" + item + "'");
            }
            arr.push_back(x);
        }
        return Value{arr};
    }
    // number?
    {
        std::int64_t x = 0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), x);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return Value{x};
    }
    {
        double x = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), x);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return Value{x};
    }
    if (is_bare_word(s)) return Value{s}; // unquoted enum values are common in hand-written configs
    parse_fail(at, "cannot parse value '" + s + "'");
}

void apply_field(Config& cfg, const std::string& section, const std::string& key, const Value& v, const Cursor& at) {
    const FieldDef* f = find_field(section, key);
    if (f == nullptr) parse_fail(at, "unknown setting '" + section + "." + key + "'");
    if (!value_matches(f->type, v)) {
        parse_fail(at, "'" + section + "." + key + "' expects " + field_type_name(f->type));
    }
    try {
        f->set(cfg, v);
    } catch (const Error& e) {
        parse_fail(at, e.what());
    }
}

} // namespace

Config Config::from_text(const std::string& text, const std::string& source_name) {
    Config cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        // strip comments (quote-aware)
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                line = line.substr(0, i);
                break;
            }
        }
        std::string body = trim(line);
        if (body.empty()) continue;
        Cursor at{source_name, line_no, static_cast<int>(line.find_first_not_of(" \t")) + 1};
        if (body.front() == '[') {
            if (body.back() != ']') parse_fail(at, "unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty()) parse_fail(at, "empty section name");
            continue;
        }
        std::size_t eq = body.find('=');
        if (eq == std::string::npos) parse_fail(at, "expected 'key = value'");
        std::string key = trim(body.substr(0, eq));
        if (key.empty()) parse_fail(at, "missing key before '='");
        if (section.empty()) parse_fail(at, "setting '" + key + "' appears before any [section]");
        Cursor val_at{source_name, line_no, static_cast<int>(eq) + 2};
        Value v = parse_scalar(body.substr(eq + 1), val_at);
        apply_field(cfg, section, key, v, val_at);
    }
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorCode::io_error, path + ": cannot open config file");
    std::stringstream ss;
    ss << is.rdbuf();
    return from_text(ss.str(), path);
}

void Config::apply_override(const std::string& key, const std::string& value_text) {
    std::string section, name;
    std::size_t dot = key.find('.');
    if (dot != std::string::npos) {
        section = key.substr(0, dot);
        name = key.substr(dot + 1);
    } else {
        // bare key: accept when it names exactly one schema field
        const FieldDef* match = nullptr;
        for (const FieldDef& f : schema()) {
            if (key == f.key) {
                if (match != nullptr) {
                    fail(ErrorCode::validation_error, "override '" + key + "' is ambiguous (use section.key, e.g. " +
                                                          std::string(match->section) + "." + key + " or " +
                                                          std::string(f.section) + "." + key + ")");
                }
                match = &f;
            }
        }
        if (match == nullptr) fail(ErrorCode::validation_error, "unknown override '" + key + "'");
        section = match->section;
        name = match->key;
    }
    Cursor at{"--set " + key, 1, 1};
    Value v = parse_scalar(value_text, at);
    apply_field(*this, section, name, v, at);
}

void Config::validate() const {
    std::vector<std::string> problems;
    auto check = [&](bool ok, const std::string& field, const std::string& msg) {
        if (!ok) problems.push_back(field + ": " + msg);
    };

    const ExperimentConfig& e = experiment;
    check(e.num_clients >= 1, "experiment.num_clients", "must be >= 1");
    check(e.participation_fraction > 0.0 && e.participation_fraction <= 1.0, "experiment.participation_fraction",
          "must lie in (0, 1]");
    check(e.rounds >= 0, "experiment.rounds", "must be >= 0");
    check(e.pretrain_rounds >= 0, "experiment.pretrain_rounds", "must be >= 0");
    if (e.pretrain_rounds >= 0 && e.rounds >= 0) {
        check(e.pretrain_rounds <= e.rounds, "experiment.pretrain_rounds", "must not exceed experiment.rounds");
    }
    check(e.eval_every >= 1, "experiment.eval_every", "must be >= 1");
    check(e.threads >= 1, "experiment.threads", "must be >= 1");
    check(e.local.epochs >= 1, "local.epochs", "must be >= 1");
    check(e.local.batch_size >= 1, "local.batch_size", "must be >= 1");
    check(e.local.learning_rate >= 0.0, "local.learning_rate", "must be >= 0");
    check(e.local.momentum >= 0.0 && e.local.momentum < 1.0, "local.momentum", "must lie in [0, 1)");
    check(e.local.prox_mu >= 0.0, "local.prox_mu", "must be >= 0");

    if (data.source == DataConfig::Source::synthetic) {
        check(data.classes >= 2, "data.classes", "must be >= 2");
        check(data.samples >= data.classes, "data.samples", "must cover every class at least once");
        check(data.features >= 1, "data.features", "must be >= 1");
        if (data.kind == SyntheticSpec::Kind::spiral) {
            check(data.features == 2, "data.features", "spiral data is 2-D; set features = 2");
        }
        check(data.noise >= 0.0, "data.noise", "must be >= 0");
        check(data.test_samples >= 1, "data.test_samples", "must be >= 1");
        std::int64_t needed =
            static_cast<std::int64_t>(e.num_clients) * static_cast<std::int64_t>(partition.min_samples_per_client);
        if (data.samples >= data.classes) {
            check(data.samples >= needed, "data.samples",
                  "too few samples for " + std::to_string(e.num_clients) + " clients with min " +
                      std::to_string(partition.min_samples_per_client) + " each");
        }
    } else {
        check(!data.images.empty(), "data.images", "IDX image path is required when data.source = idx");
        check(!data.labels.empty(), "data.labels", "IDX label path is required when data.source = idx");
        check(!data.test_images.empty(), "data.test_images", "IDX image path is required when data.source = idx");
        check(!data.test_labels.empty(), "data.test_labels", "IDX label path is required when data.source = idx");
    }

    if (partition.scheme == PartitionSpec::Scheme::dirichlet) {
        check(partition.alpha > 0.0, "partition.alpha", "must be > 0 for dirichlet partitioning");
    }
    check(partition.min_samples_per_client >= 1, "partition.min_samples_per_client", "must be >= 1");

    const ModelSpec& m = e.model;
    if (m.kind == ModelSpec::Kind::mlp) {
        for (int h : m.hidden) check(h >= 1, "model.hidden", "widths must be positive");
    } else {
        check(!m.conv_channels.empty(), "model.conv_channels", "needs at least one stage");
        for (int c : m.conv_channels) check(c >= 1, "model.conv_channels", "channel counts must be positive");
        check(m.kernel >= 1, "model.kernel", "must be >= 1");
        check(m.pool >= 1, "model.pool", "must be >= 1");
        check(m.dense_hidden >= 1, "model.dense_hidden", "must be >= 1");
        check(data.source == DataConfig::Source::idx, "model.kind",
              "cnn requires image-shaped data (data.source = idx)");
    }

    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const std::string& p : problems) msg += "\n  " + p;
        fail(ErrorCode::validation_error, msg);
    }
}

std::string Config::section_text(const std::string& section) const {
    std::ostringstream os;
    os << "[" << section << "]\n";
    bool any = false;
    for (const FieldDef& f : schema()) {
        if (section != f.section) continue;
        any = true;
        os << f.key << " = " << value_to_text(f.get(*this)) << "\n";
    }
    if (!any) fail(ErrorCode::invalid_argument, "unknown config section '" + section + "'");
    return os.str();
}

std::string Config::resolved_text() const {
    static const char* kSections[] = {"experiment", "local", "data", "partition", "model", "seeds"};
    std::string out;
    for (std::size_t i = 0; i < std::size(kSections); ++i) {
        if (i) out += "\n";
        out += section_text(kSections[i]);
    }
    return out;
}

std::string Config::get(const std::string& key) const {
    std::size_t dot = key.find('.');
    if (dot == std::string::npos) fail(ErrorCode::invalid_argument, "config key must be section.key, got '" + key + "'");
    const FieldDef* f = find_field(key.substr(0, dot), key.substr(dot + 1));
    if (f == nullptr) fail(ErrorCode::invalid_argument, "unknown config key '" + key + "'");
    return value_to_text(f->get(*this));
}

std::string Config::hash() const {
    std::uint64_t h = fnv1a64(resolved_text());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace fedmr
