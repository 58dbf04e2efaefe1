#include "dkn/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dkn/rng.hpp"

namespace dkn {

DistillConfig RunConfig::f_distill_config() const {
    DistillConfig cfg;
    cfg.gamma = f.gamma;
    cfg.max_epochs = f.epochs;
    cfg.num_batches = f.num_batches;
    cfg.initial_step = f.initial_step;
    cfg.step_decay = f.step_decay;
    cfg.svm_c = f.svm_c;
    cfg.svm_tol = f.svm_tol;
    cfg.svm_max_passes = f.svm_max_passes;
    cfg.seed = f.seed;
    return cfg;
}

DistillConfig RunConfig::g_distill_config(int stage_index) const {
    DistillConfig cfg;
    cfg.gamma = g.gamma;
    cfg.max_epochs = g.epochs;
    cfg.num_batches = g.num_batches;
    cfg.initial_step = g.initial_step;
    cfg.step_decay = g.step_decay;
    cfg.svm_c = g.svm_c;
    cfg.svm_tol = g.svm_tol;
    cfg.svm_max_passes = g.svm_max_passes;
    cfg.seed = mix_seed(g.seed, static_cast<std::uint64_t>(stage_index));
    return cfg;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string RunConfig::render() const {
    std::ostringstream out;
    out << "[data]\n";
    out << "path = " << data.path << "\n";
    out << "n = " << data.n << "\n";
    out << "dim = " << data.dim << "\n";
    out << "positive_fraction = " << fmt_double(data.positive_fraction) << "\n";
    out << "separation = " << fmt_double(data.separation) << "\n";
    out << "seed = " << data.seed << "\n";
    out << "grid_rows = " << data.grid_rows << "\n";
    out << "grid_cols = " << data.grid_cols << "\n";
    out << "\n[split]\n";
    out << "labeled_count = " << split.labeled_count << "\n";
    out << "seed = " << split.seed << "\n";
    out << "\n[bank]\n";
    out << "n1 = " << bank.n1 << "\n";
    out << "k_neighbors = " << bank.k_neighbors << "\n";
    out << "\n[f]\n";
    out << "units = " << f.units << "\n";
    out << "layers = " << f.layers << "\n";
    out << "epochs = " << f.epochs << "\n";
    out << "gamma = " << fmt_double(f.gamma) << "\n";
    out << "initial_step = " << fmt_double(f.initial_step) << "\n";
    out << "step_decay = " << fmt_double(f.step_decay) << "\n";
    out << "num_batches = " << f.num_batches << "\n";
    out << "svm_c = " << fmt_double(f.svm_c) << "\n";
    out << "svm_tol = " << fmt_double(f.svm_tol) << "\n";
    out << "svm_max_passes = " << f.svm_max_passes << "\n";
    out << "seed = " << f.seed << "\n";
    out << "\n[g]\n";
    out << "epochs = " << g.epochs << "\n";
    out << "gamma = " << fmt_double(g.gamma) << "\n";
    out << "initial_step = " << fmt_double(g.initial_step) << "\n";
    out << "step_decay = " << fmt_double(g.step_decay) << "\n";
    out << "num_batches = " << g.num_batches << "\n";
    out << "svm_c = " << fmt_double(g.svm_c) << "\n";
    out << "svm_tol = " << fmt_double(g.svm_tol) << "\n";
    out << "svm_max_passes = " << g.svm_max_passes << "\n";
    out << "seed = " << g.seed << "\n";
    out << "\n[eval]\n";
    out << "threads = " << eval.threads << "\n";
    return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a64(render()); }

void RunConfig::reseed(std::uint64_t master) {
    data.seed = mix_seed(master, 1);
    split.seed = mix_seed(master, 2);
    f.seed = mix_seed(master, 3);
    g.seed = mix_seed(master, 4);
}

void RunConfig::validate() const {
    if (data.n < 10) throw InvalidInput("data.n must be at least 10");
    if (data.dim <= 0) throw InvalidInput("data.dim must be positive");
    if (bank.n1 <= 0) throw InvalidInput("bank.n1 must be positive");
    if (data.dim % bank.n1 != 0) throw InvalidInput("bank.n1 must divide data.dim");
    if (bank.k_neighbors <= 0) throw InvalidInput("bank.k_neighbors must be positive");
    if (split.labeled_count <= 0 || split.labeled_count > data.n)
        throw InvalidInput("split.labeled_count must lie in [1, data.n]");
    if (f.layers < 2) throw InvalidInput("f.layers must be at least 2");
    if (eval.threads <= 0) throw InvalidInput("eval.threads must be positive");
    f_distill_config().validate();
    g_distill_config(0).validate();
}

namespace {

struct Entry {
    std::string value;
    int line;
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class ConfigReader {
  public:
    explicit ConfigReader(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw InvalidInput("line " + std::to_string(lineno) +
                                       ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw InvalidInput("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (section.empty() || key.empty())
                throw InvalidInput("line " + std::to_string(lineno) +
                                   ": key outside a section");
            std::string full = section + "." + key;
            if (entries_.count(full))
                throw InvalidInput("line " + std::to_string(lineno) + ": duplicate key '" +
                                   full + "'");
            entries_[full] = {value, lineno};
        }
    }

    void take_string(const std::string& key, std::string& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        out = it->second.value;
        entries_.erase(it);
    }

    void take_int(const std::string& key, int& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        long long v;
        if (!parse_ll(it->second.value, v))
            fail(key, it->second.line, "expected an integer");
        out = static_cast<int>(v);
        entries_.erase(it);
    }

    void take_u64(const std::string& key, std::uint64_t& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        unsigned long long v;
        const std::string& s = it->second.value;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size())
            fail(key, it->second.line, "expected an unsigned integer");
        out = v;
        entries_.erase(it);
    }

    void take_double(const std::string& key, double& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        const std::string& s = it->second.value;
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size() || s.empty())
            fail(key, it->second.line, "expected a number");
        out = v;
        entries_.erase(it);
    }

    void finish() const {
        if (entries_.empty()) return;
        const auto& [key, entry] = *entries_.begin();
        throw InvalidInput("line " + std::to_string(entry.line) + ": unknown key '" + key +
                           "'");
    }

  private:
    static bool parse_ll(const std::string& s, long long& v) {
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        return ec == std::errc() && p == s.data() + s.size();
    }
    [[noreturn]] static void fail(const std::string& key, int line, const char* what) {
        throw InvalidInput("line " + std::to_string(line) + ": key '" + key + "': " + what);
    }

    std::map<std::string, Entry> entries_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    ConfigReader r(text);
    RunConfig cfg;
    r.take_string("data.path", cfg.data.path);
    r.take_int("data.n", cfg.data.n);
    r.take_int("data.dim", cfg.data.dim);
    r.take_double("data.positive_fraction", cfg.data.positive_fraction);
    r.take_double("data.separation", cfg.data.separation);
    r.take_u64("data.seed", cfg.data.seed);
    r.take_int("data.grid_rows", cfg.data.grid_rows);
    r.take_int("data.grid_cols", cfg.data.grid_cols);
    r.take_int("split.labeled_count", cfg.split.labeled_count);
    r.take_u64("split.seed", cfg.split.seed);
    r.take_int("bank.n1", cfg.bank.n1);
    r.take_int("bank.k_neighbors", cfg.bank.k_neighbors);
    r.take_int("f.units", cfg.f.units);
    r.take_int("f.layers", cfg.f.layers);
    r.take_int("f.epochs", cfg.f.epochs);
    r.take_double("f.gamma", cfg.f.gamma);
    r.take_double("f.initial_step", cfg.f.initial_step);
    r.take_double("f.step_decay", cfg.f.step_decay);
    r.take_int("f.num_batches", cfg.f.num_batches);
    r.take_double("f.svm_c", cfg.f.svm_c);
    r.take_double("f.svm_tol", cfg.f.svm_tol);
    r.take_int("f.svm_max_passes", cfg.f.svm_max_passes);
    r.take_u64("f.seed", cfg.f.seed);
    r.take_int("g.epochs", cfg.g.epochs);
    r.take_double("g.gamma", cfg.g.gamma);
    r.take_double("g.initial_step", cfg.g.initial_step);
    r.take_double("g.step_decay", cfg.g.step_decay);
    r.take_int("g.num_batches", cfg.g.num_batches);
    r.take_double("g.svm_c", cfg.g.svm_c);
    r.take_double("g.svm_tol", cfg.g.svm_tol);
    r.take_int("g.svm_max_passes", cfg.g.svm_max_passes);
    r.take_u64("g.seed", cfg.g.seed);
    r.take_int("eval.threads", cfg.eval.threads);
    r.finish();
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace dkn
