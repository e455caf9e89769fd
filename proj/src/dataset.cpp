#include "lipkernel/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace lipkernel {

bool Dataset::binary() const {
    return !labels.empty() && std::all_of(labels.begin(), labels.end(), [](int v) { return v == 1 || v == -1; });
}

int Dataset::num_classes() const {
    if (binary()) return 2;
    int c = 0;
    for (int v : labels) c = std::max(c, v + 1);
    return c;
}

Points normalise(const Points& raw, const Vector& min, const Vector& max) {
    if (raw.cols() != min.size() || raw.cols() != max.size()) throw ConfigError("normalisation dimension mismatch");
    Points X(raw.rows(), raw.cols());
    for (Index j = 0; j < raw.cols(); ++j) {
        const double range = max[j] - min[j];
        for (Index i = 0; i < raw.rows(); ++i)
            X(i, j) = range > 0 ? std::clamp((raw(i, j) - min[j]) / range, 0.0, 1.0) : 0.0;
    }
    return X;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& v) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e && std::isfinite(v);
}

bool parse_int(const std::string& s, int& v) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    auto r = std::from_chars(b, e, v);
    return r.ec == std::errc() && r.ptr == e;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Dataset parse_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    size_t arity = 0;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        double probe;
        if (first && !parse_double(cells[0], probe)) {
            first = false;
            continue;  // header
        }
        first = false;
        const std::string where = source + ":" + std::to_string(lineno);
        if (cells.size() < 2) throw ConfigError(where + ": need a label and at least one feature");
        if (arity == 0) arity = cells.size();
        if (cells.size() != arity)
            throw ConfigError(where + ": expected " + std::to_string(arity) + " columns, found " +
                              std::to_string(cells.size()));
        int lab;
        if (!parse_int(cells[0], lab)) throw ConfigError(where + ": label is not an integer");
        std::vector<double> r(arity - 1);
        for (size_t j = 1; j < arity; ++j)
            if (!parse_double(cells[j], r[j - 1])) throw ConfigError(where + ": malformed number '" + cells[j] + "'");
        rows.push_back(std::move(r));
        labels.push_back(lab);
    }
    if (rows.empty()) throw ConfigError(source + ": no data rows");
    const Index l = Index(rows.size()), d = Index(arity - 1);
    Points raw(l, d);
    for (Index i = 0; i < l; ++i)
        for (Index j = 0; j < d; ++j) raw(i, j) = rows[i][j];
    Dataset ds;
    ds.labels = std::move(labels);
    ds.feature_min = raw.colwise().minCoeff().transpose();
    ds.feature_max = raw.colwise().maxCoeff().transpose();
    ds.X = normalise(raw, ds.feature_min, ds.feature_max);
    const bool pm = ds.binary();
    for (int v : ds.labels)
        if (!pm && v < 0) throw ConfigError(source + ": labels must be -1/+1 or 0..C-1");
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv(ss.str(), path);
}

std::string to_csv(const Dataset& ds) {
    std::string out = "label";
    for (Index j = 0; j < ds.dim(); ++j) out += ",x" + std::to_string(j + 1);
    out += "\n";
    for (Index i = 0; i < ds.size(); ++i) {
        out += std::to_string(ds.labels[i]);
        for (Index j = 0; j < ds.dim(); ++j) out += "," + fmt(ds.X(i, j));
        out += "\n";
    }
    return out;
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
    if (s == "blobs") return SyntheticKind::Blobs;
    if (s == "moons" || s == "two-moons") return SyntheticKind::TwoMoons;
    throw ConfigError("unknown synthetic kind: " + s);
}

std::string to_string(SyntheticKind k) { return k == SyntheticKind::Blobs ? "blobs" : "moons"; }

Dataset gen_synthetic(SyntheticKind kind, int n_per_class, int classes, int d, std::uint64_t seed, double spread) {
    if (n_per_class < 1) throw ConfigError("n per class must be >= 1");
    if (classes < 2 || classes > 10) throw ConfigError("classes must be in 2..10");
    if (d < 1) throw ConfigError("dimension must be >= 1");
    if (!(spread >= 0.0)) throw ConfigError("spread must be >= 0");
    Rng rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Dataset ds;
    const Index l = Index(n_per_class) * classes;
    ds.X.resize(l, d);
    ds.labels.resize(l);
    auto label_of = [&](int c) { return classes == 2 ? (c == 0 ? -1 : 1) : c; };
    if (kind == SyntheticKind::Blobs) {
        // rejection sampling keeps centres apart; the best draw is kept if
        // the separation target is never met
        const double sep = 0.3 * std::sqrt(double(d)) / std::pow(double(classes), 1.0 / d);
        Points centres(classes, d), best(classes, d);
        double best_gap = -1.0;
        for (int attempt = 0; attempt < 1000 && best_gap < sep; ++attempt) {
            for (int c = 0; c < classes; ++c)
                for (int j = 0; j < d; ++j) centres(c, j) = 0.2 + 0.6 * U(rng);
            double gap = std::numeric_limits<double>::infinity();
            for (int a = 0; a < classes; ++a)
                for (int b = a + 1; b < classes; ++b) gap = std::min(gap, (centres.row(a) - centres.row(b)).norm());
            if (gap > best_gap) {
                best_gap = gap;
                best = centres;
            }
        }
        centres = best;
        for (int c = 0; c < classes; ++c)
            for (int i = 0; i < n_per_class; ++i) {
                const Index r = Index(c) * n_per_class + i;
                for (int j = 0; j < d; ++j) ds.X(r, j) = std::clamp(centres(c, j) + spread * g(rng), 0.0, 1.0);
                ds.labels[r] = label_of(c);
            }
    } else {
        if (d != 2 || classes != 2) throw ConfigError("two moons needs d = 2 and 2 classes");
        const double pi = std::numbers::pi;
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < n_per_class; ++i) {
                const Index r = Index(c) * n_per_class + i;
                const double t = pi * U(rng);
                double x = c == 0 ? std::cos(t) : 1.0 - std::cos(t);
                double y = c == 0 ? std::sin(t) : 0.5 - std::sin(t);
                x += spread * g(rng);
                y += spread * g(rng);
                // raw range is about [-1, 2] x [-0.5, 1]
                ds.X(r, 0) = std::clamp((x + 1.25) / 3.5, 0.0, 1.0);
                ds.X(r, 1) = std::clamp((y + 0.75) / 2.0, 0.0, 1.0);
                ds.labels[r] = label_of(c);
            }
    }
    ds.feature_min = Vector::Zero(d);
    ds.feature_max = Vector::Ones(d);
    return ds;
}

}  // namespace lipkernel
