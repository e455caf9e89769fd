#include "lipkernel/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lipkernel {

namespace {

const char* kHeader = "lipkernel-model v1";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void row(std::string& out, const std::string& key, const Vector& v) {
    out += key;
    for (Index i = 0; i < v.size(); ++i) out += " " + fmt(v[i]);
    out += "\n";
}

std::string kernel_name(const KernelSpec& k) {
    if (!k.is_product()) return "inverse";
    return k.base.kind == BaseKind::Gaussian ? "gaussian" : "periodic";
}

class Reader {
public:
    explicit Reader(const std::string& text) : in_(text) {}

    std::istringstream line(const std::string& key) {
        std::string l;
        while (std::getline(in_, l)) {
            ++lineno_;
            if (l.empty()) continue;
            std::istringstream ls(l);
            std::string k;
            ls >> k;
            if (k != key) fail("expected '" + key + "', found '" + k + "'");
            return ls;
        }
        fail("unexpected end of file, expected '" + key + "'");
    }

    template <class T>
    T scalar(const std::string& key) {
        auto ls = line(key);
        T v;
        if (!(ls >> v)) fail("bad value for '" + key + "'");
        return v;
    }

    Vector vec(const std::string& key, Index n) {
        auto ls = line(key);
        Vector v(n);
        for (Index i = 0; i < n; ++i)
            if (!(ls >> v[i])) fail("'" + key + "' needs " + std::to_string(n) + " values");
        return v;
    }

    std::string raw_line() {
        std::string l;
        if (!std::getline(in_, l)) fail("unexpected end of file");
        ++lineno_;
        return l;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("model file line " + std::to_string(lineno_) + ": " + msg);
    }

private:
    std::istringstream in_;
    int lineno_ = 0;
};

}  // namespace

std::string model_to_text(const SavedModel& m) {
    if (m.models.empty()) throw ConfigError("nothing to save");
    const Model& f0 = m.models[0];
    if (m.binary && m.models.size() != 1) throw ConfigError("binary model files hold exactly one model");
    for (const auto& f : m.models) {
        f.validate();
        if (f.anchors.rows() != f0.anchors.rows() || f.anchors != f0.anchors || f.mean_scale != f0.mean_scale ||
            kernel_name(f.kernel) != kernel_name(f0.kernel) || f.kernel.base.sigma != f0.kernel.base.sigma ||
            f.kernel.base.period != f0.kernel.base.period)
            throw ConfigError("per-class models must share kernel and anchors");
    }
    const Index d = f0.dim();
    if (m.feature_min.size() != d || m.feature_max.size() != d) throw ConfigError("normalisation constants missing");
    std::string out = std::string(kHeader) + "\n";
    out += std::string("type ") + (m.binary ? "binary" : "multiclass") + "\n";
    out += "classes " + std::to_string(m.models.size()) + "\n";
    out += "kernel " + kernel_name(f0.kernel) + "\n";
    out += "sigma " + fmt(f0.kernel.base.sigma) + "\n";
    out += "period " + fmt(f0.kernel.base.period) + "\n";
    out += "dim " + std::to_string(d) + "\n";
    out += std::string("mean_scale ") + (f0.mean_scale ? "1" : "0") + "\n";
    row(out, "feature_min", m.feature_min);
    row(out, "feature_max", m.feature_max);
    out += "anchors " + std::to_string(f0.size()) + "\n";
    for (Index a = 0; a < f0.size(); ++a) {
        for (Index j = 0; j < d; ++j) out += (j ? " " : "") + fmt(f0.anchors(a, j));
        out += "\n";
    }
    for (const auto& f : m.models) row(out, "coeffs", f.coeffs);
    out += "end\n";
    return out;
}

SavedModel model_from_text(const std::string& text) {
    Reader r(text);
    if (r.raw_line() != kHeader) r.fail("missing header '" + std::string(kHeader) + "'");
    SavedModel m;
    const std::string type = r.scalar<std::string>("type");
    if (type != "binary" && type != "multiclass") r.fail("unknown type " + type);
    m.binary = type == "binary";
    const int C = r.scalar<int>("classes");
    if (C < 1 || (m.binary && C != 1) || (!m.binary && C < 2)) r.fail("bad class count");
    const std::string kname = r.scalar<std::string>("kernel");
    const double sigma = r.scalar<double>("sigma");
    const double period = r.scalar<double>("period");
    const int d = r.scalar<int>("dim");
    if (d < 1) r.fail("bad dimension");
    const int ms = r.scalar<int>("mean_scale");
    KernelSpec k;
    if (kname == "gaussian")
        k = KernelSpec::gaussian(sigma, d);
    else if (kname == "periodic")
        k = KernelSpec::periodic(period, sigma, d);
    else if (kname == "inverse")
        k = KernelSpec::inverse(d);
    else
        r.fail("unknown kernel " + kname);
    m.feature_min = r.vec("feature_min", d);
    m.feature_max = r.vec("feature_max", d);
    const Index n = r.scalar<Index>("anchors");
    if (n < 1) r.fail("bad anchor count");
    Points A(n, d);
    for (Index a = 0; a < n; ++a) {
        std::istringstream ls(r.raw_line());
        for (Index j = 0; j < d; ++j)
            if (!(ls >> A(a, j))) r.fail("anchor row needs " + std::to_string(d) + " values");
    }
    for (int c = 0; c < C; ++c) {
        Model f;
        f.kernel = k;
        f.anchors = A;
        f.coeffs = r.vec("coeffs", n);
        f.mean_scale = ms != 0;
        f.validate();
        m.models.push_back(std::move(f));
    }
    r.line("end");
    return m;
}

void save_model(const SavedModel& m, const std::string& path) {
    const std::string text = model_to_text(m);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
}

SavedModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return model_from_text(ss.str());
}

}  // namespace lipkernel
