#include "gapforge/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gapforge {

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double tgauss_default_radius(int n, int m) {
    return 2.0 * (std::sqrt(std::log(std::max(n, 2))) + std::sqrt(static_cast<double>(m)));
}

} // namespace

std::string model_tag(Model model) {
    switch (model) {
        case Model::CenteredDsu: return "dsu";
        case Model::CenteredLogconcave: return "logconcave";
        case Model::Packing: return "packing";
    }
    return "?";
}

std::vector<double> IpInstance::column(int j) const {
    std::vector<double> col(m);
    for (int i = 0; i < m; ++i) col[i] = a(i, j);
    return col;
}

std::vector<int64_t> IpInstance::product_num(std::span<const uint8_t> x01) const {
    std::vector<int64_t> out(m, 0);
    for (int j = 0; j < n; ++j) {
        if (!x01[j]) continue;
        for (int i = 0; i < m; ++i) out[i] += a_num[static_cast<size_t>(i) * n + j];
    }
    return out;
}

double IpInstance::max_column_norm() const {
    double best = 0.0;
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) {
            double v = a(i, j);
            s += v * v;
        }
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

IpInstance gen_centered_dsu(int n, int m, int64_t k, const CenteredBSpec& b_spec, uint64_t seed) {
    if (n < 1 || m < 1 || k < 1) throw InstanceError("gen_centered_dsu: need n >= 1, m >= 1, k >= 1");
    IpInstance inst;
    inst.model = Model::CenteredDsu;
    inst.m = m;
    inst.n = n;
    inst.k = k;
    inst.seed = seed;
    inst.a_num.resize(static_cast<size_t>(m) * n);
    inst.c.resize(n);
    for (int j = 0; j < n; ++j) {
        Rng rng(seed, static_cast<uint64_t>(j));
        for (int i = 0; i < m; ++i)
            inst.a_num[static_cast<size_t>(i) * n + j] = rng.uniform_int(-k, k);
        inst.c[j] = rng.normal();
    }
    if (b_spec.b_num) {
        if (static_cast<int>(b_spec.b_num->size()) != m)
            throw InstanceError("gen_centered_dsu: b has wrong dimension");
        inst.b_num = *b_spec.b_num;
    } else {
        inst.b_num.assign(m, 0);
    }
    return inst;
}

IpInstance gen_centered_logconcave(int n, int m, LogconcaveFamily family,
                                   const std::optional<std::vector<double>>& b_spec,
                                   uint64_t seed, double radius) {
    if (n < 1 || m < 1) throw InstanceError("gen_centered_logconcave: need n >= 1, m >= 1");
    IpInstance inst;
    inst.model = Model::CenteredLogconcave;
    inst.m = m;
    inst.n = n;
    inst.k = 0;
    inst.family = family;
    inst.seed = seed;
    inst.a_real.resize(static_cast<size_t>(m) * n);
    inst.c.resize(n);

    ColumnLaw law;
    law.m = m;
    switch (family) {
        case LogconcaveFamily::UniformCube:
            law.family = ColumnLaw::Family::UniformCube;
            inst.radius = std::sqrt(3.0 * m);
            break;
        case LogconcaveFamily::UniformBall:
            law.family = ColumnLaw::Family::UniformBall;
            inst.radius = std::sqrt(static_cast<double>(m) + 2.0);
            break;
        case LogconcaveFamily::TruncatedGaussian:
            law.family = ColumnLaw::Family::TruncatedGaussian;
            inst.radius = radius > 0 ? radius : tgauss_default_radius(n, m);
            law.radius = inst.radius;
            break;
    }

    std::vector<double> col(m);
    for (int j = 0; j < n; ++j) {
        Rng rng(seed, static_cast<uint64_t>(j));
        law.sample(rng, col);
        for (int i = 0; i < m; ++i) inst.a_real[static_cast<size_t>(i) * n + j] = col[i];
        inst.c[j] = rng.normal();
    }
    if (b_spec) {
        if (static_cast<int>(b_spec->size()) != m)
            throw InstanceError("gen_centered_logconcave: b has wrong dimension");
        inst.b_real = *b_spec;
    } else {
        inst.b_real.assign(m, 0.0);
    }
    return inst;
}

IpInstance gen_packing(int n, int m, int64_t k, double beta, const PackingBSpec& b_spec,
                       uint64_t seed) {
    if (n < 1 || m < 1) throw InstanceError("gen_packing: need n >= 1, m >= 1");
    if (k < 3) throw InstanceError("gen_packing: need k >= 3");
    if (!(beta > 0.0 && beta < 0.25)) throw InstanceError("gen_packing: need beta in (0, 1/4)");

    double lo = static_cast<double>(k) * n * beta;
    double hi = static_cast<double>(k) * n * (0.5 - beta);
    int64_t lo_int = static_cast<int64_t>(std::floor(lo)) + 1;
    int64_t hi_int = static_cast<int64_t>(std::ceil(hi)) - 1;
    if (lo_int > hi_int)
        throw InstanceError("gen_packing: interval (k n beta, k n (1/2-beta)) contains no integer");

    IpInstance inst;
    inst.model = Model::Packing;
    inst.m = m;
    inst.n = n;
    inst.k = k;
    inst.beta = beta;
    inst.seed = seed;
    inst.a_num.resize(static_cast<size_t>(m) * n);
    inst.c.resize(n);
    for (int j = 0; j < n; ++j) {
        Rng rng(seed, static_cast<uint64_t>(j));
        for (int i = 0; i < m; ++i)
            inst.a_num[static_cast<size_t>(i) * n + j] = rng.uniform_int(1, k);
        inst.c[j] = rng.exponential();
    }
    if (b_spec.b_num) {
        if (static_cast<int>(b_spec.b_num->size()) != m)
            throw InstanceError("gen_packing: b has wrong dimension");
        for (int64_t v : *b_spec.b_num)
            if (!(static_cast<double>(v) > lo && static_cast<double>(v) < hi))
                throw InstanceError("gen_packing: b outside (k n beta, k n (1/2-beta))");
        inst.b_num = *b_spec.b_num;
    } else {
        int64_t mid = std::llround(static_cast<double>(k) * n / 4.0);
        mid = std::clamp(mid, lo_int, hi_int);
        inst.b_num.assign(m, mid);
    }
    return inst;
}

std::string serialize_instance(const IpInstance& inst) {
    std::ostringstream out;
    out << "gapforge-ip v1\n";
    std::string tag;
    switch (inst.model) {
        case Model::CenteredDsu: tag = "dsu"; break;
        case Model::Packing: tag = "packing"; break;
        case Model::CenteredLogconcave:
            switch (inst.family) {
                case LogconcaveFamily::UniformCube: tag = "cube"; break;
                case LogconcaveFamily::UniformBall: tag = "ball"; break;
                case LogconcaveFamily::TruncatedGaussian: tag = "tgauss:" + fmt17(inst.radius); break;
            }
            break;
    }
    out << "model=" << tag << " m=" << inst.m << " n=" << inst.n << " k=" << inst.k
        << " beta=" << (inst.model == Model::Packing ? fmt17(inst.beta) : std::string("-"))
        << " seed=" << inst.seed << "\n";
    for (int i = 0; i < inst.m; ++i) {
        for (int j = 0; j < inst.n; ++j) {
            if (j) out << ' ';
            if (inst.discrete())
                out << inst.a_num[static_cast<size_t>(i) * inst.n + j];
            else
                out << fmt17(inst.a_real[static_cast<size_t>(i) * inst.n + j]);
        }
        out << '\n';
    }
    for (int i = 0; i < inst.m; ++i) {
        if (i) out << ' ';
        if (inst.discrete())
            out << inst.b_num[i];
        else
            out << fmt17(inst.b_real[i]);
    }
    out << '\n';
    for (int j = 0; j < inst.n; ++j) {
        if (j) out << ' ';
        out << fmt17(inst.c[j]);
    }
    out << '\n';
    return out.str();
}

void save_instance(const IpInstance& inst, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InstanceError("cannot open for writing: " + path);
    f << serialize_instance(inst);
    if (!f) throw InstanceError("write failed: " + path);
}

namespace {

std::string expect_kv(std::istringstream& in, const std::string& key) {
    std::string tok;
    if (!(in >> tok)) throw InstanceError("malformed header: missing " + key);
    if (tok.rfind(key + "=", 0) != 0) throw InstanceError("malformed header: expected " + key + "=");
    return tok.substr(key.size() + 1);
}

int64_t parse_i64(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw InstanceError(std::string("bad integer for ") + what);
        return v;
    } catch (const InstanceError&) {
        throw;
    } catch (...) {
        throw InstanceError(std::string("bad integer for ") + what);
    }
}

double parse_f64(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw InstanceError(std::string("bad float for ") + what);
        return v;
    } catch (const InstanceError&) {
        throw;
    } catch (...) {
        throw InstanceError(std::string("bad float for ") + what);
    }
}

} // namespace

IpInstance parse_instance(const std::string& text) {
    std::istringstream f(text);
    std::string line;
    if (!std::getline(f, line) || line != "gapforge-ip v1")
        throw InstanceError("malformed header: bad magic line");
    if (!std::getline(f, line)) throw InstanceError("malformed header: missing parameter line");

    std::istringstream hdr(line);
    std::string tag = expect_kv(hdr, "model");
    IpInstance inst;
    if (tag == "dsu") {
        inst.model = Model::CenteredDsu;
    } else if (tag == "packing") {
        inst.model = Model::Packing;
    } else if (tag == "cube") {
        inst.model = Model::CenteredLogconcave;
        inst.family = LogconcaveFamily::UniformCube;
    } else if (tag == "ball") {
        inst.model = Model::CenteredLogconcave;
        inst.family = LogconcaveFamily::UniformBall;
    } else if (tag.rfind("tgauss:", 0) == 0) {
        inst.model = Model::CenteredLogconcave;
        inst.family = LogconcaveFamily::TruncatedGaussian;
        inst.radius = parse_f64(tag.substr(7), "radius");
    } else {
        throw InstanceError("malformed header: unknown model tag " + tag);
    }

    inst.m = static_cast<int>(parse_i64(expect_kv(hdr, "m"), "m"));
    inst.n = static_cast<int>(parse_i64(expect_kv(hdr, "n"), "n"));
    inst.k = parse_i64(expect_kv(hdr, "k"), "k");
    std::string beta_tok = expect_kv(hdr, "beta");
    inst.beta = beta_tok == "-" ? 0.0 : parse_f64(beta_tok, "beta");
    inst.seed = static_cast<uint64_t>(parse_i64(expect_kv(hdr, "seed"), "seed"));
    if (inst.m < 1 || inst.n < 1) throw InstanceError("malformed header: bad dimensions");
    if (inst.discrete() && inst.k < 1) throw InstanceError("malformed header: bad k");

    // Remaining tokens: m*n matrix entries, m for b, n for c.
    std::vector<std::string> toks;
    std::string tok;
    while (f >> tok) toks.push_back(tok);
    size_t want = static_cast<size_t>(inst.m) * inst.n + inst.m + inst.n;
    if (toks.size() != want)
        throw InstanceError("dimension mismatch: expected " + std::to_string(want) + " entries, got " +
                            std::to_string(toks.size()));

    size_t pos = 0;
    if (inst.discrete()) {
        inst.a_num.resize(static_cast<size_t>(inst.m) * inst.n);
        for (auto& v : inst.a_num) v = parse_i64(toks[pos++], "A entry");
        inst.b_num.resize(inst.m);
        for (auto& v : inst.b_num) v = parse_i64(toks[pos++], "b entry");
    } else {
        inst.a_real.resize(static_cast<size_t>(inst.m) * inst.n);
        for (auto& v : inst.a_real) v = parse_f64(toks[pos++], "A entry");
        inst.b_real.resize(inst.m);
        for (auto& v : inst.b_real) v = parse_f64(toks[pos++], "b entry");
    }
    inst.c.resize(inst.n);
    for (auto& v : inst.c) v = parse_f64(toks[pos++], "c entry");

    if (inst.model == Model::CenteredDsu) {
        for (int64_t v : inst.a_num)
            if (v < -inst.k || v > inst.k)
                throw InstanceError("domain error: dsu entry outside {-k,...,k}");
    } else if (inst.model == Model::Packing) {
        for (int64_t v : inst.a_num)
            if (v < 1 || v > inst.k)
                throw InstanceError("domain error: packing entry outside {1,...,k}");
        double lo = static_cast<double>(inst.k) * inst.n * inst.beta;
        double hi = static_cast<double>(inst.k) * inst.n * (0.5 - inst.beta);
        for (int64_t v : inst.b_num)
            if (!(static_cast<double>(v) > lo && static_cast<double>(v) < hi))
                throw InstanceError("domain error: packing b outside (k n beta, k n (1/2-beta))");
    }
    return inst;
}

IpInstance load_instance(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InstanceError("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_instance(ss.str());
}

double ColumnLaw::coordinate_mean() const {
    switch (family) {
        case Family::DsuSymmetric: return 0.0;
        case Family::DiscreteInterval: return static_cast<double>(a) + static_cast<double>(k) / 2.0;
        case Family::PackingUniform: return (static_cast<double>(k) + 1.0) / (2.0 * k);
        case Family::UniformCube:
        case Family::UniformBall:
        case Family::TruncatedGaussian: return 0.0;
    }
    return 0.0;
}

std::vector<double> ColumnLaw::mean() const { return std::vector<double>(m, coordinate_mean()); }

double ColumnLaw::sigma() const {
    switch (family) {
        case Family::DsuSymmetric:
            return std::sqrt((static_cast<double>(k) + 1.0) / (3.0 * k));
        case Family::DiscreteInterval:
            return std::sqrt(static_cast<double>(k) * (k + 2) / 12.0);
        case Family::PackingUniform:
            return std::sqrt((static_cast<double>(k) * k - 1.0) / (12.0 * k * k));
        case Family::UniformCube:
        case Family::UniformBall:
        case Family::TruncatedGaussian:
            return 1.0;
    }
    return 1.0;
}

bool ColumnLaw::finite_support() const {
    return family == Family::DsuSymmetric || family == Family::DiscreteInterval ||
           family == Family::PackingUniform;
}

int64_t ColumnLaw::support_size() const {
    if (!finite_support()) return -1;
    int64_t per = family == Family::DsuSymmetric ? 2 * k + 1
                : family == Family::DiscreteInterval ? k + 1
                                                     : k;
    int64_t total = 1;
    for (int d = 0; d < m; ++d) {
        if (total > (int64_t(1) << 62) / per) return int64_t(1) << 62;
        total *= per;
    }
    return total;
}

std::vector<double> ColumnLaw::coordinate_support() const {
    std::vector<double> pts;
    switch (family) {
        case Family::DsuSymmetric:
            for (int64_t v = -k; v <= k; ++v) pts.push_back(static_cast<double>(v) / k);
            break;
        case Family::DiscreteInterval:
            for (int64_t v = a; v <= a + k; ++v) pts.push_back(static_cast<double>(v));
            break;
        case Family::PackingUniform:
            for (int64_t v = 1; v <= k; ++v) pts.push_back(static_cast<double>(v) / k);
            break;
        default:
            throw InstanceError("coordinate_support: law has continuous support");
    }
    return pts;
}

void ColumnLaw::sample(Rng& rng, std::span<double> out) const {
    switch (family) {
        case Family::DsuSymmetric:
            for (int d = 0; d < m; ++d) out[d] = static_cast<double>(rng.uniform_int(-k, k)) / k;
            return;
        case Family::DiscreteInterval:
            for (int d = 0; d < m; ++d) out[d] = static_cast<double>(rng.uniform_int(a, a + k));
            return;
        case Family::PackingUniform:
            for (int d = 0; d < m; ++d) out[d] = static_cast<double>(rng.uniform_int(1, k)) / k;
            return;
        case Family::UniformCube: {
            const double side = std::sqrt(3.0);
            for (int d = 0; d < m; ++d) out[d] = rng.uniform(-side, side);
            return;
        }
        case Family::UniformBall: {
            // Gaussian direction, radial CDF inversion; ball radius sqrt(m+2)
            // makes the law isotropic.
            double norm2 = 0.0;
            for (int d = 0; d < m; ++d) {
                out[d] = rng.normal();
                norm2 += out[d] * out[d];
            }
            double norm = std::sqrt(norm2);
            if (norm == 0.0) norm = 1.0;
            double r = std::sqrt(static_cast<double>(m) + 2.0) *
                       std::pow(rng.uniform01_open(), 1.0 / m);
            for (int d = 0; d < m; ++d) out[d] *= r / norm;
            return;
        }
        case Family::TruncatedGaussian: {
            double r2 = radius * radius;
            for (;;) {
                double norm2 = 0.0;
                for (int d = 0; d < m; ++d) {
                    out[d] = rng.normal();
                    norm2 += out[d] * out[d];
                }
                if (norm2 <= r2) return;
            }
        }
    }
}

} // namespace gapforge
