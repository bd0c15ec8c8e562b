#include "melab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "melab/dataset_json.hpp"
#include "melab/errors.hpp"
#include "melab/io.hpp"
#include "melab/rng.hpp"

namespace melab::data {

namespace {

void validate_mixture(const GaussianMixtureSpec& g) {
    if (g.dim < 1) throw ConfigError("mixture: dim must be >= 1");
    if (g.n_classes < 2) throw ConfigError("mixture: need at least 2 classes");
    if (g.means.rows != static_cast<std::size_t>(g.n_classes) ||
        g.means.cols != static_cast<std::size_t>(g.dim))
        throw ConfigError("mixture: means shape mismatch");
    if (g.vars.rows != g.means.rows || g.vars.cols != g.means.cols)
        throw ConfigError("mixture: vars shape mismatch");
    for (double v : g.vars.a)
        if (!(v > 0.0)) throw ConfigError("mixture: covariance diagonal must be positive");
}

std::vector<double> draw_mixture_point(const GaussianMixtureSpec& g, int cls, Rng& rng) {
    std::vector<double> x(g.dim);
    for (int d = 0; d < g.dim; ++d)
        x[d] = rng.normal(g.means(cls, d), std::sqrt(g.vars(cls, d)));
    return x;
}

}  // namespace

int DistributionSpec::dim() const {
    if (auto* g = std::get_if<GaussianMixtureSpec>(&params)) return g->dim;
    if (auto* u = std::get_if<UniformBoxSpec>(&params)) return u->dim;
    return std::get<ShiftedSurrogateSpec>(params).base.dim;
}

void DistributionSpec::validate() const {
    if (auto* g = std::get_if<GaussianMixtureSpec>(&params)) {
        validate_mixture(*g);
    } else if (auto* u = std::get_if<UniformBoxSpec>(&params)) {
        if (u->dim < 1) throw ConfigError("box: dim must be >= 1");
        if (u->lo.size() != static_cast<std::size_t>(u->dim) || u->hi.size() != u->lo.size())
            throw ConfigError("box: bounds shape mismatch");
        for (int d = 0; d < u->dim; ++d)
            if (!(u->lo[d] < u->hi[d])) throw ConfigError("box: lo must be < hi");
    } else {
        const auto& s = std::get<ShiftedSurrogateSpec>(params);
        validate_mixture(s.base);
        if (s.shift.size() != static_cast<std::size_t>(s.base.dim))
            throw ConfigError("surrogate: shift dimension mismatch");
        if (!(s.scale > 0.0)) throw ConfigError("surrogate: scale must be positive");
    }
}

Dataset sample_ind(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    const auto* g = std::get_if<GaussianMixtureSpec>(&spec.params);
    if (!g) throw ConfigError("sample_ind requires a gaussian-mixture spec");
    Dataset ds;
    ds.spec_id = spec.id;
    ds.samples = Mat(0, static_cast<std::size_t>(g->dim));
    ds.labels.reserve(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = static_cast<int>(rng.index(static_cast<std::size_t>(g->n_classes)));
        const auto x = draw_mixture_point(*g, cls, rng);
        ds.samples.push_row({x.data(), x.size()});
        ds.labels.push_back(cls);
    }
    return ds;
}

Dataset sample_ood(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    Dataset ds;
    ds.spec_id = spec.id;
    ds.samples = Mat(0, static_cast<std::size_t>(spec.dim()));
    Rng rng(seed);
    if (const auto* u = std::get_if<UniformBoxSpec>(&spec.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(u->dim);
            for (int d = 0; d < u->dim; ++d) x[d] = rng.uniform(u->lo[d], u->hi[d]);
            ds.samples.push_row({x.data(), x.size()});
        }
    } else if (const auto* s = std::get_if<ShiftedSurrogateSpec>(&spec.params)) {
        for (std::size_t i = 0; i < n; ++i) {
            const int cls =
                static_cast<int>(rng.index(static_cast<std::size_t>(s->base.n_classes)));
            auto x = draw_mixture_point(s->base, cls, rng);
            for (int d = 0; d < s->base.dim; ++d) x[d] = s->scale * x[d] + s->shift[d];
            ds.samples.push_row({x.data(), x.size()});
        }
    } else {
        throw ConfigError("sample_ood requires a uniform-box or shifted-surrogate spec");
    }
    return ds;
}

PriorSplit split_prior(const Dataset& ds, double p, std::uint64_t seed) {
    if (!ds.labeled()) throw InputError("split_prior requires a labeled dataset");
    if (p < 0.0 || p > 1.0) throw InputError("split_prior: fraction must be in [0,1]");
    const std::size_t n = ds.size();
    const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 0.5));

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    // Partial Fisher-Yates: first k entries are the prior sample.
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
        std::swap(idx[i], idx[i + rng.index(n - i)]);
    }
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());

    PriorSplit out;
    out.fraction = p;
    out.prior.spec_id = ds.spec_id;
    out.remainder.spec_id = ds.spec_id;
    out.prior.samples = Mat(0, ds.samples.cols);
    out.remainder.samples = Mat(0, ds.samples.cols);
    for (std::size_t i = 0; i < n; ++i) {
        Dataset& dst = i < k ? out.prior : out.remainder;
        dst.samples.push_row(ds.samples.row(idx[i]));
        dst.labels.push_back(ds.labels[idx[i]]);
    }
    return out;
}

DistributionSpec make_blobs(int n_classes, int dim, double separation, double sigma,
                            const std::string& id) {
    GaussianMixtureSpec g;
    g.dim = dim;
    g.n_classes = n_classes;
    g.means = Mat(static_cast<std::size_t>(n_classes), static_cast<std::size_t>(dim));
    g.vars = Mat(g.means.rows, g.means.cols, sigma * sigma);
    // Class c sits at separation * c along axis (c mod dim), alternating sign.
    for (int c = 0; c < n_classes; ++c) {
        const double sign = (c % 2 == 0) ? 1.0 : -1.0;
        g.means(c, c % dim) = sign * separation * (1.0 + c / (2.0 * dim));
    }
    return {id, std::move(g)};
}

DistributionSpec make_ring_mixture(int n_classes, double radius, double sigma,
                                   const std::string& id, int dim, double noise_sigma,
                                   double angle_offset) {
    if (dim < 2) throw ConfigError("ring mixture: dim must be >= 2");
    GaussianMixtureSpec g;
    g.dim = dim;
    g.n_classes = n_classes;
    g.means = Mat(static_cast<std::size_t>(n_classes), static_cast<std::size_t>(dim));
    g.vars = Mat(g.means.rows, g.means.cols, noise_sigma * noise_sigma);
    for (int c = 0; c < n_classes; ++c) {
        const double ang = 2.0 * 3.14159265358979323846 * c / n_classes + angle_offset;
        g.means(c, 0) = radius * std::cos(ang);
        g.means(c, 1) = radius * std::sin(ang);
        g.vars(c, 0) = sigma * sigma;
        g.vars(c, 1) = sigma * sigma;
    }
    return {id, std::move(g)};
}

DistributionSpec make_uniform_box(int dim, double lo, double hi, const std::string& id) {
    UniformBoxSpec u;
    u.dim = dim;
    u.lo.assign(static_cast<std::size_t>(dim), lo);
    u.hi.assign(static_cast<std::size_t>(dim), hi);
    return {id, std::move(u)};
}

DistributionSpec make_surrogate(const DistributionSpec& ind_spec, std::vector<double> shift,
                                double scale, const std::string& id) {
    const auto* g = std::get_if<GaussianMixtureSpec>(&ind_spec.params);
    if (!g) throw ConfigError("surrogate requires a gaussian-mixture base");
    ShiftedSurrogateSpec s;
    s.base = *g;
    s.shift = std::move(shift);
    s.scale = scale;
    return {id, std::move(s)};
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ostringstream out;
    for (std::size_t d = 0; d < ds.samples.cols; ++d) out << "x" << d << ",";
    out << "label\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t d = 0; d < ds.samples.cols; ++d)
            out << io::fmt_exact(ds.samples(i, d)) << ",";
        if (ds.labeled()) out << ds.labels[i];
        out << "\n";
    }
    io::write_file(path, out.str());
}

Dataset load_csv(const std::string& path) {
    const std::string text = io::read_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset csv: missing header in " + path);
    const auto header = io::split_csv_line(line);
    if (header.size() < 2 || header.back() != "label")
        throw IoError("dataset csv: bad header in " + path);
    const std::size_t dim = header.size() - 1;

    Dataset ds;
    ds.samples = Mat(0, dim);
    bool any_label = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = io::split_csv_line(line);
        if (cells.size() != dim + 1) throw IoError("dataset csv: ragged row in " + path);
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d) x[d] = std::stod(cells[d]);
        ds.samples.push_row({x.data(), x.size()});
        if (!cells.back().empty()) {
            any_label = true;
            ds.labels.push_back(std::stoi(cells.back()));
        } else if (any_label) {
            throw IoError("dataset csv: mixed labeled/unlabeled rows in " + path);
        }
    }
    if (!any_label) ds.labels.clear();
    if (any_label && ds.labels.size() != ds.size())
        throw IoError("dataset csv: mixed labeled/unlabeled rows in " + path);
    return ds;
}

nlohmann::json dist_to_json(const DistributionSpec& spec) {
    nlohmann::json j;
    j["spec_id"] = spec.id;
    if (const auto* g = std::get_if<GaussianMixtureSpec>(&spec.params)) {
        j["kind"] = "gaussian-mixture";
        j["dim"] = g->dim;
        j["n_classes"] = g->n_classes;
        j["means"] = g->means.a;
        j["vars"] = g->vars.a;
    } else if (const auto* u = std::get_if<UniformBoxSpec>(&spec.params)) {
        j["kind"] = "uniform-box";
        j["dim"] = u->dim;
        j["lo"] = u->lo;
        j["hi"] = u->hi;
    } else {
        const auto& s = std::get<ShiftedSurrogateSpec>(spec.params);
        j["kind"] = "shifted-surrogate";
        j["dim"] = s.base.dim;
        j["n_classes"] = s.base.n_classes;
        j["base_means"] = s.base.means.a;
        j["base_vars"] = s.base.vars.a;
        j["shift"] = s.shift;
        j["scale"] = s.scale;
    }
    return j;
}

DistributionSpec dist_from_json(const nlohmann::json& j) {
    DistributionSpec spec;
    spec.id = j.value("spec_id", std::string{});
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian-mixture") {
        GaussianMixtureSpec g;
        g.dim = j.at("dim").get<int>();
        g.n_classes = j.at("n_classes").get<int>();
        g.means = Mat(static_cast<std::size_t>(g.n_classes), static_cast<std::size_t>(g.dim));
        g.means.a = j.at("means").get<std::vector<double>>();
        g.vars = Mat(g.means.rows, g.means.cols);
        g.vars.a = j.at("vars").get<std::vector<double>>();
        spec.params = std::move(g);
    } else if (kind == "uniform-box") {
        UniformBoxSpec u;
        u.dim = j.at("dim").get<int>();
        u.lo = j.at("lo").get<std::vector<double>>();
        u.hi = j.at("hi").get<std::vector<double>>();
        spec.params = std::move(u);
    } else if (kind == "shifted-surrogate") {
        ShiftedSurrogateSpec s;
        s.base.dim = j.at("dim").get<int>();
        s.base.n_classes = j.at("n_classes").get<int>();
        s.base.means =
            Mat(static_cast<std::size_t>(s.base.n_classes), static_cast<std::size_t>(s.base.dim));
        s.base.means.a = j.at("base_means").get<std::vector<double>>();
        s.base.vars = Mat(s.base.means.rows, s.base.means.cols);
        s.base.vars.a = j.at("base_vars").get<std::vector<double>>();
        s.shift = j.at("shift").get<std::vector<double>>();
        s.scale = j.at("scale").get<double>();
        spec.params = std::move(s);
    } else {
        throw ConfigError("distribution json: unknown kind '" + kind + "'");
    }
    spec.validate();
    return spec;
}

void save_descriptor(const DistributionSpec& spec, std::uint64_t seed, std::size_t n,
                     const std::string& path) {
    nlohmann::json j = dist_to_json(spec);
    j["seed"] = seed;
    j["n"] = n;
    io::write_file(path, j.dump(2) + "\n");
}

}  // namespace melab::data
