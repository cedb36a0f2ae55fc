#include "splinefold/bezierfold.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "json.hpp"

#include "splinefold/parallel.hpp"
#include "splinefold/pca.hpp"

namespace splinefold {

SplineCode encode(const Manifold& m, const CubicSpline& b) {
    const int l = b.segments();
    if (l < 1) throw Error(ErrorKind::InvalidArgument, "empty spline");
    SplineCode c;
    c.anchors.reserve(static_cast<std::size_t>(l) + 1);
    for (int i = 0; i < l; ++i) {
        const auto s = b.segment(i);
        c.anchors.push_back(BundlePoint{s[0], m.log_at(s[0].coords, s[1].coords)});
    }
    const auto last = b.segment(l - 1);
    c.anchors.push_back(BundlePoint{last[3], -m.log_at(last[3].coords, last[2].coords)});
    return c;
}

CubicSpline decode(const Manifold& m, const SplineCode& c) {
    if (c.anchors.size() < 2) throw Error(ErrorKind::InvalidArgument, "code needs two anchors");
    const double limit = m.injectivity_guard() / 3.0;
    std::vector<Point> controls;
    controls.reserve(3 * c.anchors.size() - 2);
    for (std::size_t i = 0; i < c.anchors.size(); ++i) {
        const BundlePoint& a = c.anchors[i];
        if (!(a.fiber.norm() < limit))
            throw Error(ErrorKind::OutOfInjectivityRadius, "anchor velocity too long", i);
        if (i > 0) controls.push_back(Point{m.exp_at(a.foot.coords, -a.fiber)});
        controls.push_back(a.foot);
        if (i + 1 < c.anchors.size()) controls.push_back(Point{m.exp_at(a.foot.coords, a.fiber)});
    }
    return CubicSpline(std::move(controls));
}

void Bezierfold::check_shape(const SplineCode& a, const SplineCode& b) const {
    if (a.anchors.size() != b.anchors.size())
        throw Error(ErrorKind::InvalidArgument, "codes have different segment counts");
}

double Bezierfold::inner(const SplineCode& at, const SplineCodeTangent& x,
                         const SplineCodeTangent& y) const {
    if (x.components.size() != at.anchors.size() || y.components.size() != at.anchors.size())
        throw Error(ErrorKind::InvalidArgument, "tangent has the wrong number of components");
    double s = 0.0;
    for (std::size_t i = 0; i < at.anchors.size(); ++i) {
        try {
            s += bundle_.inner(at.anchors[i], x.components[i], y.components[i]);
        } catch (const Error& e) {
            throw e.at(i);
        }
    }
    return s;
}

double Bezierfold::norm(const SplineCode& at, const SplineCodeTangent& x) const {
    return std::sqrt(inner(at, x, x));
}

std::vector<SplineCode> Bezierfold::geodesic(const SplineCode& a, const SplineCode& b) const {
    check_shape(a, b);
    const std::size_t n = a.anchors.size();
    std::vector<DiscretePath> paths(n);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            paths[i] = bundle_.geodesic(a.anchors[i], b.anchors[i]);
        } catch (const Error& e) {
            throw e.at(i);
        }
    }
    const int k = bundle_.options().segments;
    std::vector<SplineCode> out(static_cast<std::size_t>(k) + 1);
    for (int j = 0; j <= k; ++j)
        for (std::size_t i = 0; i < n; ++i) out[j].anchors.push_back(paths[i].nodes[j]);
    return out;
}

SplineCodeTangent Bezierfold::log(const SplineCode& a, const SplineCode& b) const {
    check_shape(a, b);
    SplineCodeTangent x;
    x.components.reserve(a.anchors.size());
    for (std::size_t i = 0; i < a.anchors.size(); ++i) {
        try {
            x.components.push_back(bundle_.log(a.anchors[i], b.anchors[i]));
        } catch (const Error& e) {
            throw e.at(i);
        }
    }
    return x;
}

SplineCode Bezierfold::exp(const SplineCode& a, const SplineCodeTangent& x) const {
    if (x.components.size() != a.anchors.size())
        throw Error(ErrorKind::InvalidArgument, "tangent has the wrong number of components");
    SplineCode out;
    out.anchors.reserve(a.anchors.size());
    for (std::size_t i = 0; i < a.anchors.size(); ++i) {
        try {
            out.anchors.push_back(bundle_.exp(a.anchors[i], x.components[i]));
        } catch (const Error& e) {
            throw e.at(i);
        }
    }
    return out;
}

double Bezierfold::dist(const SplineCode& a, const SplineCode& b) const {
    check_shape(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.anchors.size(); ++i) {
        const double d = bundle_.dist(a.anchors[i], b.anchors[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

SplineCode Bezierfold::mean(std::span<const SplineCode> codes) const {
    if (codes.empty()) throw Error(ErrorKind::InvalidArgument, "mean of no codes");
    const std::size_t n = codes.front().anchors.size();
    for (const auto& c : codes) check_shape(codes.front(), c);
    SplineCode out;
    out.anchors.resize(n);
    std::vector<BundlePoint> column(codes.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < codes.size(); ++j) column[j] = codes[j].anchors[i];
        try {
            out.anchors[i] = bundle_.mean(column);
        } catch (const Error& e) {
            throw e.at(i);
        }
    }
    return out;
}

SplineCodeTangent Bezierfold::zero(const SplineCode& at) const {
    SplineCodeTangent x;
    for (const auto& a : at.anchors) x.components.push_back(bundle_.zero_tangent(a));
    return x;
}

SplineCodeTangent Bezierfold::combine(const SplineCode& at, std::span<const SplineCodeTangent> xs,
                                      std::span<const double> weights) const {
    if (xs.size() != weights.size())
        throw Error(ErrorKind::InvalidArgument, "tangents and weights differ in length");
    SplineCodeTangent out = zero(at);
    for (std::size_t j = 0; j < xs.size(); ++j) {
        if (xs[j].components.size() != at.anchors.size())
            throw Error(ErrorKind::InvalidArgument, "tangent has the wrong number of components", j);
        for (std::size_t i = 0; i < at.anchors.size(); ++i) {
            out.components[i].horizontal += weights[j] * xs[j].components[i].horizontal;
            out.components[i].vertical += weights[j] * xs[j].components[i].vertical;
        }
    }
    return out;
}

Eigen::VectorXd Bezierfold::stack(const SplineCodeTangent& x) const {
    const int d = base().ambient_dim();
    Eigen::VectorXd out(2 * d * static_cast<Eigen::Index>(x.components.size()));
    Eigen::Index k = 0;
    for (const auto& c : x.components) {
        out.segment(k, d) = c.horizontal;
        out.segment(k + d, d) = c.vertical;
        k += 2 * d;
    }
    return out;
}

PGAModel Bezierfold::pga(std::span<const SplineCode> codes, int modes) const {
    if (codes.size() < 2) throw Error(ErrorKind::InsufficientData, "PGA needs two codes");
    const int dim = (codes.front().segments() + 1) * 2 * base().dim();
    const int limit = std::min(static_cast<int>(codes.size()) - 1, dim);
    if (modes < 1 || modes > limit)
        throw Error(ErrorKind::InvalidArgument,
                    "mode count must lie in [1, " + std::to_string(limit) + "]");

    PGAModel model;
    model.mean = mean(codes);
    std::vector<SplineCodeTangent> logs(codes.size());
    parallel_for(codes.size(), [&](std::size_t j) { logs[j] = log(model.mean, codes[j]); });

    Eigen::MatrixXd stacked(stack(logs.front()).size(), static_cast<Eigen::Index>(codes.size()));
    for (std::size_t j = 0; j < codes.size(); ++j)
        stacked.col(static_cast<Eigen::Index>(j)) = stack(logs[j]);
    const Eigen::MatrixXd gram = stacked.transpose() * stacked;
    const TangentPCA pca = tangent_pca(gram, modes);

    model.variances = pca.variances;
    model.scores = pca.scores;
    model.total_variance = pca.total_variance;
    model.rank = pca.rank;
    model.rank_deficient = pca.rank_deficient;
    std::vector<double> w(codes.size());
    for (int m = 0; m < modes; ++m) {
        for (std::size_t j = 0; j < codes.size(); ++j)
            w[j] = pca.coefficients(static_cast<Eigen::Index>(j), m);
        model.directions.push_back(combine(model.mean, logs, w));
    }
    return model;
}

void write_pga_scores(std::ostream& out, const Eigen::MatrixXd& scores,
                      std::span<const std::string> ids, std::span<const std::string> labels) {
    if (ids.size() != static_cast<std::size_t>(scores.rows()) ||
        (!labels.empty() && labels.size() != ids.size()))
        throw Error(ErrorKind::InvalidArgument, "score rows, ids and labels differ in length");
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << "id,label";
    for (Eigen::Index m = 0; m < scores.cols(); ++m) out << ",score_" << m + 1;
    out << '\n' << std::setprecision(17);
    for (Eigen::Index j = 0; j < scores.rows(); ++j) {
        out << ids[j] << ',' << (labels.empty() ? "" : labels[j]);
        for (Eigen::Index m = 0; m < scores.cols(); ++m) out << ',' << scores(j, m);
        out << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

void write_pga_sidecar(std::ostream& out, const Eigen::VectorXd& variances, double total_variance,
                       int rank, bool rank_deficient) {
    nlohmann::ordered_json j;
    j["variances"] = std::vector<double>(variances.begin(), variances.end());
    j["total_variance"] = total_variance;
    j["rank"] = rank;
    j["rank_deficient"] = rank_deficient;
    out << j.dump(2) << '\n';
}

}  // namespace splinefold
