#include "splinefold/stats_ml.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <string>

#include "splinefold/parallel.hpp"

namespace splinefold {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr double kTau = 1e-12;

// libsvm-style SMO with second-order working set selection on
//   min 1/2 a^T Q a - e^T a,  0 <= a_i <= C_i,  y^T a = 0,
// Q_ij = y_i y_j K_ij.
void solve_binary(const Eigen::MatrixXd& k, BinarySVM& b, const SVMOptions& opt) {
    const std::size_t n = b.rows.size();
    const auto kk = [&](std::size_t i, std::size_t j) { return k(b.rows[i], b.rows[j]); };
    std::vector<double>& a = b.alpha;
    const std::vector<double>& y = b.y;
    const std::vector<double>& c = b.upper;
    a.assign(n, 0.0);
    std::vector<double> g(n, -1.0);
    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) qd[i] = kk(i, i);
    const auto upper_bound = [&](std::size_t i) { return a[i] >= c[i]; };
    const auto lower_bound = [&](std::size_t i) { return a[i] <= 0.0; };
    const auto dual = [&] {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) f += a[i] * (g[i] - 1.0);
        return -0.5 * f;
    };
    if (opt.record_objective) b.dual_history.push_back(dual());

    long it = 0;
    for (;; ++it) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (!upper_bound(t) && -g[t] >= gmax) gmax = -g[t], i = t;
            } else {
                if (!lower_bound(t) && g[t] >= gmax) gmax = g[t], i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n && i < n; ++t) {
            double diff = 0.0;
            double quad = 0.0;
            if (y[t] > 0) {
                if (lower_bound(t)) continue;
                diff = gmax + g[t];
                gmax2 = std::max(gmax2, g[t]);
                quad = qd[i] + qd[t] - 2.0 * y[t] * kk(i, t);
            } else {
                if (upper_bound(t)) continue;
                diff = gmax - g[t];
                gmax2 = std::max(gmax2, -g[t]);
                quad = qd[i] + qd[t] + 2.0 * y[t] * kk(i, t);
            }
            if (diff > 0.0) {
                const double obj = -(diff * diff) / (quad > 0.0 ? quad : kTau);
                if (obj <= best) best = obj, j = t;
            }
        }
        if (i == n || j == n || gmax + gmax2 < opt.tolerance) break;
        if (it >= opt.max_iterations)
            throw Error(ErrorKind::NoConvergence,
                        "SMO stopped after " + std::to_string(it) + " iterations");

        const double kij = kk(i, j);
        const double qij = y[i] * y[j] * kij;
        const double ai = a[i], aj = a[j];
        const double ci = c[i], cj = c[j];
        if (y[i] != y[j]) {
            double quad = qd[i] + qd[j] + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-g[i] - g[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) a[j] = 0.0, a[i] = diff;
            } else {
                if (a[i] < 0.0) a[i] = 0.0, a[j] = -diff;
            }
            if (diff > ci - cj) {
                if (a[i] > ci) a[i] = ci, a[j] = ci - diff;
            } else {
                if (a[j] > cj) a[j] = cj, a[i] = cj + diff;
            }
        } else {
            double quad = qd[i] + qd[j] - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (g[i] - g[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > ci) {
                if (a[i] > ci) a[i] = ci, a[j] = sum - ci;
            } else {
                if (a[j] < 0.0) a[j] = 0.0, a[i] = sum;
            }
            if (sum > cj) {
                if (a[j] > cj) a[j] = cj, a[i] = sum - cj;
            } else {
                if (a[i] < 0.0) a[i] = 0.0, a[j] = sum;
            }
        }
        const double di = a[i] - ai, dj = a[j] - aj;
        for (std::size_t t = 0; t < n; ++t)
            g[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
        if (opt.record_objective) b.dual_history.push_back(dual());
    }
    b.iterations = it;
    b.dual_objective = dual();

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    int free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * g[t];
        if (upper_bound(t)) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower_bound(t)) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    b.rho = free_count > 0 ? free_sum / free_count : 0.5 * (ub + lb);
}

std::vector<int> vote(const SVMModel& model, const Eigen::MatrixXd& k) {
    const std::size_t nc = model.classes.size();
    std::vector<int> out(static_cast<std::size_t>(k.rows()));
    std::vector<int> votes(nc);
    std::vector<double> dec(model.pairs.size());
    std::map<int, std::size_t> index;
    for (std::size_t c = 0; c < nc; ++c) index[model.classes[c]] = c;
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
        std::fill(votes.begin(), votes.end(), 0);
        const Eigen::VectorXd row = k.row(r).transpose();
        for (std::size_t p = 0; p < model.pairs.size(); ++p) {
            dec[p] = decision_value(model.pairs[p], row);
            ++votes[index[dec[p] > 0.0 ? model.pairs[p].positive : model.pairs[p].negative]];
        }
        const int top = *std::max_element(votes.begin(), votes.end());
        std::vector<std::size_t> tied;
        for (std::size_t c = 0; c < nc; ++c)
            if (votes[c] == top) tied.push_back(c);
        std::size_t winner = tied.front();
        if (tied.size() == 2) {
            // Two-way tie: the class that won the duel between the two.
            for (std::size_t p = 0; p < model.pairs.size(); ++p) {
                const auto& pr = model.pairs[p];
                if (index[pr.positive] == tied[0] && index[pr.negative] == tied[1])
                    winner = dec[p] > 0.0 ? tied[0] : tied[1];
            }
        }
        out[static_cast<std::size_t>(r)] = model.classes[winner];
    }
    return out;
}

}  // namespace

std::uint64_t CounterRng::next() { return mix64(mix64(seed_ ^ mix64(stream_)) + counter_++); }

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty range");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
}

double CounterRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double BinarySVM::equality_residual() const {
    double s = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * y[i];
    return std::abs(s);
}

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
    if (a.cols() != b.cols()) throw Error(ErrorKind::InvalidArgument, "feature lengths differ");
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            k(i, j) = std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
    return k;
}

SVMModel svm_train_kernel(const Eigen::MatrixXd& k, std::span<const int> labels,
                          const SVMOptions& options) {
    const std::size_t n = labels.size();
    if (k.rows() != static_cast<Eigen::Index>(n) || k.cols() != k.rows())
        throw Error(ErrorKind::InvalidArgument, "kernel matrix does not match the labels");
    SVMModel model;
    model.options = options;
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    if (counts.size() < 2) throw Error(ErrorKind::SingleClassInput, "need at least two classes");
    for (const auto& [cls, count] : counts) {
        model.classes.push_back(cls);
        model.class_weights.push_back(
            options.balanced ? static_cast<double>(n) / (static_cast<double>(counts.size()) * count)
                             : 1.0);
    }
    for (std::size_t p = 0; p < model.classes.size(); ++p) {
        for (std::size_t q = p + 1; q < model.classes.size(); ++q) {
            BinarySVM b;
            b.positive = model.classes[p];
            b.negative = model.classes[q];
            for (std::size_t i = 0; i < n; ++i) {
                if (labels[i] == b.positive) {
                    b.rows.push_back(i);
                    b.y.push_back(1.0);
                    b.upper.push_back(options.C * model.class_weights[p]);
                } else if (labels[i] == b.negative) {
                    b.rows.push_back(i);
                    b.y.push_back(-1.0);
                    b.upper.push_back(options.C * model.class_weights[q]);
                }
            }
            solve_binary(k, b, options);
            model.pairs.push_back(std::move(b));
        }
    }
    return model;
}

double decision_value(const BinarySVM& pair, const Eigen::VectorXd& kernel_row) {
    double s = 0.0;
    for (std::size_t i = 0; i < pair.rows.size(); ++i)
        if (pair.alpha[i] != 0.0) s += pair.alpha[i] * pair.y[i] * kernel_row[pair.rows[i]];
    return s - pair.rho;
}

std::vector<int> svm_predict_kernel(const SVMModel& model, const Eigen::MatrixXd& k) {
    return vote(model, k);
}

SVMModel svm_train(const Eigen::MatrixXd& x, std::span<const int> labels,
                   const SVMOptions& options) {
    if (!x.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite features");
    SVMModel model = svm_train_kernel(rbf_gram(x, x, options.gamma), labels, options);
    model.train = x;
    return model;
}

std::vector<int> svm_predict(const SVMModel& model, const Eigen::MatrixXd& x) {
    if (model.train.size() == 0)
        throw Error(ErrorKind::InvalidArgument, "model was trained from a kernel matrix");
    return vote(model, rbf_gram(x, model.train, model.options.gamma));
}

double balanced_accuracy(std::span<const int> predicted, std::span<const int> truth,
                         std::span<const int> classes) {
    if (predicted.size() != truth.size())
        throw Error(ErrorKind::InvalidArgument, "predictions and labels differ in length");
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // class -> (hits, total)
    if (classes.empty()) {
        for (int t : truth) tally[t];
    } else {
        for (int c : classes) tally[c];
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto it = tally.find(truth[i]);
        if (it == tally.end()) continue;
        ++it->second.second;
        if (predicted[i] == truth[i]) ++it->second.first;
    }
    if (tally.empty()) throw Error(ErrorKind::EmptyClass, "no classes to score");
    double sum = 0.0;
    for (const auto& [cls, ht] : tally) {
        if (ht.second == 0)
            throw Error(ErrorKind::EmptyClass, "class " + std::to_string(cls) + " has no samples");
        sum += static_cast<double>(ht.first) / static_cast<double>(ht.second);
    }
    return sum / static_cast<double>(tally.size());
}

Summary summarize(std::vector<double> v) {
    Summary s;
    s.count = v.size();
    if (v.empty()) return s;
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double sq = 0.0;
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.std = v.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    const auto quantile = [&](double q) {
        const double pos = q * (n - 1.0);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
    };
    s.min = v.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.max = v.back();
    return s;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, CounterRng& rng) {
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    std::vector<int> out(labels.size(), 0);
    std::size_t deal = 0;
    for (auto& [cls, idx] : members) {
        shuffle(idx, rng);
        for (std::size_t i : idx) out[i] = static_cast<int>(deal++ % static_cast<std::size_t>(folds));
    }
    return out;
}

CVResult repeated_cv(const Eigen::MatrixXd& x, std::span<const int> labels,
                     const CVOptions& options) {
    if (options.folds < 2 || options.repetitions < 1)
        throw Error(ErrorKind::InvalidArgument, "need at least 2 folds and 1 repetition");
    if (x.rows() != static_cast<Eigen::Index>(labels.size()))
        throw Error(ErrorKind::InvalidArgument, "features and labels differ in length");
    if (!x.allFinite()) throw Error(ErrorKind::InvalidArgument, "non-finite features");
    std::map<int, int> counts;
    for (int l : labels) ++counts[l];
    for (const auto& [cls, count] : counts)
        if (count < options.folds)
            throw Error(ErrorKind::ClassTooSmall, "class " + std::to_string(cls) + " has " +
                                                      std::to_string(count) + " samples for " +
                                                      std::to_string(options.folds) + " folds");
    std::vector<int> classes;
    for (const auto& [cls, count] : counts) classes.push_back(cls);

    Eigen::MatrixXd full;
    if (!options.standardize) full = rbf_gram(x, x, options.svm.gamma);

    const std::size_t reps = static_cast<std::size_t>(options.repetitions);
    const std::size_t nf = static_cast<std::size_t>(options.folds);
    std::vector<double> acc(reps * nf);
    parallel_for(reps, [&](std::size_t r) {
        CounterRng rng(options.seed, r);
        const std::vector<int> fold = stratified_folds(labels, options.folds, rng);
        for (int f = 0; f < options.folds; ++f) {
            std::vector<Eigen::Index> train, test;
            std::vector<int> ytrain, ytest;
            for (std::size_t i = 0; i < labels.size(); ++i) {
                if (fold[i] == f) {
                    test.push_back(static_cast<Eigen::Index>(i));
                    ytest.push_back(labels[i]);
                } else {
                    train.push_back(static_cast<Eigen::Index>(i));
                    ytrain.push_back(labels[i]);
                }
            }
            std::vector<int> pred;
            if (options.standardize) {
                Eigen::MatrixXd xtr = x(train, Eigen::all);
                Eigen::MatrixXd xte = x(test, Eigen::all);
                const Eigen::RowVectorXd mu = xtr.colwise().mean();
                Eigen::RowVectorXd sd =
                    ((xtr.rowwise() - mu).array().square().colwise().sum() / xtr.rows()).sqrt();
                for (Eigen::Index c = 0; c < sd.size(); ++c)
                    if (!(sd[c] > 0.0)) sd[c] = 1.0;
                xtr = (xtr.rowwise() - mu).array().rowwise() / sd.array();
                xte = (xte.rowwise() - mu).array().rowwise() / sd.array();
                pred = svm_predict(svm_train(xtr, ytrain, options.svm), xte);
            } else {
                const SVMModel model = svm_train_kernel(full(train, train), ytrain, options.svm);
                pred = svm_predict_kernel(model, full(test, train));
            }
            acc[r * nf + static_cast<std::size_t>(f)] = balanced_accuracy(pred, ytest, classes);
        }
    });

    CVResult out;
    out.scores.reserve(acc.size());
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t f = 0; f < nf; ++f)
            out.scores.push_back(
                FoldScore{static_cast<int>(r), static_cast<int>(f), acc[r * nf + f]});
    out.summary = summarize(acc);
    return out;
}

void write_cv_csv(std::ostream& out, const std::string& method, const CVResult& result,
                  bool header) {
    if (header) out << "repetition,fold,method,accuracy\n";
    char buf[64];
    for (const auto& s : result.scores) {
        std::snprintf(buf, sizeof buf, "%.17g", s.accuracy);
        out << s.repetition << ',' << s.fold << ',' << method << ',' << buf << '\n';
    }
}

L2Baseline l2_baseline_pga(const Manifold& m, std::span<const std::vector<Point>> curves,
                           int modes) {
    if (curves.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least two curves");
    const std::size_t len = curves.front().size();
    for (const auto& c : curves)
        if (c.size() != len) throw Error(ErrorKind::InvalidArgument, "curves differ in length");
    const int dim = static_cast<int>(len) * m.dim();
    const int limit = std::min(static_cast<int>(curves.size()) - 1, dim);
    if (modes < 1 || modes > limit)
        throw Error(ErrorKind::InvalidArgument,
                    "mode count must lie in [1, " + std::to_string(limit) + "]");

    L2Baseline out;
    out.mean.resize(len);
    std::vector<Point> column(curves.size());
    for (std::size_t k = 0; k < len; ++k) {
        for (std::size_t j = 0; j < curves.size(); ++j) column[j] = curves[j][k];
        try {
            out.mean[k] = m.frechet_mean(column);
        } catch (const Error& e) {
            throw e.at(k);
        }
    }
    const int d = m.ambient_dim();
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(len) * d,
                            static_cast<Eigen::Index>(curves.size()));
    for (std::size_t j = 0; j < curves.size(); ++j)
        for (std::size_t k = 0; k < len; ++k)
            stacked.block(static_cast<Eigen::Index>(k) * d, static_cast<Eigen::Index>(j), d, 1) =
                m.log_at(out.mean[k].coords, curves[j][k].coords);
    out.pca = tangent_pca(stacked.transpose() * stacked, modes);
    return out;
}

}  // namespace splinefold
