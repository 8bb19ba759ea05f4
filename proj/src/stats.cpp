#include "turbkit/stats.hpp"

#include "turbkit/errors.hpp"

#include <cmath>

namespace turbkit {

RunningStats::RunningStats(std::size_t dim, std::string label, bool keep_series)
    : label_(std::move(label)), mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::VectorXd::Zero(dim)), keep_(keep_series) {}

void RunningStats::accumulate(const Eigen::VectorXd& x) {
    if (x.size() != mean_.size())
        throw ConfigError("RunningStats '" + label_ + "': sample dimension " + std::to_string(x.size()) +
                          " does not match " + std::to_string(mean_.size()));
    ++count_;
    Eigen::VectorXd delta = x - mean_;
    mean_ += delta / double(count_);
    m2_ += (delta.array() * (x - mean_).array()).matrix();
    if (keep_) samples_.push_back(x);
}

Eigen::VectorXd RunningStats::variance() const {
    if (count_ < 2) return Eigen::VectorXd::Constant(mean_.size(), std::nan(""));
    return m2_ / double(count_ - 1);
}

std::vector<double> RunningStats::series(std::size_t i) const {
    std::vector<double> s;
    s.reserve(samples_.size());
    for (const auto& x : samples_) s.push_back(x(i));
    return s;
}

RunningStats accumulate(RunningStats stats, const Eigen::VectorXd& x) {
    stats.accumulate(x);
    return stats;
}

RunningStats merge(const RunningStats& a, const RunningStats& b) {
    if (a.count_ == 0) return b;
    if (b.count_ == 0) return a;
    if (a.label_ != b.label_) throw ConfigError("cannot merge statistics '" + a.label_ + "' and '" + b.label_ + "'");
    if (a.dim() != b.dim()) throw ConfigError("cannot merge statistics of different dimension");
    RunningStats r = a;
    const double na = double(a.count_), nb = double(b.count_), n = na + nb;
    Eigen::VectorXd delta = b.mean_ - a.mean_;
    r.count_ = a.count_ + b.count_;
    r.mean_ = a.mean_ + delta * (nb / n);
    r.m2_ = a.m2_ + b.m2_ + (delta.array().square() * (na * nb / n)).matrix();
    r.keep_ = a.keep_ && b.keep_;
    if (r.keep_)
        r.samples_.insert(r.samples_.end(), b.samples_.begin(), b.samples_.end());
    else
        r.samples_.clear();
    return r;
}

double integrated_autocorrelation_time(const std::vector<double>& x, double c) {
    const std::size_t n = x.size();
    if (n < 4) return 1.0;
    double mean = 0;
    for (double v : x) mean += v;
    mean /= double(n);
    std::vector<double> y(n);
    double c0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x[i] - mean;
        c0 += y[i] * y[i];
    }
    if (c0 == 0) return 1.0;
    double tau = 1.0;
    for (std::size_t w = 1; w < n / 2; ++w) {
        double ct = 0;
        for (std::size_t i = 0; i + w < n; ++i) ct += y[i] * y[i + w];
        tau += 2.0 * ct / c0;
        if (double(w) >= c * tau) break;
    }
    return tau;
}

Estimate finalize(const RunningStats& stats, bool use_autocorrelation) {
    Estimate e;
    const std::size_t d = stats.dim();
    e.mean = stats.mean();
    e.count = stats.count();
    e.iact = Eigen::VectorXd::Ones(d);
    e.count_effective = Eigen::VectorXd::Constant(d, double(stats.count()));
    e.stderr_available = stats.count() >= 2;
    if (!e.stderr_available) {
        e.stderr_ = Eigen::VectorXd::Constant(d, std::nan(""));
        return e;
    }
    if (use_autocorrelation && stats.keeps_series()) {
        for (std::size_t i = 0; i < d; ++i) {
            e.iact(i) = integrated_autocorrelation_time(stats.series(i));
            e.count_effective(i) = double(stats.count()) / std::max(1.0, e.iact(i));
        }
    }
    e.stderr_ = (stats.variance().array() / e.count_effective.array()).sqrt().matrix();
    return e;
}

}  // namespace turbkit
