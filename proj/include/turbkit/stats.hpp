#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <vector>

namespace turbkit {

// One-pass mean/variance accumulator over vector samples. With keep_series
// the raw stream is retained so an autocorrelation time can be estimated.
class RunningStats {
public:
    RunningStats() = default;
    RunningStats(std::size_t dim, std::string label, bool keep_series = false);

    void accumulate(const Eigen::VectorXd& x);

    std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
    std::size_t count() const { return count_; }
    const std::string& label() const { return label_; }
    bool keeps_series() const { return keep_; }
    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::VectorXd& m2() const { return m2_; }
    Eigen::VectorXd variance() const;
    // samples of component i, in stream order
    std::vector<double> series(std::size_t i) const;

    friend RunningStats merge(const RunningStats& a, const RunningStats& b);

private:
    std::string label_;
    std::size_t count_ = 0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
    bool keep_ = false;
    std::vector<Eigen::VectorXd> samples_;
};

RunningStats accumulate(RunningStats stats, const Eigen::VectorXd& x);
RunningStats merge(const RunningStats& a, const RunningStats& b);

struct Estimate {
    Eigen::VectorXd mean;
    Eigen::VectorXd stderr_;
    Eigen::VectorXd iact;             // 1 when not estimated
    Eigen::VectorXd count_effective;
    std::size_t count = 0;
    bool stderr_available = false;
};

// stderr = sqrt(variance / count_effective); for retained series the
// effective count is count / max(1, tau_int) with tau_int from a
// self-consistent window (W >= c tau(W), c = 5)
Estimate finalize(const RunningStats& stats, bool use_autocorrelation = true);

double integrated_autocorrelation_time(const std::vector<double>& x, double c = 5.0);

}  // namespace turbkit
